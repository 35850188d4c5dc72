// SPDX-License-Identifier: Apache-2.0
//
// riscest - RIS-assisted XL-MIMO channel simulation and estimation toolkit
// Copyright (C) 2026 The riscest authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#include "riscest/config.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <filesystem>
#include <functional>
#include <sstream>

extern char** environ;

namespace riscest {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void parse(const std::string& key, const std::string& v, double& out) {
    const char* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (r.ec != std::errc{} || r.ptr != end) throw ConfigError(key + ": not a number: '" + v + "'");
}

void parse(const std::string& key, const std::string& v, int& out) {
    const char* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (r.ec != std::errc{} || r.ptr != end) throw ConfigError(key + ": not an integer: '" + v + "'");
}

void parse(const std::string& key, const std::string& v, std::uint64_t& out) {
    const char* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (r.ec != std::errc{} || r.ptr != end) throw ConfigError(key + ": not an unsigned integer: '" + v + "'");
}

void parse(const std::string& key, const std::string& v, bool& out) {
    std::string l = v;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "1" || l == "true" || l == "yes" || l == "on")
        out = true;
    else if (l == "0" || l == "false" || l == "no" || l == "off")
        out = false;
    else
        throw ConfigError(key + ": not a boolean: '" + v + "'");
}

void parse(const std::string&, const std::string& v, std::string& out) { out = v; }

void parse(const std::string& key, const std::string& v, std::vector<double>& out) {
    try {
        out = parse_double_list(v);
    } catch (const ConfigError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

std::string show(double v) { return fmt(v); }
std::string show(int v) { return std::to_string(v); }
std::string show(std::uint64_t v) { return std::to_string(v); }
std::string show(bool v) { return v ? "1" : "0"; }
std::string show(const std::string& v) { return v; }
std::string show(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += fmt(v[i]);
    }
    return out;
}

struct Field {
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class M>
Field field(const char* key, M ExperimentConfig::*member) {
    return {key, [member](const ExperimentConfig& c) { return show(c.*member); },
            [member, key](ExperimentConfig& c, const std::string& v) { parse(key, v, c.*member); }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        field("profile", &ExperimentConfig::profile),
        field("seed", &ExperimentConfig::seed),
        field("out_dir", &ExperimentConfig::out_dir),
        field("threads", &ExperimentConfig::threads),
        field("deterministic", &ExperimentConfig::deterministic),
        field("carrier_hz", &ExperimentConfig::carrier_hz),
        field("bs_h", &ExperimentConfig::bs_h),
        field("bs_v", &ExperimentConfig::bs_v),
        field("bs_spacing_h", &ExperimentConfig::bs_spacing_h),
        field("bs_spacing_v", &ExperimentConfig::bs_spacing_v),
        field("ris_h", &ExperimentConfig::ris_h),
        field("ris_v", &ExperimentConfig::ris_v),
        field("ris_spacing_h", &ExperimentConfig::ris_spacing_h),
        field("ris_spacing_v", &ExperimentConfig::ris_spacing_v),
        field("response_form", &ExperimentConfig::response_form),
        field("eta_r", &ExperimentConfig::eta_r),
        field("eta_b", &ExperimentConfig::eta_b),
        field("rho", &ExperimentConfig::rho),
        field("correlated", &ExperimentConfig::correlated),
        field("pilot_l", &ExperimentConfig::pilot_l),
        field("users", &ExperimentConfig::users),
        field("pilot_symbols", &ExperimentConfig::pilot_symbols),
        field("pilot_power", &ExperimentConfig::pilot_power),
        field("direct_subframes", &ExperimentConfig::direct_subframes),
        field("ideal_direct_cancellation", &ExperimentConfig::ideal_direct_cancellation),
        field("lmmse_no_m_factor", &ExperimentConfig::lmmse_no_m_factor),
        field("covariance_samples", &ExperimentConfig::covariance_samples),
        field("snr_grid", &ExperimentConfig::snr_grid),
        field("train_samples", &ExperimentConfig::train_samples),
        field("train_fraction", &ExperimentConfig::train_fraction),
        field("test_samples", &ExperimentConfig::test_samples),
        field("patch_h", &ExperimentConfig::patch_h),
        field("patch_w", &ExperimentConfig::patch_w),
        field("patches_per_sample", &ExperimentConfig::patches_per_sample),
        field("levels", &ExperimentConfig::levels),
        field("base_filters", &ExperimentConfig::base_filters),
        field("convs_per_block", &ExperimentConfig::convs_per_block),
        field("kernel", &ExperimentConfig::kernel),
        field("batchnorm", &ExperimentConfig::batchnorm),
        field("identity_init", &ExperimentConfig::identity_init),
        field("lr", &ExperimentConfig::lr),
        field("decay", &ExperimentConfig::decay),
        field("batch_size", &ExperimentConfig::batch_size),
        field("epochs", &ExperimentConfig::epochs),
        field("adam_beta1", &ExperimentConfig::adam_beta1),
        field("adam_beta2", &ExperimentConfig::adam_beta2),
        field("adam_eps", &ExperimentConfig::adam_eps),
        field("resume", &ExperimentConfig::resume),
        field("tile_h", &ExperimentConfig::tile_h),
        field("tile_w", &ExperimentConfig::tile_w),
        field("sweep_axis", &ExperimentConfig::sweep_axis),
        field("sweep_values", &ExperimentConfig::sweep_values),
        field("sweep_snr_db", &ExperimentConfig::sweep_snr_db),
        field("sweep_nlos_eta", &ExperimentConfig::sweep_nlos_eta),
        field("checkpoint", &ExperimentConfig::checkpoint),
    };
    return f;
}

const Field& find_field(const std::string& key) {
    for (const auto& f : fields())
        if (f.key == key) return f;
    throw ConfigError("unknown config key '" + key + "'");
}

} // namespace

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        double v = 0;
        const char* end = item.data() + item.size();
        const auto r = std::from_chars(item.data(), end, v);
        if (r.ec != std::errc{} || r.ptr != end) throw ConfigError("not a number list: '" + text + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& f : fields()) keys.push_back(f.key);
    return keys;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    find_field(key).set(cfg, trim(value));
}

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) {
    return find_field(key).get(cfg);
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": expected key=value");
        set_config_value(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
}

std::map<std::string, std::string> environment_snapshot(const std::string& prefix) {
    std::map<std::string, std::string> env;
    for (char** e = environ; e && *e; ++e) {
        const std::string kv = *e;
        if (kv.rfind(prefix, 0) != 0) continue;
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        env[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return env;
}

void apply_env_overrides(ExperimentConfig& cfg, const std::map<std::string, std::string>& env) {
    for (const auto& f : fields()) {
        std::string name = "RISCEST_" + f.key;
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
        const auto it = env.find(name);
        if (it != env.end()) f.set(cfg, trim(it->second));
    }
}

std::string config_text(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) out += f.key + "=" + f.get(cfg) + "\n";
    return out;
}

void ExperimentConfig::validate() const {
    if (profile != "desk" && profile != "paper") throw ConfigError("profile must be desk or paper");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (!(carrier_hz > 0)) throw ConfigError("carrier_hz must be positive");
    if (bs_h < 1 || bs_v < 1 || ris_h < 1 || ris_v < 1) throw ConfigError("array dimensions must be >= 1");
    if (!(bs_spacing_h > 0 && bs_spacing_v > 0 && ris_spacing_h > 0 && ris_spacing_v > 0))
        throw ConfigError("array spacings must be positive");
    if (response_form != "wave_vector" && response_form != "azimuth_vertical")
        throw ConfigError("response_form must be wave_vector or azimuth_vertical");
    if (!(eta_r >= 0 && eta_b >= 0)) throw ConfigError("Rician factors must be >= 0");
    if (!(rho >= 0 && rho < 1)) throw ConfigError("rho must be in [0, 1)");
    if (pilot_l < 1) throw ConfigError("pilot_l must be >= 1");
    if (users < 1 || pilot_symbols < users) throw ConfigError("need 1 <= users <= pilot_symbols");
    if (!(pilot_power > 0)) throw ConfigError("pilot_power must be positive");
    if (direct_subframes < 0) throw ConfigError("direct_subframes must be >= 0");
    if (covariance_samples < 1) throw ConfigError("covariance_samples must be >= 1");
    if (snr_grid.empty()) throw ConfigError("snr_grid must not be empty");
    if (train_samples < 2) throw ConfigError("train_samples must be >= 2");
    if (!(train_fraction > 0 && train_fraction < 1)) throw ConfigError("train_fraction must be in (0, 1)");
    if (test_samples < 1) throw ConfigError("test_samples must be >= 1");
    if (patch_h < 1 || patch_w < 1 || patch_h > antennas() || patch_w > elements())
        throw ConfigError("patch " + std::to_string(patch_h) + "x" + std::to_string(patch_w) + " must fit in " +
                          std::to_string(antennas()) + "x" + std::to_string(elements()));
    if (patches_per_sample < 1) throw ConfigError("patches_per_sample must be >= 1");
    net_config().validate();
    train_config().validate();
    if (tile_h < 1 || tile_w < 1) throw ConfigError("tile dims must be >= 1");
    static const char* axes[] = {"snr", "pilot_L", "antennas_M", "elements_N", "correlation"};
    if (std::find(std::begin(axes), std::end(axes), sweep_axis) == std::end(axes))
        throw ConfigError("sweep_axis must be one of snr, pilot_L, antennas_M, elements_N, correlation");
}

ChannelConfig ExperimentConfig::channel_config(std::uint64_t channel_seed) const {
    const double wl = wavelength_for(carrier_hz);
    ChannelConfig c;
    c.eta_r = eta_r;
    c.eta_b = eta_b;
    c.rho = rho;
    c.ris = ArrayGeometry::with_spacing(ris_h, ris_v, wl, ris_spacing_h, ris_spacing_v);
    c.bs = ArrayGeometry::with_spacing(bs_h, bs_v, wl, bs_spacing_h, bs_spacing_v);
    c.correlated = correlated;
    c.response_form = response_form == "azimuth_vertical" ? ResponseForm::azimuth_vertical : ResponseForm::wave_vector;
    c.seed = channel_seed;
    return c;
}

PilotConfig ExperimentConfig::pilot_config(double snr_db) const {
    PilotConfig p;
    p.power = pilot_power;
    p.length = pilot_symbols;
    p.users = users;
    p.snr_db = snr_db;
    return p;
}

nn::NetConfig ExperimentConfig::net_config() const {
    nn::NetConfig n;
    n.levels = levels;
    n.base_filters = base_filters;
    n.convs_per_block = convs_per_block;
    n.kernel = kernel;
    n.batchnorm = batchnorm;
    n.patch_h = patch_h;
    n.patch_w = patch_w;
    return n;
}

nn::TrainConfig ExperimentConfig::train_config() const {
    nn::TrainConfig t;
    t.lr = lr;
    t.decay = decay;
    t.batch_size = batch_size;
    t.epochs = epochs;
    t.beta1 = adam_beta1;
    t.beta2 = adam_beta2;
    t.eps = adam_eps;
    t.seed = seed;
    t.val_fraction = 0.0;
    return t;
}

std::string ExperimentConfig::checkpoint_path() const {
    return checkpoint.empty() ? (std::filesystem::path(out_dir) / "model.rcnn").string() : checkpoint;
}

ExperimentConfig profile_defaults(const std::string& profile) {
    ExperimentConfig c;
    if (profile == "desk") return c;
    if (profile != "paper") throw ConfigError("unknown profile '" + profile + "' (desk or paper)");
    c.profile = "paper";
    c.bs_h = c.bs_v = 32;
    c.ris_h = 16;
    c.ris_v = 8;
    c.pilot_l = 128;
    c.train_samples = 10000;
    c.test_samples = 2000;
    c.patch_h = c.patch_w = 32;
    c.tile_h = c.tile_w = 32;
    c.levels = 3;
    c.base_filters = 32;
    c.epochs = 40;
    return c;
}

} // namespace riscest
