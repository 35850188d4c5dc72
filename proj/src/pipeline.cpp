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
#include "riscest/pipeline.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "riscest/complexity.hpp"
#include "riscest/detail/binio.hpp"
#include "riscest/parallel.hpp"

namespace riscest {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t snr_key(double snr_db) {
    // +0.0 and -0.0 must key the same stream
    if (snr_db == 0.0) snr_db = 0.0;
    return std::bit_cast<std::uint64_t>(snr_db);
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

fs::path write_text(const fs::path& path, const std::string& text) {
    ensure_dir(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    detail::write_file(path, text);
    return path;
}

// Keys that describe where a run writes, not what it computes. They are
// left out of stored snapshots so identical runs in different directories
// produce identical bytes.
bool location_key(const std::string& k) {
    return k == "out_dir" || k == "checkpoint" || k == "resume" || k == "threads" || k == "deterministic";
}

std::map<std::string, std::string> config_meta(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> meta;
    for (const auto& k : config_keys())
        if (!location_key(k)) meta["cfg." + k] = get_config_value(cfg, k);
    return meta;
}

int worker_count(const ExperimentConfig& cfg) { return cfg.deterministic ? 1 : std::max(1, cfg.threads); }

nn::DenoiserNet<float> load_net(const ExperimentConfig& cfg, std::ostream& log) {
    const fs::path path = cfg.checkpoint_path();
    if (!fs::exists(path)) throw IoError("checkpoint " + path.string() + " not found; run `train` first");
    nn::Checkpoint ck = nn::load_checkpoint(path);
    log << "loaded " << path.string() << " (" << ck.state.epochs_done << " epochs, "
        << ck.net.parameter_count() << " parameters)\n";
    return std::move(ck.net);
}

} // namespace

std::uint64_t split_seed(std::uint64_t master, Split split) {
    return derive_seed(master, static_cast<std::uint64_t>(split), Stream::channel);
}

std::uint64_t noise_seed(std::uint64_t master, Split split, double snr_db, std::uint64_t index, Stream purpose) {
    return derive_seed(derive_seed(split_seed(master, split), snr_key(snr_db), purpose), index, purpose);
}

// ---- simulator ----

Simulator::Simulator(const ExperimentConfig& cfg)
    : cfg_((cfg.validate(), cfg)),
      train_(cfg.channel_config(split_seed(cfg.seed, Split::train))),
      test_(cfg.channel_config(split_seed(cfg.seed, Split::test))),
      sched_(cfg.pilot_l >= cfg.elements() ? dft_schedule(cfg.elements(), cfg.pilot_l)
                                           : dft_phases(cfg.elements(), cfg.pilot_l)),
      binary_(binary_schedule(cfg.elements())) {}

const ChannelModel& Simulator::model(Split split) const {
    switch (split) {
    case Split::train:
    case Split::direct_train: return train_;
    case Split::test:
    case Split::direct_test: return test_;
    }
    throw ArgumentError("unknown split");
}

PilotSample Simulator::sample(Split split, double snr_db, std::uint64_t index) const {
    PilotSample s;
    s.snr_db = snr_db;
    s.realization = model(split).realize(index);
    const PilotConfig pc = cfg_.pilot_config(snr_db);
    const double var = pc.noise_variance();
    if (cfg_.ideal_direct_cancellation) {
        s.b_hat = s.realization.b;
    } else {
        Rng r(noise_seed(cfg_.seed, split, snr_db, index, Stream::direct_noise));
        s.b_hat = estimate_direct(s.realization.b, cfg_.effective_direct_subframes(), var, r);
    }
    Rng r(noise_seed(cfg_.seed, split, snr_db, index, Stream::pilot_noise));
    s.rx = simulate_pilots(s.realization, sched_, pc, r, true);
    cancel_direct(s.rx, s.b_hat);
    if (ls_available()) s.g_ls = ls_estimate(s.rx, sched_);
    return s;
}

ReceivedPilots Simulator::binary_observation(const PilotSample& s, Split split, std::uint64_t index) const {
    Rng r(noise_seed(cfg_.seed, split, s.snr_db, index, Stream::binary_noise));
    ReceivedPilots rx = simulate_pilots(s.realization, binary_, cfg_.pilot_config(s.snr_db), r, true);
    cancel_direct(rx, s.b_hat);
    return rx;
}

const CMatrix& Simulator::cascade_covariance() const {
    if (!r_g_) {
        const auto n = static_cast<std::size_t>(cfg_.covariance_samples);
        std::vector<CMatrix> g(n);
        parallel_for(n, worker_count(cfg_), [&](std::size_t i, int) { g[i] = train_.realize(i).G; });
        r_g_ = riscest::cascade_covariance(g);
    }
    return *r_g_;
}

// ---- CSV ----

std::string results_csv(const std::vector<ResultRow>& rows) {
    std::string out = "axis,method,nmse_linear,nmse_db,n_samples,seed\n";
    char db[32];
    for (const auto& r : rows) {
        const bool ok = std::isfinite(r.nmse_linear);
        if (ok)
            std::snprintf(db, sizeof db, "%.4f", to_db(r.nmse_linear));
        else
            std::snprintf(db, sizeof db, "nan");
        out += r.axis + ',' + r.method + ',' + (ok ? fmt(r.nmse_linear) : std::string("nan")) + ',' + db + ',' +
               std::to_string(r.n_samples) + ',' + std::to_string(r.seed) + '\n';
    }
    return out;
}

std::string timing_csv(const std::vector<TimingRow>& rows) {
    std::string out = "axis,method,seconds,n_samples\n";
    char buf[32];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.6f", r.seconds);
        out += r.axis + ',' + r.method + ',' + buf + ',' + std::to_string(r.n_samples) + '\n';
    }
    return out;
}

fs::path train_container(const ExperimentConfig& cfg) { return fs::path(cfg.out_dir) / "train.rcds"; }
fs::path val_container(const ExperimentConfig& cfg) { return fs::path(cfg.out_dir) / "val.rcds"; }
fs::path test_container(const ExperimentConfig& cfg, double snr_db) {
    return fs::path(cfg.out_dir) / ("test_snr_" + fmt(snr_db) + ".rcds");
}

fs::path write_config_echo(const ExperimentConfig& cfg, const std::string& command) {
    std::string text = "# resolved configuration of `" + command + "`\n" + config_text(cfg);
    return write_text(fs::path(cfg.out_dir) / (command + ".config.txt"), text);
}

// ---- generate ----

namespace {

// Simulates samples [first, first + n) of the training split, each at the
// SNR the round-robin assigns to its index.
void training_samples(const Simulator& sim, std::size_t first, std::size_t n, std::vector<CMatrix>& in,
                      std::vector<CMatrix>& lab) {
    const auto& grid = sim.config().snr_grid;
    in.assign(n, {});
    lab.assign(n, {});
    parallel_for(n, worker_count(sim.config()), [&](std::size_t j, int) {
        const std::size_t i = first + j;
        PilotSample s = sim.sample(Split::train, grid[i % grid.size()], i);
        in[j] = std::move(*s.g_ls);
        lab[j] = std::move(s.realization.G);
    });
}

PatchDataset patch_range(const Simulator& sim, std::size_t first, std::size_t last, std::uint64_t seed) {
    const ExperimentConfig& cfg = sim.config();
    PatchDataset ds;
    ds.p_y = cfg.patch_h;
    ds.p_x = cfg.patch_w;
    constexpr std::size_t kChunk = 64;
    std::vector<CMatrix> in, lab;
    for (std::size_t c = first; c < last; c += kChunk) {
        const std::size_t n = std::min(kChunk, last - c);
        training_samples(sim, c, n, in, lab);
        PatchSpec spec;
        spec.p_x = cfg.patch_w;
        spec.p_y = cfg.patch_h;
        spec.total_patches = n * static_cast<std::size_t>(cfg.patches_per_sample);
        spec.seed = seed;
        spec.first_sample = c;
        PatchDataset part = extract_patches(in, lab, spec);
        ds.count += part.count;
        ds.data.insert(ds.data.end(), part.data.begin(), part.data.end());
        ds.labels.insert(ds.labels.end(), part.labels.begin(), part.labels.end());
        ds.origins.insert(ds.origins.end(), part.origins.begin(), part.origins.end());
    }
    return ds;
}

std::string grid_text(const std::vector<double>& g) {
    std::string s;
    for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + fmt(g[i]);
    return s;
}

// Full-resolution test set at one SNR, in the same container format.
PatchDataset test_set(const Simulator& sim, double snr_db) {
    const ExperimentConfig& cfg = sim.config();
    const auto n = static_cast<std::size_t>(cfg.test_samples);
    std::vector<CMatrix> in(n), lab(n);
    parallel_for(n, worker_count(cfg), [&](std::size_t i, int) {
        PilotSample s = sim.sample(Split::test, snr_db, i);
        in[i] = std::move(*s.g_ls);
        lab[i] = std::move(s.realization.G);
    });
    PatchDataset ds;
    ds.p_y = sim.antennas();
    ds.p_x = sim.elements();
    for (std::size_t i = 0; i < n; ++i) ds.append(in[i], lab[i], {i, 0, 0});
    return ds;
}

} // namespace

std::size_t train_sample_count(const ExperimentConfig& cfg) {
    const auto n = static_cast<std::size_t>(cfg.train_samples);
    const auto t = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.train_fraction));
    return std::clamp<std::size_t>(t, 1, n - 1);
}

CommandOutput cmd_generate(const ExperimentConfig& cfg, std::ostream& log) {
    const Simulator sim(cfg);
    if (!sim.ls_available())
        throw ConfigError("generate needs pilot_l >= N (" + std::to_string(cfg.pilot_l) + " < " +
                          std::to_string(cfg.elements()) + "): the net is trained on LS inputs");
    if (cfg.patch_h > cfg.antennas() || cfg.patch_w > cfg.elements())
        throw ConfigError("patch " + std::to_string(cfg.patch_h) + "x" + std::to_string(cfg.patch_w) +
                          " exceeds the channel size " + std::to_string(cfg.antennas()) + "x" +
                          std::to_string(cfg.elements()));
    CommandOutput out;
    ensure_dir(cfg.out_dir);
    const auto t0 = Clock::now();
    const std::size_t n = static_cast<std::size_t>(cfg.train_samples);
    const std::size_t n_tr = train_sample_count(cfg);
    const std::uint64_t pseed = derive_seed(cfg.seed, 0, Stream::patches);

    auto meta = config_meta(cfg);
    meta["snr_grid"] = grid_text(cfg.snr_grid);
    meta["snr_assignment"] = "round_robin";
    meta["patch_seed"] = std::to_string(pseed);
    meta["channel_seed"] = std::to_string(split_seed(cfg.seed, Split::train));

    PatchDataset tr = patch_range(sim, 0, n_tr, pseed);
    tr.meta = meta;
    tr.meta["role"] = "train";
    tr.meta["samples"] = "0-" + std::to_string(n_tr);
    serialize_dataset(tr, train_container(cfg));
    out.files.push_back(train_container(cfg));
    log << "train: " << n_tr << " samples, " << tr.count << " patches of " << cfg.patch_h << "x" << cfg.patch_w
        << '\n';

    PatchDataset va = patch_range(sim, n_tr, n, pseed);
    va.meta = meta;
    va.meta["role"] = "validation";
    va.meta["samples"] = std::to_string(n_tr) + "-" + std::to_string(n);
    serialize_dataset(va, val_container(cfg));
    out.files.push_back(val_container(cfg));
    log << "validation: " << n - n_tr << " samples, " << va.count << " patches\n";

    for (double snr : cfg.snr_grid) {
        PatchDataset te = test_set(sim, snr);
        te.meta = meta;
        te.meta["role"] = "test";
        te.meta["snr_db"] = fmt(snr);
        te.meta["channel_seed"] = std::to_string(split_seed(cfg.seed, Split::test));
        serialize_dataset(te, test_container(cfg, snr));
        out.files.push_back(test_container(cfg, snr));
    }
    log << "test: " << cfg.test_samples << " full-size samples at each of " << cfg.snr_grid.size() << " SNRs\n";
    out.timing.push_back({"generate", "all", seconds_since(t0), n});
    return out;
}

// ---- train ----

CommandOutput cmd_train(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    CommandOutput out;
    const PatchDataset tr = deserialize_dataset(train_container(cfg));
    const PatchDataset va = deserialize_dataset(val_container(cfg));
    const nn::NetConfig nc = cfg.net_config();
    if (tr.p_y != nc.patch_h || tr.p_x != nc.patch_w)
        throw ConfigError("training patches are " + std::to_string(tr.p_y) + "x" + std::to_string(tr.p_x) +
                          " but the config asks for " + std::to_string(nc.patch_h) + "x" +
                          std::to_string(nc.patch_w) + "; regenerate or fix patch_h/patch_w");
    const nn::TrainConfig tc = cfg.train_config();
    const fs::path ckpath = cfg.checkpoint_path();

    nn::Checkpoint ck;
    ck.net_config = nc;
    ck.train_config = tc;
    ck.meta = config_meta(cfg);
    if (cfg.resume && fs::exists(ckpath)) {
        nn::Checkpoint prev = nn::load_checkpoint(ckpath);
        if (!(prev.net_config == nc))
            throw ConfigError("checkpoint " + ckpath.string() + " has a different architecture");
        if (!prev.has_optimizer) throw ConfigError("checkpoint " + ckpath.string() + " has no optimizer state");
        ck.net = std::move(prev.net);
        ck.state = std::move(prev.state);
        log << "resuming from epoch " << ck.state.epochs_done << '\n';
    } else {
        ck.net = nn::DenoiserNet<float>(nc);
        ck.net.init(tc.seed, cfg.identity_init);
    }
    ensure_dir(ckpath.parent_path().empty() ? fs::path(".") : ckpath.parent_path());

    const auto t0 = Clock::now();
    auto on_epoch = [&](const nn::DenoiserNet<float>& net, const nn::TrainState<float>& st) {
        const auto& h = st.history.back();
        char buf[160];
        std::snprintf(buf, sizeof buf, "epoch %3d  lr %.3e  train %.5e  val %.5e  (%.1f s)\n", h.epoch + 1, h.lr,
                      h.train_loss, h.val_loss, seconds_since(t0));
        log << buf << std::flush;
        nn::Checkpoint snap;
        snap.net_config = nc;
        snap.train_config = tc;
        snap.state = st;
        snap.meta = ck.meta;
        snap.net = net;
        nn::save_checkpoint(snap, ckpath);
    };
    nn::train(ck.net, tr, tc, ck.state, nn::EpochCallback<float>(on_epoch), &va);
    if (ck.state.epochs_done == 0 || tc.epochs == 0) nn::save_checkpoint(ck, ckpath);

    out.files.push_back(ckpath);
    out.files.push_back(write_text(fs::path(cfg.out_dir) / "loss.csv", nn::loss_csv(ck.state.history)));
    out.timing.push_back({"train", "all", seconds_since(t0), tr.count});

    // validation NMSE of the patches, as a ratio of summed energies
    double err = 0.0, ref = 0.0;
    for (std::size_t b = 0; b < va.count; b += 256) {
        const std::size_t cnt = std::min<std::size_t>(256, va.count - b);
        std::vector<std::size_t> order(va.count);
        std::iota(order.begin(), order.end(), std::size_t{0});
        const auto x = nn::gather_batch<float>(va.data, va, order, b, cnt);
        const auto t = nn::gather_batch<float>(va.labels, va, order, b, cnt);
        const auto y = ck.net.forward(x, false);
        for (std::size_t i = 0; i < y.data.size(); ++i) {
            const double d = static_cast<double>(y.data[i]) - t.data[i];
            err += d * d;
            ref += static_cast<double>(t.data[i]) * t.data[i];
        }
    }
    log << "validation NMSE " << fmt(to_db(ref > 0 ? err / ref : 0.0)) << " dB over " << va.count << " patches\n";
    return out;
}

// ---- evaluation core ----

namespace {

enum Method { kLs, kLmmse, kLmmseAlt, kBlmmse, kNetFull, kNetTiled, kMethods };
const char* const kMethodNames[kMethods] = {"ls", "lmmse", "lmmse_alt", "blmmse", "net_full", "net_tiled"};

struct PointResult {
    std::array<double, kMethods> nmse{};
    std::array<double, kMethods> seconds{};
    std::array<bool, kMethods> available{};
    std::size_t n = 0;
};

struct PointSpec {
    Split split = Split::test;
    double snr_db = 0.0;
    std::size_t samples = 0;
    const PatchDataset* reference = nullptr;  ///< stored test set to verify against
    std::vector<nn::DenoiserNet<float>>* nets = nullptr;  ///< one per worker
    nn::InferOptions tiled{};
};

PointResult evaluate_point(const Simulator& sim, const PointSpec& ps) {
    const ExperimentConfig& cfg = sim.config();
    const PilotConfig pc = cfg.pilot_config(ps.snr_db);
    const double var = pc.noise_variance();
    const CMatrix& r_g = sim.cascade_covariance();
    const LmmseOptions main = cfg.lmmse_options();
    const LmmseOptions alt{!main.m_factor};
    const CMatrix f_main = lmmse_filter(sim.schedule(), r_g, sim.antennas(), var, main);
    const CMatrix f_alt = lmmse_filter(sim.schedule(), r_g, sim.antennas(), var, alt);
    const CMatrix f_bin = lmmse_filter(sim.binary(), r_g, sim.antennas(), var, main);
    const bool ls = sim.ls_available();
    const bool net = ls && ps.nets != nullptr;

    const std::size_t n = ps.samples;
    std::vector<std::array<double, kMethods>> per(n), secs(n);
    const int workers = ps.nets ? static_cast<int>(ps.nets->size()) : worker_count(cfg);
    parallel_for(n, workers, [&](std::size_t i, int w) {
        const PilotSample s = sim.sample(ps.split, ps.snr_db, i);
        const CMatrix& g = s.realization.G;
        auto& r = per[i];
        auto& t = secs[i];
        t.fill(0.0);
        r.fill(std::numeric_limits<double>::quiet_NaN());
        if (ps.reference) {
            PatchDataset one;
            one.p_y = ps.reference->p_y;
            one.p_x = ps.reference->p_x;
            one.append(*s.g_ls, g, {i, 0, 0});
            if (std::memcmp(one.data.data(), ps.reference->input(i).data(), one.data.size() * sizeof(float)) != 0 ||
                std::memcmp(one.labels.data(), ps.reference->label(i).data(), one.labels.size() * sizeof(float)) !=
                    0)
                throw IntegrityError("test sample " + std::to_string(i) + " at " + fmt(ps.snr_db) +
                                     " dB does not match the regenerated data; the container was written with "
                                     "a different config or has been modified");
        }
        if (ls) r[kLs] = nmse(*s.g_ls, g);
        r[kLmmse] = nmse(s.rx.Y * f_main, g);
        r[kLmmseAlt] = nmse(s.rx.Y * f_alt, g);
        r[kBlmmse] = nmse(sim.binary_observation(s, ps.split, i).Y * f_bin, g);
        if (net) {
            auto& model = (*ps.nets)[static_cast<std::size_t>(w)];
            auto timed = [&](int m, const nn::InferOptions& opt) {
                const auto t0 = Clock::now();
                r[m] = nmse(nn::infer(model, *s.g_ls, opt), g);
                t[m] = seconds_since(t0);
            };
            // alternate the order so neither mode always runs on warm caches
            if (i % 2 == 0) {
                timed(kNetFull, {nn::InferMode::full, 0, 0});
                timed(kNetTiled, ps.tiled);
            } else {
                timed(kNetTiled, ps.tiled);
                timed(kNetFull, {nn::InferMode::full, 0, 0});
            }
        }
    });
    PointResult res;
    res.n = n;
    res.available = {ls, true, true, true, net, net};
    for (int m = 0; m < kMethods; ++m) {
        double sum = 0.0, ts = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += per[i][m];
            ts += secs[i][m];
        }
        res.nmse[m] = res.available[m] && n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
        res.seconds[m] = ts;
    }
    return res;
}

void emit(const PointResult& r, const std::string& axis, std::uint64_t seed, CommandOutput& out) {
    for (int m = 0; m < kMethods; ++m) {
        out.rows.push_back({axis, kMethodNames[m], r.nmse[m], r.available[m] ? r.n : 0, seed});
        if (m >= kNetFull && r.available[m]) out.timing.push_back({axis, kMethodNames[m], r.seconds[m], r.n});
    }
}

std::string point_line(const std::string& axis, const PointResult& r) {
    std::string s = axis;
    char buf[48];
    for (int m = 0; m < kMethods; ++m) {
        if (r.available[m])
            std::snprintf(buf, sizeof buf, "  %s %.2f", kMethodNames[m], to_db(r.nmse[m]));
        else
            std::snprintf(buf, sizeof buf, "  %s n/a", kMethodNames[m]);
        s += buf;
    }
    return s + " dB\n";
}

std::vector<nn::DenoiserNet<float>> worker_nets(const nn::DenoiserNet<float>& net, int workers) {
    return std::vector<nn::DenoiserNet<float>>(static_cast<std::size_t>(std::max(1, workers)), net);
}

nn::InferOptions tiled_options(const ExperimentConfig& cfg) {
    return {nn::InferMode::tiled, cfg.tile_h, cfg.tile_w};
}

void write_outputs(const ExperimentConfig& cfg, const std::string& stem, CommandOutput& out) {
    out.files.push_back(write_text(fs::path(cfg.out_dir) / (stem + ".csv"), results_csv(out.rows)));
    out.files.push_back(write_text(fs::path(cfg.out_dir) / (stem + "_timing.csv"), timing_csv(out.timing)));
}

} // namespace

CommandOutput cmd_eval(const ExperimentConfig& cfg, std::ostream& log) {
    const Simulator sim(cfg);
    CommandOutput out;
    auto nets = worker_nets(load_net(cfg, log), worker_count(cfg));
    for (double snr : cfg.snr_grid) {
        const PatchDataset ref = deserialize_dataset(test_container(cfg, snr));
        if (ref.count != static_cast<std::size_t>(cfg.test_samples) || ref.p_y != cfg.antennas() ||
            ref.p_x != cfg.elements())
            throw IntegrityError(test_container(cfg, snr).string() + " holds " + std::to_string(ref.count) + " " +
                                 std::to_string(ref.p_y) + "x" + std::to_string(ref.p_x) +
                                 " samples, the config expects " + std::to_string(cfg.test_samples) + " " +
                                 std::to_string(cfg.antennas()) + "x" + std::to_string(cfg.elements()));
        PointSpec ps;
        ps.snr_db = snr;
        ps.samples = ref.count;
        ps.reference = &ref;
        ps.nets = &nets;
        ps.tiled = tiled_options(cfg);
        const PointResult r = evaluate_point(sim, ps);
        emit(r, fmt(snr), cfg.seed, out);
        log << point_line("snr " + fmt(snr), r) << std::flush;
    }
    out.files.push_back(write_text(fs::path(cfg.out_dir) / "results.csv", results_csv(out.rows)));
    out.files.push_back(write_text(fs::path(cfg.out_dir) / "timing.csv", timing_csv(out.timing)));
    return out;
}

// ---- sweep ----

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::pair<int, int> parse_dims(const std::string& v, const std::string& axis) {
    const auto x = v.find('x');
    if (x == std::string::npos) throw ConfigError(axis + " values are HxV grids such as 8x8, got '" + v + "'");
    ExperimentConfig tmp;
    int a = 0, b = 0;
    set_config_value(tmp, "bs_h", v.substr(0, x));
    set_config_value(tmp, "bs_v", v.substr(x + 1));
    a = tmp.bs_h;
    b = tmp.bs_v;
    return {a, b};
}

std::string default_values(const std::string& axis) {
    if (axis == "snr") return "";
    if (axis == "pilot_L") return "8,16,32";
    if (axis == "antennas_M") return "8x8,16x16";
    if (axis == "elements_N") return "4x4,8x4";
    if (axis == "correlation") return "1,0";
    throw ConfigError("unknown sweep axis '" + axis + "' (snr, pilot_L, antennas_M, elements_N, correlation)");
}

} // namespace

CommandOutput cmd_sweep(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    const std::string& axis = cfg.sweep_axis;
    const std::string values = cfg.sweep_values.empty() ? default_values(axis) : cfg.sweep_values;
    std::optional<nn::DenoiserNet<float>> net;
    if (fs::exists(cfg.checkpoint_path()))
        net = load_net(cfg, log);
    else
        log << "no checkpoint at " << cfg.checkpoint_path() << "; net rows are reported as unavailable\n";

    CommandOutput out;
    auto run = [&](const ExperimentConfig& c, const std::string& label, double snr) {
        const Simulator sim(c);
        std::vector<nn::DenoiserNet<float>> nets;
        PointSpec ps;
        ps.snr_db = snr;
        ps.samples = static_cast<std::size_t>(c.test_samples);
        ps.tiled = tiled_options(c);
        const int d = net ? net->config().divisor() : 1;
        if (net && c.antennas() % d == 0 && c.elements() % d == 0 && c.antennas() % c.tile_h == 0 &&
            c.elements() % c.tile_w == 0) {
            nets = worker_nets(*net, worker_count(c));
            ps.nets = &nets;
        } else if (net) {
            log << label << ": channel size does not fit the net or tile; net rows unavailable\n";
        }
        const PointResult r = evaluate_point(sim, ps);
        emit(r, label, c.seed, out);
        log << point_line(axis + " " + label, r) << std::flush;
    };

    if (axis == "snr") {
        const auto grid = values.empty() ? cfg.snr_grid : parse_double_list(values);
        for (double s : grid) run(cfg, fmt(s), s);
    } else {
        for (const std::string& v : split_list(values)) {
            ExperimentConfig c = cfg;
            if (axis == "pilot_L") {
                set_config_value(c, "pilot_l", v);
            } else if (axis == "antennas_M") {
                std::tie(c.bs_h, c.bs_v) = parse_dims(v, axis);
            } else if (axis == "elements_N") {
                std::tie(c.ris_h, c.ris_v) = parse_dims(v, axis);
            } else if (axis == "correlation") {
                set_config_value(c, "correlated", v);
                c.eta_r = c.eta_b = cfg.sweep_nlos_eta;
            } else {
                default_values(axis);
            }
            c.validate();
            run(c, v, cfg.sweep_snr_db);
        }
    }
    write_outputs(cfg, "sweep_" + axis, out);
    return out;
}

// ---- direct link ----

CommandOutput cmd_direct(const ExperimentConfig& cfg, std::ostream& log) {
    const Simulator sim(cfg);
    const int rows = cfg.bs_v, cols = cfg.bs_h;
    const int subframes = cfg.effective_direct_subframes();
    const auto& grid = cfg.snr_grid;

    // b and its phase-1 estimate for one sample, both as BS-grid matrices
    auto draw = [&](Split split, double snr, std::uint64_t i) {
        Rng rc(derive_seed(split_seed(cfg.seed, split), i, Stream::channel));
        const CVector b = sim.model(split).sample_direct(rc);
        Rng rn(noise_seed(cfg.seed, split, snr, i, Stream::direct_noise));
        const CVector b_hat = estimate_direct(b, subframes, noise_variance_for(snr), rn);
        return std::pair{reshape_direct(b_hat, cfg.bs_h, cfg.bs_v), reshape_direct(b, cfg.bs_h, cfg.bs_v)};
    };

    nn::NetConfig nc = cfg.net_config();
    nc.patch_h = rows;
    nc.patch_w = cols;
    if (rows % nc.divisor() != 0 || cols % nc.divisor() != 0)
        throw ConfigError("BS grid " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " is not divisible by 2^(levels-1)");

    const std::size_t n = static_cast<std::size_t>(cfg.train_samples);
    const std::size_t n_tr = train_sample_count(cfg);
    std::vector<std::pair<CMatrix, CMatrix>> samples(n);
    parallel_for(n, worker_count(cfg),
                 [&](std::size_t i, int) { samples[i] = draw(Split::direct_train, grid[i % grid.size()], i); });
    PatchDataset tr, va;
    tr.p_y = va.p_y = rows;
    tr.p_x = va.p_x = cols;
    for (std::size_t i = 0; i < n; ++i) (i < n_tr ? tr : va).append(samples[i].first, samples[i].second, {i, 0, 0});
    samples.clear();

    nn::DenoiserNet<float> net(nc);
    nn::TrainConfig tc = cfg.train_config();
    tc.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(Split::direct_train), Stream::init);
    net.init(tc.seed, cfg.identity_init);
    nn::TrainState<float> st;
    const auto t0 = Clock::now();
    nn::train(net, tr, tc, st, {}, &va);
    log << "direct-link net trained on " << tr.count << " " << rows << "x" << cols << " grids in "
        << fmt(std::round(seconds_since(t0) * 10) / 10) << " s\n";

    CommandOutput out;
    const auto nt = static_cast<std::size_t>(cfg.test_samples);
    auto nets = worker_nets(net, worker_count(cfg));
    for (double snr : grid) {
        std::vector<double> e_ls(nt), e_net(nt);
        parallel_for(nt, static_cast<int>(nets.size()), [&](std::size_t i, int w) {
            const auto [x, y] = draw(Split::direct_test, snr, i);
            e_ls[i] = nmse(x, y);
            e_net[i] = nmse(nn::infer(nets[static_cast<std::size_t>(w)], x), y);
        });
        double a = 0, b = 0;
        for (std::size_t i = 0; i < nt; ++i) {
            a += e_ls[i];
            b += e_net[i];
        }
        a /= static_cast<double>(nt);
        b /= static_cast<double>(nt);
        out.rows.push_back({fmt(snr), "ls", a, nt, cfg.seed});
        out.rows.push_back({fmt(snr), "net", b, nt, cfg.seed});
        char buf[96];
        std::snprintf(buf, sizeof buf, "snr %s  ls %.2f  net %.2f dB\n", fmt(snr).c_str(), to_db(a), to_db(b));
        log << buf << std::flush;
    }
    out.files.push_back(write_text(fs::path(cfg.out_dir) / "direct_results.csv", results_csv(out.rows)));
    out.files.push_back(write_text(fs::path(cfg.out_dir) / "direct_loss.csv", nn::loss_csv(st.history)));
    return out;
}

// ---- complexity ----

CommandOutput cmd_complexity(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    const int h0 = cfg.antennas(), w0 = cfg.elements();
    nn::NetConfig nc = cfg.net_config();
    const nn::DenoiserNet<float> net(nc);
    const CostBreakdown exact = exact_layer_cost(net, h0, w0);
    const CostBreakdown model = closed_form_cost(h0, w0, cfg.base_filters, cfg.kernel, cfg.levels);

    std::ostringstream hdr;
    hdr << "input " << h0 << "x" << w0 << ", C0 " << cfg.base_filters << ", K " << cfg.kernel << ", L "
        << cfg.levels << ", " << net.parameter_count() << " parameters\n";
    log << hdr.str() << "\nper-layer count\n" << cost_table(exact) << "\nclosed form\n" << cost_table(model);
    char buf[96];
    std::snprintf(buf, sizeof buf, "\nexact / closed form = %.4f\n",
                  static_cast<double>(exact.total) / static_cast<double>(model.total));
    log << buf;

    std::string csv = cost_csv(exact);
    csv += "closed_encoder,,total,,,,,," + std::to_string(model.encoder_cost) + '\n';
    csv += "closed_bottleneck,,total,,,,,," + std::to_string(model.bottleneck_cost) + '\n';
    csv += "closed_decoder,,total,,,,,," + std::to_string(model.decoder_cost) + '\n';
    csv += "closed_all,,total,,,,,," + std::to_string(model.total) + '\n';
    CommandOutput out;
    out.files.push_back(write_text(fs::path(cfg.out_dir) / "complexity.csv", csv));
    return out;
}

// ---- selftest ----

std::vector<SelftestItem> run_selftest(const ExperimentConfig& cfg) {
    std::vector<SelftestItem> items;
    auto item = [&](const std::string& name, auto&& fn) {
        SelftestItem it;
        it.name = name;
        try {
            std::tie(it.pass, it.detail) = fn();
        } catch (const std::exception& e) {
            it.pass = false;
            it.detail = std::string("threw: ") + e.what();
        }
        items.push_back(std::move(it));
    };
    char buf[128];

    item("dft_orthogonality", [&] {
        double worst = 0.0;
        for (auto [n, l] : {std::pair{4, 4}, {16, 16}, {16, 32}, {cfg.elements(), std::max(cfg.pilot_l, cfg.elements())}}) {
            const CMatrix s = dft_schedule(n, l).S;
            worst = std::max(worst, (s * s.adjoint() - static_cast<double>(l) * CMatrix::Identity(n, n)).norm());
        }
        std::snprintf(buf, sizeof buf, "max ||S S^H - L I||_F = %.3e", worst);
        return std::pair{worst < 1e-9, std::string(buf)};
    });

    item("noiseless_ls_recovery", [&] {
        ExperimentConfig c = cfg;
        c.pilot_l = std::max(c.pilot_l, c.elements());
        c.ideal_direct_cancellation = true;
        const Simulator sim(c);
        double worst = 0.0;
        for (std::uint64_t i = 0; i < 10; ++i) {
            const PilotSample s = sim.sample(Split::test, std::numeric_limits<double>::infinity(), i);
            worst = std::max(worst, nmse(*s.g_ls, s.realization.G));
        }
        std::snprintf(buf, sizeof buf, "worst NMSE %.3e", worst);
        return std::pair{worst < 1e-20, std::string(buf)};
    });

    item("gradient_check_conv", [&] {
        nn::Conv2d<double> conv("conv", 3, 4, 3);
        Rng rng(derive_seed(cfg.seed, 0, Stream::probe));
        conv.init_kaiming(rng);
        nn::Tensor4<double> x(2, 3, 6, 5);
        for (auto& v : x.data) v = rng.uniform(-1, 1);
        const auto r = nn::gradient_check(conv, x, 60, cfg.seed);
        std::snprintf(buf, sizeof buf, "max rel error %.3e over %d probes", r.max_rel_error, r.probes);
        return std::pair{r.max_rel_error < 1e-6, std::string(buf)};
    });

    item("gradient_check_net", [&] {
        nn::NetConfig nc;
        nc.levels = 2;
        nc.base_filters = 4;
        nn::DenoiserNet<double> net(nc);
        net.init(cfg.seed);
        nn::randomize_parameters(net, cfg.seed);
        Rng rng(derive_seed(cfg.seed, 1, Stream::probe));
        nn::Tensor4<double> x(2, 2, 8, 8);
        for (auto& v : x.data) v = rng.uniform(-1, 1);
        const auto r = nn::gradient_check(net, x, 100, cfg.seed);
        std::snprintf(buf, sizeof buf, "max rel error %.3e over %d probes (%d skipped)", r.max_rel_error, r.probes,
                      r.skipped);
        return std::pair{r.max_rel_error < 1e-4 && r.probes > 0, std::string(buf)};
    });

    item("complexity_closed_form", [&] {
        const auto c = closed_form_cost(1024, 128, 32, 3, 3);
        std::snprintf(buf, sizeof buf, "encoder cost %llu", static_cast<unsigned long long>(c.encoder_cost));
        return std::pair{c.encoder_cost == 3623878656ULL, std::string(buf)};
    });
    return items;
}

} // namespace riscest
