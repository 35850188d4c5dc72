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
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "riscest/pipeline.hpp"

using namespace riscest;

namespace {

std::string read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Profile named in a config text, if any; it selects the defaults the rest
// of the file is applied on top of.
std::string profile_in(const std::string& text) {
    ExperimentConfig probe;
    std::istringstream in(text);
    std::string line, found;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        auto strip = [](std::string& s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
        };
        strip(key);
        strip(value);
        if (key == "profile") found = value;
    }
    return found;
}

int run(int argc, char** argv) {
    CLI::App app{"RIS cascaded-channel simulation, estimation and denoising"};
    app.require_subcommand(1);
    std::string config_path, out_dir, profile;
    std::uint64_t seed = 0;
    bool deterministic = false;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "key=value config file");
    auto* seed_opt = app.add_option("--seed", seed, "master seed");
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option("--profile", profile, "default set: desk or paper")->check(CLI::IsMember({"desk", "paper"}));
    app.add_flag("--deterministic", deterministic, "single-threaded, bit-reproducible run");
    app.add_option("--set", overrides, "key=value override (repeatable)");

    const char* commands[][2] = {{"generate", "simulate channels and write train/validation/test containers"},
                                 {"train", "train the denoiser on the generated patches"},
                                 {"eval", "per-SNR NMSE of all estimators on the test containers"},
                                 {"sweep", "NMSE along one axis: snr, pilot_L, antennas_M, elements_N, correlation"},
                                 {"direct", "train and evaluate the denoiser on the direct link"},
                                 {"complexity", "closed-form and per-layer multiply-accumulate counts"},
                                 {"selftest", "quick internal consistency checks"}};
    for (auto& c : commands) app.add_subcommand(c[0], c[1])->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    const std::string file_text = config_path.empty() ? std::string() : read_config_file(config_path);
    const auto env = environment_snapshot();
    std::string prof = "desk";
    if (!profile.empty())
        prof = profile;
    else if (auto it = env.find("RISCEST_PROFILE"); it != env.end())
        prof = it->second;
    else if (auto p = profile_in(file_text); !p.empty())
        prof = p;

    ExperimentConfig cfg = profile_defaults(prof);
    apply_config_text(cfg, file_text);
    apply_env_overrides(cfg, env);
    cfg.profile = prof;
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (*seed_opt) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (deterministic) cfg.deterministic = true;
    cfg.validate();

    if (command == "selftest") {
        const auto items = run_selftest(cfg);
        bool ok = true;
        for (const auto& it : items) {
            std::printf("%-24s %s  %s\n", it.name.c_str(), it.pass ? "PASS" : "FAIL", it.detail.c_str());
            ok = ok && it.pass;
        }
        return ok ? 0 : 1;
    }

    write_config_echo(cfg, command);
    CommandOutput out;
    if (command == "generate")
        out = cmd_generate(cfg, std::cout);
    else if (command == "train")
        out = cmd_train(cfg, std::cout);
    else if (command == "eval")
        out = cmd_eval(cfg, std::cout);
    else if (command == "sweep")
        out = cmd_sweep(cfg, std::cout);
    else if (command == "direct")
        out = cmd_direct(cfg, std::cout);
    else if (command == "complexity")
        out = cmd_complexity(cfg, std::cout);
    for (const auto& f : out.files) std::cout << "wrote " << f.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "integrity error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
