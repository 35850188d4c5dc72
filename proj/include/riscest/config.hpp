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
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "riscest/channel.hpp"
#include "riscest/estimators.hpp"
#include "riscest/nn/net.hpp"
#include "riscest/nn/train.hpp"
#include "riscest/patching.hpp"

namespace riscest {

/// Every experiment parameter. The text form is flat key=value, one per
/// line, '#' starts a comment. Keys are the member names below.
struct ExperimentConfig {
    std::string profile = "desk";
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int threads = 1;
    bool deterministic = false;

    // geometry
    double carrier_hz = 7.8e9;
    int bs_h = 8, bs_v = 8;
    double bs_spacing_h = 0.5, bs_spacing_v = 0.5;  ///< in wavelengths
    int ris_h = 4, ris_v = 4;
    double ris_spacing_h = 0.25, ris_spacing_v = 0.25;
    std::string response_form = "wave_vector";  ///< wave_vector | azimuth_vertical

    // channel
    double eta_r = 10.0, eta_b = 10.0;
    double rho = 0.8;
    bool correlated = true;

    // pilots and estimation
    int pilot_l = 16;
    int users = 1;
    int pilot_symbols = 1;
    double pilot_power = 1.0;
    int direct_subframes = 0;  ///< 0 means L
    bool ideal_direct_cancellation = false;
    bool lmmse_no_m_factor = false;
    int covariance_samples = 1000;
    std::vector<double> snr_grid{-5, 0, 5, 10, 15};

    // data
    int train_samples = 2000;
    double train_fraction = 0.7;
    int test_samples = 2000;
    int patch_h = 16, patch_w = 16;
    int patches_per_sample = 8;

    // net and training
    int levels = 2;
    int base_filters = 16;
    int convs_per_block = 2;
    int kernel = 3;
    bool batchnorm = true;
    bool identity_init = true;  ///< untrained net maps its input to itself
    double lr = 0.004;
    double decay = 0.95;
    int batch_size = 32;
    int epochs = 20;
    double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_eps = 1e-8;
    bool resume = false;

    // inference
    int tile_h = 16, tile_w = 16;

    // sweeps
    std::string sweep_axis = "snr";  ///< snr | pilot_L | antennas_M | elements_N | correlation
    std::string sweep_values;        ///< empty: per-axis default
    double sweep_snr_db = 10.0;      ///< fixed SNR for non-SNR axes
    double sweep_nlos_eta = 0.0;     ///< Rician factor on the correlation axis

    // files (empty: derived from out_dir)
    std::string checkpoint;

    void validate() const;

    int antennas() const { return bs_h * bs_v; }
    int elements() const { return ris_h * ris_v; }
    int effective_direct_subframes() const { return direct_subframes > 0 ? direct_subframes : pilot_l; }

    ChannelConfig channel_config(std::uint64_t channel_seed) const;
    PilotConfig pilot_config(double snr_db) const;
    nn::NetConfig net_config() const;
    nn::TrainConfig train_config() const;
    LmmseOptions lmmse_options() const { return {!lmmse_no_m_factor}; }

    std::string checkpoint_path() const;
};

/// Named defaults: "desk" (CPU-minutes scale) or "paper" (full scale).
ExperimentConfig profile_defaults(const std::string& profile);

/// Keys in canonical order.
std::vector<std::string> config_keys();

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& cfg, const std::string& key);

/// Applies a flat key=value text on top of cfg.
void apply_config_text(ExperimentConfig& cfg, const std::string& text);

/// Applies RISCEST_<KEY> environment variables (key upper-cased).
void apply_env_overrides(ExperimentConfig& cfg, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> environment_snapshot(const std::string& prefix = "RISCEST_");

/// Fully resolved config in the same key=value form.
std::string config_text(const ExperimentConfig& cfg);

std::vector<double> parse_double_list(const std::string& text);

} // namespace riscest
