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
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "riscest/config.hpp"

namespace riscest {

/// Independent data splits; each has its own channel stream.
enum class Split : std::uint64_t { train = 0, test = 1, direct_train = 3, direct_test = 4 };

/// Seed of the channel model for a split.
std::uint64_t split_seed(std::uint64_t master, Split split);

/// Noise stream of one sample: keyed by (master, split, snr, index, purpose).
std::uint64_t noise_seed(std::uint64_t master, Split split, double snr_db, std::uint64_t index, Stream purpose);

/// One simulated observation after direct-path handling.
struct PilotSample {
    ChannelRealization realization;
    CVector b_hat;
    ReceivedPilots rx;    ///< phase-2 observation with b_hat removed
    std::optional<CMatrix> g_ls;  ///< empty when L < N
    double snr_db = 0.0;
};

/// Shared, read-only simulation state for one configuration.
class Simulator {
public:
    explicit Simulator(const ExperimentConfig& cfg);

    const ExperimentConfig& config() const { return cfg_; }
    const ChannelModel& model(Split split) const;
    const PhaseSchedule& schedule() const { return sched_; }
    const PhaseSchedule& binary() const { return binary_; }
    bool ls_available() const { return cfg_.pilot_l >= cfg_.elements(); }
    int antennas() const { return cfg_.antennas(); }
    int elements() const { return cfg_.elements(); }

    PilotSample sample(Split split, double snr_db, std::uint64_t index) const;

    /// Binary-schedule observation of the same realisation, same b_hat.
    ReceivedPilots binary_observation(const PilotSample& s, Split split, std::uint64_t index) const;

    /// R_G = E[G^H G], estimated once from the first covariance_samples
    /// realisations of the training split.
    const CMatrix& cascade_covariance() const;

private:
    ExperimentConfig cfg_;
    ChannelModel train_, test_;
    PhaseSchedule sched_, binary_;
    mutable std::optional<CMatrix> r_g_;
};

struct ResultRow {
    std::string axis;
    std::string method;
    double nmse_linear = 0.0;  ///< mean of per-sample ratios; NaN when unavailable
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

struct TimingRow {
    std::string axis;
    std::string method;
    double seconds = 0.0;
    std::size_t n_samples = 0;
};

std::string results_csv(const std::vector<ResultRow>& rows);
std::string timing_csv(const std::vector<TimingRow>& rows);

struct CommandOutput {
    std::vector<ResultRow> rows;
    std::vector<TimingRow> timing;
    std::vector<std::filesystem::path> files;
};

/// Samples of the training split that go to the train container; the rest
/// form the validation container.
std::size_t train_sample_count(const ExperimentConfig& cfg);

/// File names inside out_dir.
std::filesystem::path train_container(const ExperimentConfig& cfg);
std::filesystem::path val_container(const ExperimentConfig& cfg);
std::filesystem::path test_container(const ExperimentConfig& cfg, double snr_db);

CommandOutput cmd_generate(const ExperimentConfig& cfg, std::ostream& log);
CommandOutput cmd_train(const ExperimentConfig& cfg, std::ostream& log);
CommandOutput cmd_eval(const ExperimentConfig& cfg, std::ostream& log);
CommandOutput cmd_sweep(const ExperimentConfig& cfg, std::ostream& log);
CommandOutput cmd_direct(const ExperimentConfig& cfg, std::ostream& log);
CommandOutput cmd_complexity(const ExperimentConfig& cfg, std::ostream& log);

struct SelftestItem {
    std::string name;
    bool pass = false;
    std::string detail;
};
std::vector<SelftestItem> run_selftest(const ExperimentConfig& cfg);

/// Writes the resolved config beside the outputs.
std::filesystem::path write_config_echo(const ExperimentConfig& cfg, const std::string& command);

} // namespace riscest
