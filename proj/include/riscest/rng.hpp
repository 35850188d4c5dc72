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
#include <random>

#include "riscest/common.hpp"

namespace riscest {

/// SplitMix64 finaliser; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed of the stream keyed by (master, index, purpose). Any scheduling
/// order over indices yields the same per-index streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                    std::uint64_t purpose = 0) noexcept {
    return mix64(mix64(mix64(master) ^ index) ^ (purpose * 0xd1b54a32d192ed03ULL));
}

// Stream purposes.
enum class Stream : std::uint64_t {
    channel = 1,
    pilot_noise = 2,
    direct_noise = 3,
    binary_noise = 4,
    patches = 5,
    snr_pick = 6,
    init = 7,
    shuffle = 8,
    probe = 9,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, Stream s) noexcept {
    return derive_seed(master, index, static_cast<std::uint64_t>(s));
}

/// Random stream with the draws the simulator needs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// CN(0, 1): real and imaginary parts independent N(0, 1/2).
    cdouble complex_normal() {
        const double re = normal_(engine_);
        const double im = normal_(engine_);
        return {re * kInvSqrt2, im * kInvSqrt2};
    }

    CVector complex_normal_vector(Eigen::Index n) {
        CVector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = complex_normal();
        return v;
    }

    CMatrix complex_normal_matrix(Eigen::Index rows, Eigen::Index cols) {
        CMatrix m(rows, cols);
        for (Eigen::Index c = 0; c < cols; ++c)
            for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = complex_normal();
        return m;
    }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    /// Uniform integer in [lo, hi] inclusive.
    long uniform_int(long lo, long hi) {
        return std::uniform_int_distribution<long>(lo, hi)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    static constexpr double kInvSqrt2 = 0.70710678118654752440;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace riscest
