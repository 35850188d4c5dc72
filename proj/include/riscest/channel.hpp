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

#include "riscest/common.hpp"
#include "riscest/correlation.hpp"
#include "riscest/geometry.hpp"
#include "riscest/rng.hpp"

namespace riscest {

enum class AnglePolicy { uniform, fixed };

/// Angles of the three line-of-sight links of one realisation.
struct LinkAngles {
    Direction user_ris;       ///< arrival of user k at the RIS
    Direction ris_departure;  ///< departure from the RIS towards the BS
    Direction bs_arrival;     ///< arrival at the BS
};

struct ChannelConfig {
    double eta_r = 10.0;  ///< Rician factor user-RIS (linear)
    double eta_b = 10.0;  ///< Rician factor RIS-BS (linear)
    double rho = 0.8;     ///< BS exponential correlation factor
    ArrayGeometry ris;
    ArrayGeometry bs;
    /// When false both NLoS correlation matrices are replaced by identities.
    bool correlated = true;
    ResponseForm response_form = ResponseForm::wave_vector;
    AnglePolicy angle_policy = AnglePolicy::uniform;
    LinkAngles fixed_angles{};
    std::uint64_t seed = 0;

    void validate() const;
};

/// One draw of the channels of a single user.
struct ChannelRealization {
    CVector f;  ///< user -> RIS, N
    CMatrix H;  ///< RIS -> BS, M x N
    CVector b;  ///< user -> BS direct, M
    CMatrix G;  ///< cascaded H diag(f), M x N
    LinkAngles angles;
    std::uint64_t sample_seed = 0;
};

/// G = H diag(f); column n of H scaled by f[n].
CMatrix cascade(const CVector& f, const CMatrix& H);

/// Channel sampler. Holds the correlation square roots, which are costly to
/// build, and hands out realisations keyed by sample index. Thread-safe for
/// concurrent const use.
class ChannelModel {
public:
    explicit ChannelModel(ChannelConfig cfg);

    const ChannelConfig& config() const { return cfg_; }
    int ris_elements() const { return cfg_.ris.size(); }
    int bs_antennas() const { return cfg_.bs.size(); }

    const RMatrix& ris_correlation_matrix() const { return r_ris_; }
    const RMatrix& bs_correlation_matrix() const { return r_bs_; }
    const RMatrix& ris_sqrt() const { return sqrt_ris_; }
    const RMatrix& bs_sqrt() const { return sqrt_bs_; }

    /// Draws the link angles according to the angle policy.
    LinkAngles draw_angles(Rng& rng) const;

    /// Unit-power LoS terms: sqrt(N) a_r^* and sqrt(M N) a_b a_r^H.
    CVector los_user_ris(const Direction& arrival) const;
    CMatrix los_ris_bs(const Direction& departure, const Direction& arrival) const;

    CVector sample_user_ris(Rng& rng, const Direction& arrival) const;
    CMatrix sample_ris_bs(Rng& rng, const Direction& departure, const Direction& arrival) const;
    CVector sample_direct(Rng& rng) const;

    /// Direct channel for a given white innovation: R_b^{1/2} b_tilde.
    CVector direct_from_innovation(const CVector& innovation) const;

    /// Full realisation for sample `index`, drawn from the stream
    /// derive_seed(seed, index, Stream::channel).
    ChannelRealization realize(std::uint64_t index) const;

private:
    ChannelConfig cfg_;
    RMatrix r_ris_;
    RMatrix r_bs_;
    RMatrix sqrt_ris_;
    RMatrix sqrt_bs_;
};

} // namespace riscest
