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
#include "riscest/channel.hpp"

#include <cmath>

namespace riscest {

void ChannelConfig::validate() const {
    if (!(eta_r >= 0.0) || !(eta_b >= 0.0)) throw ConfigError("Rician factors must be >= 0");
    if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must lie in [0, 1)");
    ris.validate();
    bs.validate();
    if (angle_policy == AnglePolicy::fixed) {
        fixed_angles.user_ris.validate();
        fixed_angles.ris_departure.validate();
        fixed_angles.bs_arrival.validate();
    }
}

CMatrix cascade(const CVector& f, const CMatrix& H) {
    if (f.size() != H.cols())
        throw ShapeError("cascade: f has " + std::to_string(f.size()) + " entries but H has " +
                         std::to_string(H.cols()) + " columns");
    return H * f.asDiagonal();
}

ChannelModel::ChannelModel(ChannelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const int n = cfg_.ris.size();
    const int m = cfg_.bs.size();
    if (cfg_.correlated) {
        r_ris_ = ris_correlation(cfg_.ris).entries;
        r_bs_ = bs_correlation(CorrelationConfig{cfg_.rho, cfg_.bs}).entries;
        sqrt_ris_ = psd_sqrt(r_ris_);
        sqrt_bs_ = psd_sqrt(r_bs_);
    } else {
        r_ris_ = sqrt_ris_ = RMatrix::Identity(n, n);
        r_bs_ = sqrt_bs_ = RMatrix::Identity(m, m);
    }
}

LinkAngles ChannelModel::draw_angles(Rng& rng) const {
    if (cfg_.angle_policy == AnglePolicy::fixed) return cfg_.fixed_angles;
    constexpr double h = kPi / 2.0;
    LinkAngles a;
    a.user_ris = {rng.uniform(-h, h), rng.uniform(-h, h)};
    a.ris_departure = {rng.uniform(-h, h), rng.uniform(-h, h)};
    a.bs_arrival = {rng.uniform(-h, h), rng.uniform(-h, h)};
    return a;
}

CVector ChannelModel::los_user_ris(const Direction& arrival) const {
    const double scale = std::sqrt(static_cast<double>(ris_elements()));
    return scale * array_response(cfg_.ris, arrival, cfg_.response_form).conjugate();
}

CMatrix ChannelModel::los_ris_bs(const Direction& departure, const Direction& arrival) const {
    const double scale = std::sqrt(static_cast<double>(ris_elements()) * bs_antennas());
    const CVector ab = array_response(cfg_.bs, arrival, cfg_.response_form);
    const CVector ar = array_response(cfg_.ris, departure, cfg_.response_form);
    return scale * ab * ar.adjoint();
}

CVector ChannelModel::sample_user_ris(Rng& rng, const Direction& arrival) const {
    const double los_w = std::sqrt(cfg_.eta_r / (cfg_.eta_r + 1.0));
    const double nlos_w = std::sqrt(1.0 / (cfg_.eta_r + 1.0));
    const CVector innovation = rng.complex_normal_vector(ris_elements());
    return los_w * los_user_ris(arrival) + nlos_w * (sqrt_ris_.cast<cdouble>() * innovation);
}

CMatrix ChannelModel::sample_ris_bs(Rng& rng, const Direction& departure,
                                    const Direction& arrival) const {
    const double los_w = std::sqrt(cfg_.eta_b / (cfg_.eta_b + 1.0));
    const double nlos_w = std::sqrt(1.0 / (cfg_.eta_b + 1.0));
    const CMatrix innovation = rng.complex_normal_matrix(bs_antennas(), ris_elements());
    const CMatrix nlos = sqrt_bs_.cast<cdouble>() * innovation * sqrt_ris_.cast<cdouble>();
    return los_w * los_ris_bs(departure, arrival) + nlos_w * nlos;
}

CVector ChannelModel::direct_from_innovation(const CVector& innovation) const {
    if (innovation.size() != bs_antennas()) throw ShapeError("direct innovation has wrong length");
    return sqrt_bs_.cast<cdouble>() * innovation;
}

CVector ChannelModel::sample_direct(Rng& rng) const {
    return direct_from_innovation(rng.complex_normal_vector(bs_antennas()));
}

ChannelRealization ChannelModel::realize(std::uint64_t index) const {
    ChannelRealization out;
    out.sample_seed = derive_seed(cfg_.seed, index, Stream::channel);
    Rng rng(out.sample_seed);
    out.angles = draw_angles(rng);
    out.f = sample_user_ris(rng, out.angles.user_ris);
    out.H = sample_ris_bs(rng, out.angles.ris_departure, out.angles.bs_arrival);
    out.b = sample_direct(rng);
    out.G = cascade(out.f, out.H);
    return out;
}

} // namespace riscest
