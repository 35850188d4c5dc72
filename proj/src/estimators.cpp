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
#include "riscest/estimators.hpp"

#include <cmath>
#include <limits>

namespace riscest {

namespace {

void require_hermitian(const CMatrix& r, Eigen::Index n, const char* what) {
    if (r.rows() != n || r.cols() != n)
        throw ArgumentError(std::string(what) + ": R_G must be " + std::to_string(n) + "x" +
                            std::to_string(n));
    const double scale = std::max(1.0, r.norm());
    if ((r - r.adjoint()).norm() > 1e-9 * scale)
        throw ArgumentError(std::string(what) + ": R_G is not Hermitian");
}

} // namespace

PhaseSchedule dft_schedule(int n, int l) {
    if (n < 1) throw ArgumentError("schedule needs at least one element");
    if (l < n)
        throw ArgumentError("DFT schedule needs L >= N (L=" + std::to_string(l) +
                            ", N=" + std::to_string(n) + "); LS would be underdetermined");
    return dft_phases(n, l);
}

PhaseSchedule dft_phases(int n, int l) {
    if (n < 1 || l < 1) throw ArgumentError("schedule needs N >= 1 and L >= 1");
    PhaseSchedule sched;
    sched.mode = ScheduleMode::dft;
    sched.S.resize(n, l);
    for (int row = 1; row <= n; ++row) {
        for (int col = 0; col < l; ++col) {
            // Reduce the exponent modulo L before forming the angle.
            const long k = (static_cast<long>(row) * col) % l;
            sched.S(row - 1, col) = std::polar(1.0, 2.0 * kPi * static_cast<double>(k) / l);
        }
    }
    return sched;
}

PhaseSchedule binary_schedule(int n) {
    if (n < 1) throw ArgumentError("schedule needs at least one element");
    return {CMatrix::Identity(n, n), ScheduleMode::binary};
}

void PilotConfig::validate() const {
    if (users < 1) throw ConfigError("need at least one user");
    if (length < users) throw ConfigError("pilot length u must be >= K");
    if (!(power > 0.0)) throw ConfigError("pilot power must be positive");
}

double noise_variance_for(double snr_db) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    return std::pow(10.0, -snr_db / 10.0);
}

double PilotConfig::noise_variance() const { return noise_variance_for(snr_db); }

CMatrix orthogonal_pilots(int users, int length, double power) {
    if (users < 1 || length < users) throw ArgumentError("orthogonal pilots need 1 <= K <= u");
    CMatrix x(users, length);
    const double amp = std::sqrt(power);
    for (int k = 0; k < users; ++k)
        for (int t = 0; t < length; ++t) {
            const long e = (static_cast<long>(k) * t) % length;
            x(k, t) = std::polar(amp, 2.0 * kPi * static_cast<double>(e) / length);
        }
    return x;
}

CMatrix superimpose_uplink(std::span<const CVector> effective_channels, const CMatrix& pilots,
                           double noise_var, Rng& rng) {
    if (effective_channels.empty()) throw ArgumentError("no users");
    if (static_cast<Eigen::Index>(effective_channels.size()) != pilots.rows())
        throw ShapeError("one pilot row per user required");
    const Eigen::Index m = effective_channels.front().size();
    CMatrix rx = CMatrix::Zero(m, pilots.cols());
    for (std::size_t k = 0; k < effective_channels.size(); ++k) {
        if (effective_channels[k].size() != m) throw ShapeError("users disagree on antenna count");
        rx += effective_channels[k] * pilots.row(static_cast<Eigen::Index>(k));
    }
    if (noise_var > 0.0) rx += std::sqrt(noise_var) * rng.complex_normal_matrix(m, pilots.cols());
    return rx;
}

CVector despread(const CMatrix& received, const CMatrix& pilots, int user, double power) {
    if (user < 0 || user >= pilots.rows()) throw std::out_of_range("user index");
    if (received.cols() != pilots.cols()) throw ShapeError("pilot length mismatch");
    const double pu = power * static_cast<double>(pilots.cols());
    return received * pilots.row(user).adjoint() / pu;
}

ReceivedPilots simulate_pilots(const ChannelRealization& realization, const PhaseSchedule& sched,
                               const PilotConfig& pilots, Rng& rng, bool include_direct) {
    pilots.validate();
    if (realization.G.cols() != sched.elements())
        throw ShapeError("schedule has " + std::to_string(sched.elements()) +
                         " elements but the channel has " + std::to_string(realization.G.cols()));
    ReceivedPilots rx;
    rx.sigma_v2 = pilots.noise_variance();
    rx.Y = realization.G * sched.S;
    if (include_direct) rx.Y.colwise() += realization.b;
    if (rx.sigma_v2 > 0.0)
        rx.Y += std::sqrt(rx.sigma_v2) * rng.complex_normal_matrix(rx.Y.rows(), rx.Y.cols());
    return rx;
}

CVector estimate_direct(const CVector& b, int subframes, double sigma_v2, Rng& rng) {
    if (subframes < 1) throw ArgumentError("direct estimation needs at least one subframe");
    CVector acc = CVector::Zero(b.size());
    for (int j = 0; j < subframes; ++j) {
        acc += b;
        if (sigma_v2 > 0.0) acc += std::sqrt(sigma_v2) * rng.complex_normal_vector(b.size());
    }
    return acc / static_cast<double>(subframes);
}

void cancel_direct(ReceivedPilots& rx, const CVector& b_hat) {
    if (b_hat.size() != rx.Y.rows()) throw ShapeError("direct estimate has wrong length");
    rx.Y.colwise() -= b_hat;
}

CMatrix ls_estimate(const ReceivedPilots& rx, const PhaseSchedule& sched) {
    if (rx.Y.cols() != sched.subframes()) throw ShapeError("Y and S disagree on L");
    const CMatrix gram = sched.S * sched.S.adjoint();
    Eigen::LDLT<CMatrix> ldlt(gram);
    const RVector pivots = ldlt.vectorD().real();
    if (ldlt.info() != Eigen::Success || pivots.size() == 0 ||
        pivots.minCoeff() <= 1e-12 * pivots.cwiseAbs().maxCoeff())
        throw SingularMatrixError("S S^H is rank deficient");
    // Y S^H (S S^H)^-1 = ((S S^H)^-1 S Y^H)^H, since the Gram matrix is Hermitian.
    return ldlt.solve(sched.S * rx.Y.adjoint()).adjoint();
}

CMatrix lmmse_filter(const PhaseSchedule& sched, const CMatrix& r_g, int antennas, double sigma_v2,
                     LmmseOptions opts) {
    require_hermitian(r_g, sched.elements(), "lmmse_filter");
    const double reg = (opts.m_factor ? antennas : 1) * sigma_v2;
    const CMatrix s_h_r = sched.S.adjoint() * r_g;  // L x N
    CMatrix a = s_h_r * sched.S;
    a.diagonal().array() += reg;
    Eigen::PartialPivLU<CMatrix> lu(a);
    CMatrix x = lu.solve(s_h_r);
    if (!x.allFinite()) throw SingularMatrixError("LMMSE system is singular");
    return x;
}

CMatrix lmmse_estimate(const ReceivedPilots& rx, const PhaseSchedule& sched, const CMatrix& r_g,
                       int antennas, LmmseOptions opts) {
    if (rx.Y.cols() != sched.subframes()) throw ShapeError("Y and S disagree on L");
    return rx.Y * lmmse_filter(sched, r_g, antennas, rx.sigma_v2, opts);
}

CMatrix lmmse_from_ls(const CMatrix& g_ls, int subframes, double sigma_v2, const CMatrix& r_g,
                      LmmseOptions opts) {
    require_hermitian(r_g, g_ls.cols(), "lmmse_from_ls");
    const double reg = (opts.m_factor ? g_ls.rows() : 1) * sigma_v2;
    CMatrix a = static_cast<double>(subframes) * r_g;
    a.diagonal().array() += reg;
    const CMatrix x = Eigen::PartialPivLU<CMatrix>(a).solve(r_g);  // (L R + c I)^-1 R
    if (!x.allFinite()) throw SingularMatrixError("LMMSE system is singular");
    return static_cast<double>(subframes) * g_ls * x;
}

CMatrix blmmse_estimate(const ChannelRealization& realization, const PilotConfig& pilots,
                        Rng& rng, const CMatrix& r_g, LmmseOptions opts) {
    const PhaseSchedule sched = binary_schedule(static_cast<int>(realization.G.cols()));
    const ReceivedPilots rx = simulate_pilots(realization, sched, pilots, rng, false);
    return lmmse_estimate(rx, sched, r_g, static_cast<int>(realization.G.rows()), opts);
}

CMatrix cascade_covariance(std::span<const CMatrix> samples) {
    if (samples.empty()) throw ArgumentError("cascade_covariance needs at least one sample");
    const Eigen::Index n = samples.front().cols();
    CMatrix acc = CMatrix::Zero(n, n);
    for (const auto& g : samples) {
        if (g.cols() != n) throw ShapeError("samples disagree on N");
        acc.noalias() += g.adjoint() * g;
    }
    acc /= static_cast<double>(samples.size());
    // Exact Hermitian symmetry.
    return (acc + acc.adjoint()) / 2.0;
}

double nmse(const CMatrix& g_hat, const CMatrix& g) {
    if (g_hat.rows() != g.rows() || g_hat.cols() != g.cols()) throw ShapeError("nmse: shape mismatch");
    const double ref = g.squaredNorm();
    if (!(ref > 0.0)) throw ArgumentError("nmse: reference has zero norm");
    return (g - g_hat).squaredNorm() / ref;
}

double to_db(double linear) {
    if (std::isnan(linear)) return linear;
    if (!(linear > 0.0)) return kNmseFloorDb;
    return std::max(kNmseFloorDb, 10.0 * std::log10(linear));
}

} // namespace riscest
