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

#include <span>
#include <vector>

#include "riscest/channel.hpp"
#include "riscest/common.hpp"
#include "riscest/rng.hpp"

namespace riscest {

enum class ScheduleMode { dft, binary };

/// N x L matrix of RIS reflection coefficients; column l is the
/// configuration used in pilot subframe l.
struct PhaseSchedule {
    CMatrix S;
    ScheduleMode mode = ScheduleMode::dft;

    Eigen::Index elements() const { return S.rows(); }
    Eigen::Index subframes() const { return S.cols(); }
};

/// S[n, l] = W^(n (l-1)), W = exp(j 2 pi / L), rows n = 1..N. Requires L >= N.
PhaseSchedule dft_schedule(int n, int l);

/// The same phase law without the L >= N check; for L < N the rows are not
/// orthogonal and only Bayesian estimators apply.
PhaseSchedule dft_phases(int n, int l);

/// Identity schedule: subframe l switches on element l only.
PhaseSchedule binary_schedule(int n);

struct PilotConfig {
    double power = 1.0;  ///< P
    int length = 1;      ///< u, symbols per pilot
    int users = 1;       ///< K
    double snr_db = 10.0;

    void validate() const;
    /// Post-despreading noise variance 10^(-snr/10); +inf dB gives zero.
    double noise_variance() const;
};

double noise_variance_for(double snr_db);

/// Despread observation Y_k (M x L) of one user.
struct ReceivedPilots {
    CMatrix Y;
    double sigma_v2 = 0.0;
};

/// K mutually orthogonal pilot rows of length u with x_k x_k^H = P u.
CMatrix orthogonal_pilots(int users, int length, double power);

/// Received block for one subframe before despreading: sum_k h_k x_k + N,
/// with h_k the effective M-vector of user k. Noise entries CN(0, noise_var).
CMatrix superimpose_uplink(std::span<const CVector> effective_channels, const CMatrix& pilots,
                           double noise_var, Rng& rng);

/// Correlates a received block with pilot row k and scales by 1/(P u).
CVector despread(const CMatrix& received, const CMatrix& pilots, int user, double power);

/// Y = [b 1^T] + G S + V, V ~ CN(0, sigma_v2). Despreading is folded in
/// analytically: orthogonal pilots leave each user's own observation with
/// noise variance sigma^2 / (P u), here set from the post-despread SNR.
ReceivedPilots simulate_pilots(const ChannelRealization& realization, const PhaseSchedule& sched,
                               const PilotConfig& pilots, Rng& rng, bool include_direct);

/// Phase-1 direct channel estimate from `subframes` RIS-off observations.
CVector estimate_direct(const CVector& b, int subframes, double sigma_v2, Rng& rng);

/// Removes b_hat from every subframe of a phase-2 observation.
void cancel_direct(ReceivedPilots& rx, const CVector& b_hat);

/// G_hat = Y S^H (S S^H)^-1.
CMatrix ls_estimate(const ReceivedPilots& rx, const PhaseSchedule& sched);

struct LmmseOptions {
    /// Multiply the noise regulariser by M (printed form). false gives sigma^2 I.
    bool m_factor = true;
};

/// G_hat = Y (S^H R_G S + M sigma^2 I_L)^-1 S^H R_G with R_G = E[G^H G].
CMatrix lmmse_estimate(const ReceivedPilots& rx, const PhaseSchedule& sched, const CMatrix& r_g,
                       int antennas, LmmseOptions opts = {});

/// The L x N matrix X with G_hat = Y X for the estimator above. X only
/// depends on (S, R_G, sigma^2), so it can be shared across samples.
CMatrix lmmse_filter(const PhaseSchedule& sched, const CMatrix& r_g, int antennas, double sigma_v2,
                     LmmseOptions opts = {});

/// The same estimator evaluated from an LS estimate of an orthogonal
/// schedule (S S^H = L I): Y S^H = L G_ls, so
/// G_hat = G_ls L (R_G L + c sigma^2 I_N)^-1 R_G. Exact for DFT schedules.
CMatrix lmmse_from_ls(const CMatrix& g_ls, int subframes, double sigma_v2, const CMatrix& r_g,
                      LmmseOptions opts = {});

/// Binary reflection pilots followed by LMMSE with S = I_N.
CMatrix blmmse_estimate(const ChannelRealization& realization, const PilotConfig& pilots,
                        Rng& rng, const CMatrix& r_g, LmmseOptions opts = {});

/// Sample estimate of E[G^H G] = (1/T) sum_t G_t^H G_t.
CMatrix cascade_covariance(std::span<const CMatrix> samples);

/// ||G - G_hat||_F^2 / ||G||_F^2.
double nmse(const CMatrix& g_hat, const CMatrix& g);

inline constexpr double kNmseFloorDb = -300.0;

/// 10 log10(x), floored at -300 dB.
double to_db(double linear);

/// Mean of per-sample NMSE ratios.
class NmseAccumulator {
public:
    void add(double ratio) {
        sum_ += ratio;
        ++count_;
    }
    void add(const CMatrix& g_hat, const CMatrix& g) { add(nmse(g_hat, g)); }
    double mean() const { return count_ ? sum_ / static_cast<double>(count_) : 0.0; }
    double mean_db() const { return to_db(mean()); }
    std::size_t count() const { return count_; }

private:
    double sum_ = 0.0;
    std::size_t count_ = 0;
};

} // namespace riscest
