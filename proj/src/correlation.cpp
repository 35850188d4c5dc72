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
#include "riscest/correlation.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace riscest {

namespace {

constexpr double kSeriesLimit = 12.0;
constexpr double kNegativeEigenLimit = -1e-6;

double j0_series(double x) {
    const long double q = static_cast<long double>(x) * x / 4.0L;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<long double>(k) * k);
        sum += term;
        if (std::fabs(term) < 1e-22L) break;
    }
    return static_cast<double>(sum);
}

double j0_asymptotic(double x) {
    // J0(x) ~ sqrt(2/(pi x)) [P cos(chi) - Q sin(chi)], chi = x - pi/4, with
    // c_k = prod_{i<=k} (2i-1)^2 / (k! 8^k); P takes the even c_k with
    // alternating sign, Q the odd ones. Summation stops at the smallest term.
    double p = 0.0;
    double q = 0.0;
    double c = 1.0;       // c_k
    double xpow = 1.0;    // x^k
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 60; ++k) {
        if (k > 0) {
            c *= (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k);
            xpow *= x;
        }
        const double mag = c / xpow;
        if (mag > prev) break;
        prev = mag;
        const int half = k / 2;
        const double sign = (half % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0)
            p += sign * mag;
        else
            q -= sign * mag;
        if (mag < 1e-18) break;
    }
    const double chi = x - kPi / 4.0;
    return std::sqrt(2.0 / (kPi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

template <typename Matrix>
Matrix sqrt_impl(const Matrix& r) {
    if (r.rows() != r.cols()) throw ShapeError("psd_sqrt needs a square matrix");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(r);
    if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
    const auto& values = eig.eigenvalues();
    if (values.size() > 0 && values.minCoeff() < kNegativeEigenLimit)
        throw NotPsdError("matrix is not positive semidefinite (min eigenvalue " +
                          std::to_string(values.minCoeff()) + ")");
    const RVector roots = values.cwiseMax(0.0).cwiseSqrt();
    const Matrix& u = eig.eigenvectors();
    return u * roots.asDiagonal() * u.adjoint();
}

} // namespace

double bessel_j0(double x) {
    if (std::isnan(x)) throw ArgumentError("bessel_j0: NaN argument");
    x = std::fabs(x);
    return x < kSeriesLimit ? j0_series(x) : j0_asymptotic(x);
}

void CorrelationConfig::validate() const {
    if (!(rho >= 0.0 && rho < 1.0))
        throw ConfigError("correlation factor rho must lie in [0, 1), got " + std::to_string(rho));
    bs.validate();
}

CorrelationMatrix ris_correlation(const ArrayGeometry& geom) {
    geom.validate();
    const int n = geom.size();
    const double k = 2.0 * kPi / geom.wavelength;
    RMatrix r(n, n);
    for (int i = 0; i < n; ++i) {
        r(i, i) = 1.0;
        const Eigen::Vector3d di = element_position(geom, i + 1);
        for (int j = i + 1; j < n; ++j) {
            const double dist = (di - element_position(geom, j + 1)).norm();
            r(i, j) = r(j, i) = bessel_j0(k * dist);
        }
    }
    return {std::move(r), ArraySide::ris};
}

RMatrix exponential_toeplitz(int size, double rho) {
    RMatrix t(size, size);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) t(i, j) = std::pow(rho, std::abs(i - j));
    return t;
}

CorrelationMatrix bs_correlation(const CorrelationConfig& cfg) {
    cfg.validate();
    const RMatrix horizontal = exponential_toeplitz(cfg.bs.n_h, cfg.rho);
    const RMatrix vertical = exponential_toeplitz(cfg.bs.n_v, cfg.rho);
    const int mh = cfg.bs.n_h;
    const int total = cfg.bs.size();
    RMatrix r(total, total);
    for (int a = 0; a < total; ++a)
        for (int b = 0; b < total; ++b)
            r(a, b) = vertical(a / mh, b / mh) * horizontal(a % mh, b % mh);
    return {std::move(r), ArraySide::bs};
}

RMatrix psd_sqrt(const RMatrix& r) { return sqrt_impl(r); }
CMatrix psd_sqrt(const CMatrix& r) { return sqrt_impl(r); }

} // namespace riscest
