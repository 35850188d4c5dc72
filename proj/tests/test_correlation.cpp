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
#include <doctest.h>

#include <cmath>

#include "riscest/correlation.hpp"
#include "riscest/rng.hpp"

using namespace riscest;

namespace {

// Independent reference: plain Maclaurin series in long double.
long double j0_series(long double x) {
    long double term = 1.0L, sum = 1.0L;
    const long double q = x * x / 4.0L;
    for (int k = 1; k < 60; ++k) {
        term *= -q / (static_cast<long double>(k) * k);
        sum += term;
    }
    return sum;
}

ArrayGeometry ris_geom(double spacing_wl) {
    return ArrayGeometry::with_spacing(4, 4, 0.04, spacing_wl, spacing_wl);
}

} // namespace

TEST_CASE("bessel_j0 point values") {
    CHECK(bessel_j0(0.0) == 1.0);
    CHECK(std::abs(bessel_j0(2.404825557695773)) < 1e-10);
    CHECK(std::abs(bessel_j0(1.0) - 0.7651976866) < 1e-9);
    CHECK(bessel_j0(-3.0) == bessel_j0(3.0));
    CHECK_THROWS_AS(bessel_j0(std::nan("")), ArgumentError);
}

TEST_CASE("bessel_j0 against the long series on [0, 20]") {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = 20.0 * i / 999.0;
        worst = std::max(worst, std::abs(bessel_j0(x) - static_cast<double>(j0_series(x))));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("bessel_j0 against the standard library on [0, 100]") {
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
        const double x = 100.0 * i / 2000.0;
        worst = std::max(worst, std::abs(bessel_j0(x) - std::cyl_bessel_j(0.0, x)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("ris_correlation") {
    const auto c = ris_correlation(ris_geom(0.25));
    const RMatrix& r = c.entries;
    REQUIRE(r.rows() == 16);
    for (int i = 0; i < 16; ++i) CHECK(r(i, i) == 1.0);
    CHECK(r(0, 1) == doctest::Approx(0.47200).epsilon(1e-5));
    CHECK((r - r.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<RMatrix> es(r);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("ris_correlation decays at ten wavelengths") {
    const auto g = ArrayGeometry::with_spacing(21, 1, 0.04, 0.5, 0.5);
    const auto c = ris_correlation(g);
    CHECK(std::abs(c.entries(0, 20)) < 0.2);
}

TEST_CASE("bs_correlation") {
    CorrelationConfig cfg;
    cfg.bs = ArrayGeometry::with_spacing(2, 2, 0.04, 0.5, 0.5);
    cfg.rho = 0.0;
    CHECK(bs_correlation(cfg).entries.isIdentity());

    cfg.rho = 0.8;
    CHECK(exponential_toeplitz(5, 0.8)(0, 2) == doctest::Approx(0.64));
    const RMatrix r = bs_correlation(cfg).entries;
    // brute-force expansion, element m at (alpha, gamma) = (m % 2, m / 2)
    for (int m = 0; m < 4; ++m)
        for (int k = 0; k < 4; ++k) {
            const double e = std::pow(0.8, std::abs(m % 2 - k % 2)) * std::pow(0.8, std::abs(m / 2 - k / 2));
            CHECK(r(m, k) == doctest::Approx(e).epsilon(1e-14));
        }

    cfg.rho = 1.0;
    CHECK_THROWS_AS(bs_correlation(cfg), ConfigError);
    cfg.rho = -0.1;
    CHECK_THROWS_AS(bs_correlation(cfg), ConfigError);
}

TEST_CASE("bs_correlation factors are Toeplitz on the desk array") {
    CorrelationConfig cfg;
    cfg.bs = ArrayGeometry::with_spacing(8, 8, 0.04, 0.5, 0.5);
    const RMatrix r = bs_correlation(cfg).entries;
    for (int i = 0; i < 64; ++i) CHECK(r(i, i) == 1.0);
    CHECK((r - r.transpose()).norm() == 0.0);
    // horizontal neighbours within one row and vertical neighbours
    CHECK(r(0, 1) == doctest::Approx(0.8));
    CHECK(r(0, 8) == doctest::Approx(0.8));
    CHECK(r(3, 4) == doctest::Approx(0.8));
    CHECK(r(7, 8) == doctest::Approx(std::pow(0.8, 8)));
    Eigen::SelfAdjointEigenSolver<RMatrix> es(r);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("psd_sqrt") {
    CHECK(psd_sqrt(RMatrix(RMatrix::Identity(3, 3))).isApprox(RMatrix::Identity(3, 3)));
    RMatrix d = RMatrix::Zero(2, 2);
    d(0, 0) = 4;
    d(1, 1) = 9;
    const RMatrix s = psd_sqrt(d);
    CHECK(s(0, 0) == doctest::Approx(2));
    CHECK(s(1, 1) == doctest::Approx(3));
    CHECK(std::abs(s(0, 1)) < 1e-15);

    const RMatrix r = ris_correlation(ArrayGeometry::with_spacing(4, 2, 0.04, 0.25, 0.25)).entries;
    const RMatrix q = psd_sqrt(r);
    CHECK((q * q.transpose() - r).norm() / r.norm() < 1e-8);
    CHECK((q - q.transpose()).norm() < 1e-12);

    RMatrix bad = RMatrix::Identity(2, 2);
    bad(1, 1) = -1.0;
    CHECK_THROWS_AS(psd_sqrt(bad), NotPsdError);
}

TEST_CASE("complex psd_sqrt") {
    Rng rng(3);
    const CMatrix a = rng.complex_normal_matrix(5, 5);
    const CMatrix r = a * a.adjoint();
    const CMatrix q = psd_sqrt(r);
    CHECK((q * q.adjoint() - r).norm() / r.norm() < 1e-10);
}
