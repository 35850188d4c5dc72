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
#include <set>

#include "riscest/geometry.hpp"

using namespace riscest;

namespace {
ArrayGeometry grid(int nh, int nv, double dh = 0.01, double dv = 0.01, double lambda = 0.04) {
    ArrayGeometry g;
    g.n_h = nh;
    g.n_v = nv;
    g.d_h = dh;
    g.d_v = dv;
    g.wavelength = lambda;
    return g;
}
} // namespace

TEST_CASE("element_position follows row-by-row numbering") {
    const auto g = grid(16, 4);
    CHECK(element_position(g, 1).isZero());
    const auto p17 = element_position(g, 17);
    CHECK(p17.x() == 0.0);
    CHECK(p17.y() == 0.0);
    CHECK(p17.z() == doctest::Approx(0.01));
    const auto p16 = element_position(g, 16);
    CHECK(p16.y() == doctest::Approx(15 * 0.01));
    CHECK(p16.z() == 0.0);
}

TEST_CASE("element_position rejects out-of-range indices") {
    const auto g = grid(4, 2);
    CHECK_THROWS_AS(element_position(g, 0), std::out_of_range);
    CHECK_THROWS_AS(element_position(g, 9), std::out_of_range);
}

TEST_CASE("element_position is a bijection onto the grid") {
    const auto g = grid(5, 3, 1.0, 1.0);
    std::set<std::pair<long, long>> seen;
    for (int n = 1; n <= g.size(); ++n) {
        const auto p = element_position(g, n);
        seen.insert({std::lround(p.y()), std::lround(p.z())});
    }
    CHECK(seen.size() == 15u);
    CHECK(seen.begin()->first == 0);
    CHECK(seen.rbegin()->first == 4);
}

TEST_CASE("wave_vector") {
    const double k = 2 * kPi / 0.5;
    auto w = wave_vector({0, 0}, 0.5);
    CHECK(w.x() == doctest::Approx(k));
    CHECK(std::abs(w.y()) < 1e-12);
    w = wave_vector({kPi / 2, 0}, 0.5);
    CHECK(std::abs(w.x()) < 1e-12);
    CHECK(w.y() == doctest::Approx(k));
    w = wave_vector({kPi / 4, kPi / 6}, 1.0);
    CHECK(w.x() == doctest::Approx(2 * kPi * 0.61237).epsilon(1e-5));
    CHECK(w.y() == doctest::Approx(2 * kPi * 0.61237).epsilon(1e-5));
    CHECK(w.z() == doctest::Approx(2 * kPi * 0.5));
}

TEST_CASE("array_response examples") {
    const auto g = grid(4, 4);
    const CVector a = array_response(g, {0.3, -0.7});
    CHECK(std::abs(a[0] - cdouble(0.25, 0)) < 1e-15);
    for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(std::abs(a[i]) == doctest::Approx(0.25).epsilon(1e-14));

    const CVector b = array_response(g, {0, 0});
    for (Eigen::Index i = 0; i < b.size(); ++i) CHECK(std::abs(b[i] - cdouble(0.25, 0)) < 1e-15);

    const auto two = grid(2, 1, 0.5, 0.5, 1.0);
    const CVector c = array_response(two, {kPi / 2, 0});
    CHECK(std::abs(c[0] - cdouble(1 / std::sqrt(2.0), 0)) < 1e-15);
    CHECK(std::abs(c[1] - cdouble(-1 / std::sqrt(2.0), 0)) < 1e-12);
}

TEST_CASE("array_response conjugate symmetry in azimuth at zero elevation") {
    const auto g = grid(6, 3);
    const CVector p = array_response(g, {0.4, 0});
    const CVector m = array_response(g, {-0.4, 0});
    CHECK((p.conjugate() - m).norm() < 1e-13);
}

TEST_CASE("azimuth_vertical response uses the azimuth in the vertical phase") {
    const auto g = grid(2, 2, 0.01, 0.01, 0.04);
    const Direction d{0.5, 0.2};
    const CVector lit = array_response(g, d, ResponseForm::azimuth_vertical);
    const double k = 2 * kPi / 0.04;
    // element 3 sits at (alpha, gamma) = (0, 1)
    const cdouble expect = std::exp(cdouble(0, k * std::sin(d.azimuth) * 0.01)) / 2.0;
    CHECK(std::abs(lit[2] - expect) < 1e-13);
    const CVector wv = array_response(g, d);
    CHECK(std::abs(wv[2] - std::exp(cdouble(0, k * std::sin(d.elevation) * 0.01)) / 2.0) < 1e-13);
}

TEST_CASE("geometry validation") {
    CHECK_THROWS_AS(grid(0, 1).validate(), ArgumentError);
    CHECK_THROWS_AS(grid(2, 2, -1.0).validate(), ArgumentError);
    CHECK_THROWS(Direction{2.0, 0}.validate());
    CHECK(wavelength_for(7.8e9) == doctest::Approx(kSpeedOfLight / 7.8e9));
}
