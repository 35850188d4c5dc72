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

#include "riscest/channel.hpp"

using namespace riscest;

namespace {

ChannelConfig small(int ris_h, int ris_v, int bs_h, int bs_v) {
    ChannelConfig c;
    const double lambda = wavelength_for(7.8e9);
    c.ris = ArrayGeometry::with_spacing(ris_h, ris_v, lambda, 0.25, 0.25);
    c.bs = ArrayGeometry::with_spacing(bs_h, bs_v, lambda, 0.5, 0.5);
    c.seed = 11;
    return c;
}

double rel_fro(const CMatrix& a, const CMatrix& b) { return (a - b).norm() / b.norm(); }

} // namespace

TEST_CASE("user-RIS link: pure LoS limit") {
    auto cfg = small(4, 4, 2, 2);
    cfg.eta_r = 1e12;
    const ChannelModel m(cfg);
    Rng rng(1);
    const Direction d{0.3, -0.2};
    const CVector f = m.sample_user_ris(rng, d);
    CHECK((f - m.los_user_ris(d)).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(m.los_user_ris(d).squaredNorm() == doctest::Approx(16.0));
}

TEST_CASE("user-RIS link: diffuse covariance and power") {
    auto cfg = small(4, 4, 2, 2);
    cfg.eta_r = 0.0;
    const ChannelModel m(cfg);
    Rng rng(2);
    const int draws = 20000;
    CMatrix acc = CMatrix::Zero(16, 16);
    for (int t = 0; t < draws; ++t) {
        const CVector f = m.sample_user_ris(rng, {0, 0});
        acc.noalias() += f * f.adjoint();
    }
    acc /= draws;
    CHECK(rel_fro(acc, m.ris_correlation_matrix().cast<cdouble>()) < 0.05);

    cfg.eta_r = 10.0;
    const ChannelModel m10(cfg);
    double power = 0.0;
    for (int t = 0; t < draws; ++t) {
        Rng r(derive_seed(5, t));
        power += m10.sample_user_ris(r, m10.draw_angles(r).user_ris).squaredNorm();
    }
    CHECK(power / draws == doctest::Approx(16.0).epsilon(0.02));
}

TEST_CASE("RIS-BS link") {
    auto cfg = small(2, 2, 2, 2);
    cfg.eta_b = 1e12;
    {
        const ChannelModel m(cfg);
        Rng rng(3);
        const CMatrix h = m.sample_ris_bs(rng, {0.2, 0.1}, {-0.4, 0.3});
        Eigen::JacobiSVD<CMatrix> svd(h);
        CHECK(svd.singularValues()(1) / svd.singularValues()(0) < 1e-5);
    }
    cfg.eta_b = 0.0;
    cfg.correlated = false;
    {
        const ChannelModel m(cfg);
        Rng rng(4);
        double s = 0.0;
        const int draws = 10000;
        for (int t = 0; t < draws; ++t) s += m.sample_ris_bs(rng, {}, {}).squaredNorm();
        CHECK(s / (draws * 16.0) == doctest::Approx(1.0).epsilon(0.03));
    }
    cfg.correlated = true;
    cfg.rho = 0.8;
    {
        const ChannelModel m(cfg);
        Rng rng(5);
        CMatrix acc = CMatrix::Zero(4, 4);
        const int draws = 20000;
        for (int t = 0; t < draws; ++t) {
            const CMatrix h = m.sample_ris_bs(rng, {}, {});
            acc.noalias() += h * h.adjoint();
        }
        // E[H H^H] = tr(R_r) R_b and tr(R_r) = N
        acc /= draws * 4.0;
        CHECK(rel_fro(acc, m.bs_correlation_matrix().cast<cdouble>()) < 0.05);
    }
}

TEST_CASE("direct link") {
    auto cfg = small(2, 2, 4, 2);
    cfg.rho = 0.0;
    const int draws = 20000;
    {
        const ChannelModel m(cfg);
        Rng rng(6);
        double s = 0.0;
        for (int t = 0; t < draws; ++t) s += m.sample_direct(rng).squaredNorm();
        CHECK(s / (draws * 8.0) == doctest::Approx(1.0).epsilon(0.03));
    }
    cfg.rho = 0.8;
    const ChannelModel m(cfg);
    CVector e1 = CVector::Zero(8);
    e1[0] = 1.0;
    CHECK((m.direct_from_innovation(e1) - m.bs_sqrt().col(0).cast<cdouble>()).norm() == 0.0);
    Rng rng(7);
    CMatrix acc = CMatrix::Zero(8, 8);
    for (int t = 0; t < draws; ++t) {
        const CVector b = m.sample_direct(rng);
        acc.noalias() += b * b.adjoint();
    }
    acc /= draws;
    CHECK(rel_fro(acc, m.bs_correlation_matrix().cast<cdouble>()) < 0.05);
}

TEST_CASE("cascade") {
    Rng rng(8);
    const CMatrix h = rng.complex_normal_matrix(3, 2);
    CHECK(cascade(CVector::Ones(2), h) == h);
    CVector e1 = CVector::Zero(2);
    e1[0] = 1.0;
    const CMatrix g1 = cascade(e1, h);
    CHECK(g1.col(0) == h.col(0));
    CHECK(g1.col(1).isZero(0));
    const CVector f = rng.complex_normal_vector(2);
    CMatrix dense = CMatrix::Zero(2, 2);
    dense.diagonal() = f;
    CHECK((cascade(f, h) - h * dense).norm() < 1e-15);
    CHECK_THROWS_AS(cascade(CVector::Ones(3), h), ShapeError);
}

TEST_CASE("realisations are reproducible and consistent") {
    const ChannelModel m(small(4, 2, 2, 2));
    const auto a = m.realize(17);
    const auto b = m.realize(17);
    CHECK(a.G == b.G);
    CHECK(a.b == b.b);
    CHECK(a.G == cascade(a.f, a.H));
    CHECK(a.G.allFinite());
    CHECK(m.realize(18).G != a.G);
}

TEST_CASE("cascade power is the product of link powers") {
    const ChannelModel m(small(2, 2, 2, 2));
    double g = 0, h = 0, f = 0;
    const int draws = 20000;
    for (int t = 0; t < draws; ++t) {
        const auto r = m.realize(t);
        g += std::norm(r.G(0, 0));
        h += std::norm(r.H(0, 0));
        f += std::norm(r.f[0]);
    }
    CHECK(g / draws == doctest::Approx((h / draws) * (f / draws)).epsilon(0.1));
}

TEST_CASE("channel config validation") {
    auto cfg = small(2, 2, 2, 2);
    cfg.eta_r = -1;
    CHECK_THROWS_AS(ChannelModel{cfg}, ConfigError);
}
