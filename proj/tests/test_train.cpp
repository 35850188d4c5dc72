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

#include <cstring>
#include <filesystem>

#include <unistd.h>

#include "riscest/estimators.hpp"
#include "riscest/nn/train.hpp"

using namespace riscest;
using namespace riscest::nn;
namespace fs = std::filesystem;

namespace {

// LS/truth patches of desk-sized channels at one SNR.
PatchDataset channel_patches(int samples, int per_sample, double snr, std::uint64_t seed) {
    ChannelConfig c;
    const double lambda = wavelength_for(7.8e9);
    c.ris = ArrayGeometry::with_spacing(4, 4, lambda, 0.25, 0.25);
    c.bs = ArrayGeometry::with_spacing(8, 8, lambda, 0.5, 0.5);
    c.seed = seed;
    const ChannelModel m(c);
    const auto s = dft_schedule(16, 16);
    PilotConfig p;
    p.snr_db = snr;
    std::vector<CMatrix> x, y;
    for (int i = 0; i < samples; ++i) {
        const auto r = m.realize(i);
        Rng rng(derive_seed(seed, i, Stream::pilot_noise));
        x.push_back(ls_estimate(simulate_pilots(r, s, p, rng, false), s));
        y.push_back(r.G);
    }
    PatchSpec spec;
    spec.p_x = 8;
    spec.p_y = 8;
    spec.total_patches = static_cast<std::size_t>(samples * per_sample);
    spec.seed = seed;
    return extract_patches(x, y, spec);
}

NetConfig small_net() {
    NetConfig cfg;
    cfg.levels = 2;
    cfg.base_filters = 4;
    return cfg;
}

fs::path temp_path(const std::string& name) {
    return fs::temp_directory_path() / ("riscest_test_" + std::to_string(::getpid()) + "_" + name);
}

} // namespace

TEST_CASE("learning-rate schedule") {
    TrainConfig tc;
    CHECK(tc.lr_at(0) == 0.004);
    CHECK(tc.lr_at(2) == doctest::Approx(0.004 * 0.95 * 0.95));
    tc.decay = 0.0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc.decay = 0.9;
    tc.lr = -1;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
}

TEST_CASE("mse loss and gradient") {
    Tensor4<double> y(1, 1, 1, 2), t(1, 1, 1, 2), g;
    y.data = {1, 3};
    t.data = {0, 1};
    CHECK(mse_loss<double>(y, t, &g) == doctest::Approx(2.5));
    CHECK(g.data[0] == doctest::Approx(1.0));
    CHECK(g.data[1] == doctest::Approx(2.0));
}

TEST_CASE("overfits a tiny fixture") {
    const PatchDataset ds = channel_patches(10, 1, 10, 1);
    DenoiserNet<float> net(small_net());
    net.init(2, false);
    TrainConfig tc;
    tc.epochs = 50;
    tc.val_fraction = 0.0;
    tc.batch_size = 2;
    tc.seed = 3;
    const auto h = train(net, ds, tc);
    REQUIRE(h.size() == 50u);
    for (int e = 1; e < 5; ++e) CHECK(h[e].train_loss < h[e - 1].train_loss);
    CHECK(h.back().train_loss < 0.5 * h.front().train_loss);
}

TEST_CASE("learns the identity on noiseless data") {
    PatchDataset ds = channel_patches(200, 1, 10, 4);
    ds.data = ds.labels;
    DenoiserNet<float> net(small_net());
    net.init(5);
    TrainConfig tc;
    tc.epochs = 40;
    tc.val_fraction = 0.0;
    tc.batch_size = 8;
    tc.seed = 6;
    const auto h = train(net, ds, tc);
    CHECK(evaluate_loss(net, ds, 0, ds.count, 32) < 1e-4);
}

TEST_CASE("training is reproducible and resumable") {
    const PatchDataset ds = channel_patches(40, 2, 0, 7);
    TrainConfig tc;
    tc.epochs = 4;
    tc.batch_size = 16;
    tc.seed = 8;
    tc.val_fraction = 0.25;

    DenoiserNet<float> a(small_net());
    a.init(9);
    TrainState<float> sa;
    train(a, ds, tc, sa);

    DenoiserNet<float> b(small_net());
    b.init(9);
    TrainState<float> sb;
    TrainConfig half = tc;
    half.epochs = 2;
    train(b, ds, half, sb);
    Checkpoint ck;
    ck.net_config = small_net();
    ck.train_config = half;
    ck.state = sb;
    ck.net = b;
    const auto path = temp_path("resume.rcnn");
    save_checkpoint(ck, path);
    Checkpoint back = load_checkpoint(path);
    fs::remove(path);
    train(back.net, ds, tc, back.state);

    REQUIRE(back.state.history.size() == 4u);
    for (int e = 0; e < 4; ++e) {
        CHECK(back.state.history[e].train_loss == sa.history[e].train_loss);
        CHECK(back.state.history[e].val_loss == sa.history[e].val_loss);
    }
    const auto pa = a.params(), pb = back.net.params();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
}

TEST_CASE("non-finite loss aborts") {
    PatchDataset ds = channel_patches(4, 1, 0, 10);
    ds.labels[3] = std::numeric_limits<float>::quiet_NaN();
    DenoiserNet<float> net(small_net());
    net.init(1);
    TrainConfig tc;
    tc.epochs = 1;
    tc.val_fraction = 0;
    CHECK_THROWS_AS(train(net, ds, tc), NumericError);
}

TEST_CASE("checkpoint round trip and errors") {
    Checkpoint ck;
    ck.net_config = small_net();
    ck.net = DenoiserNet<float>(ck.net_config);
    ck.net.init(4);
    ck.meta["k"] = "v";
    ck.state.epochs_done = 0;
    const std::string bytes = encode_checkpoint(ck);
    CHECK(bytes.substr(0, 4) == "RCNN");
    const Checkpoint back = decode_checkpoint(bytes);
    CHECK(encode_checkpoint(back) == bytes);
    CHECK(back.meta.at("k") == "v");
    const auto pa = ck.net.params(), pb = back.net.params();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);

    std::string bad = bytes;
    bad[1] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(bad), BadMagicError);
    bad = bytes;
    bad[4] = 7;
    CHECK_THROWS_AS(decode_checkpoint(bad), VersionMismatchError);
    CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 4)), TruncatedError);
    CHECK_THROWS_AS(decode_checkpoint(bytes + "abcd"), IntegrityError);
    CHECK_THROWS_AS(load_checkpoint(temp_path("none.rcnn")), IoError);
}

TEST_CASE("loss trace csv") {
    std::vector<EpochLoss> h{{0, 0.5, 0.5, 0.25}, {1, 0.25, 0.25, std::numeric_limits<double>::quiet_NaN()}};
    const std::string csv = loss_csv(h);
    CHECK(csv.rfind("epoch,lr,train_loss,val_loss\n", 0) == 0);
    CHECK(csv.find("\n0,0.5,0.5,0.25\n") != std::string::npos);
    CHECK(csv.find("nan") != std::string::npos);
}

TEST_CASE("full and tiled inference") {
    DenoiserNet<float> net(small_net());
    net.init(11);
    Rng rng(12);
    const CMatrix g = rng.complex_normal_matrix(16, 8);
    const CMatrix full = infer(net, g);
    const CMatrix same = infer(net, g, {InferMode::tiled, 16, 8});
    CHECK(full == same);

    const CMatrix tiled = infer(net, g, {InferMode::tiled, 8, 8});
    CHECK(tiled.block(8, 0, 8, 8) == infer(net, CMatrix(g.block(8, 0, 8, 8))));
    CHECK_THROWS_AS(infer(net, g, {InferMode::tiled, 6, 8}), ShapeError);
    CHECK_THROWS_AS(infer(net, CMatrix(rng.complex_normal_matrix(7, 8))), ShapeError);
}
