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

#include <filesystem>
#include <map>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "riscest/nn/net.hpp"
#include "riscest/patching.hpp"

namespace riscest::nn {

struct TrainConfig {
    double lr = 0.004;
    double decay = 0.95;  ///< lr_e = lr * decay^e
    int batch_size = 32;
    int epochs = 10;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;
    double val_fraction = 0.1;  ///< tail of the dataset held out for validation

    double lr_at(int epoch) const { return lr * std::pow(decay, epoch); }

    void validate() const {
        if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
        if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("decay must be in (0, 1]");
        if (batch_size < 1) throw ConfigError("batch size must be >= 1");
        if (epochs < 0) throw ConfigError("epochs must be >= 0");
        if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
            throw ConfigError("Adam moment coefficients must be in [0, 1)");
        if (!(eps > 0.0)) throw ConfigError("Adam epsilon must be positive");
        if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must be in [0, 1)");
    }
};

struct EpochLoss {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = std::numeric_limits<double>::quiet_NaN();  ///< NaN when nothing is held out
};

template <class T>
struct AdamState {
    long long step = 0;
    std::vector<std::vector<T>> m, v;

    void ensure(const std::vector<Param<T>*>& params) {
        if (m.size() == params.size()) return;
        m.clear();
        v.clear();
        for (const auto* p : params) {
            m.emplace_back(p->size(), T(0));
            v.emplace_back(p->size(), T(0));
        }
    }
};

template <class T>
struct TrainState {
    int epochs_done = 0;
    AdamState<T> adam;
    std::vector<EpochLoss> history;
};

/// Adam update with bias correction at learning rate lr.
template <class T>
void adam_step(std::vector<Param<T>*>& params, AdamState<T>& st, const TrainConfig& tc, double lr) {
    st.ensure(params);
    ++st.step;
    const double bc1 = 1.0 - std::pow(tc.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(tc.beta2, static_cast<double>(st.step));
    const T b1 = static_cast<T>(tc.beta1), b2 = static_cast<T>(tc.beta2);
    const T step_size = static_cast<T>(lr / bc1);
    const T inv_sqrt_bc2 = static_cast<T>(1.0 / std::sqrt(bc2));
    const T eps = static_cast<T>(tc.eps);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Param<T>& p = *params[i];
        std::vector<T>& m = st.m[i];
        std::vector<T>& v = st.v[i];
        for (std::size_t k = 0; k < p.size(); ++k) {
            const T g = p.grad[k];
            m[k] = b1 * m[k] + (T(1) - b1) * g;
            v[k] = b2 * v[k] + (T(1) - b2) * g * g;
            p.value[k] -= step_size * m[k] / (std::sqrt(v[k]) * inv_sqrt_bc2 + eps);
        }
    }
}

/// Copies patches [first, first + count) of `order` into a batch tensor.
template <class T>
Tensor4<T> gather_batch(const std::vector<float>& src, const PatchDataset& ds, const std::vector<std::size_t>& order,
                        std::size_t first, std::size_t count) {
    Tensor4<T> x(static_cast<int>(count), 2, ds.p_y, ds.p_x);
    const std::size_t pv = ds.patch_values();
    for (std::size_t b = 0; b < count; ++b) {
        const float* p = src.data() + order[first + b] * pv;
        std::transform(p, p + pv, x.sample(static_cast<int>(b)), [](float f) { return static_cast<T>(f); });
    }
    return x;
}

/// Mean squared error and its gradient 2 (y - t) / numel.
template <class T>
double mse_loss(const Tensor4<T>& y, const Tensor4<T>& t, Tensor4<T>* grad) {
    if (!y.same_shape(t)) throw ShapeError("loss: " + y.shape_string() + " vs " + t.shape_string());
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = static_cast<double>(y.data[i]) - t.data[i];
        s += d * d;
    }
    const double n = static_cast<double>(y.size());
    if (grad) {
        *grad = Tensor4<T>(y.n, y.c, y.h, y.w);
        const T scale = static_cast<T>(2.0 / n);
        for (std::size_t i = 0; i < y.size(); ++i) grad->data[i] = scale * (y.data[i] - t.data[i]);
    }
    return s / n;
}

/// Number of leading patches used for training; the rest is validation.
inline std::size_t train_split(std::size_t count, double val_fraction) {
    const auto held = static_cast<std::size_t>(std::floor(static_cast<double>(count) * val_fraction));
    return count - std::min(held, count > 0 ? count - 1 : 0);
}

template <class T>
double evaluate_loss(DenoiserNet<T>& net, const PatchDataset& ds, std::size_t first, std::size_t last,
                     int batch_size) {
    if (last <= first) return std::numeric_limits<double>::quiet_NaN();
    std::vector<std::size_t> order(ds.count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    double total = 0.0;
    for (std::size_t b = first; b < last; b += batch_size) {
        const std::size_t cnt = std::min<std::size_t>(batch_size, last - b);
        const Tensor4<T> x = gather_batch<T>(ds.data, ds, order, b, cnt);
        const Tensor4<T> t = gather_batch<T>(ds.labels, ds, order, b, cnt);
        total += mse_loss<T>(net.forward(x, false), t, nullptr) * static_cast<double>(cnt);
    }
    return total / static_cast<double>(last - first);
}

template <class T>
using EpochCallback = std::function<void(const DenoiserNet<T>&, const TrainState<T>&)>;

/// Trains from state.epochs_done up to tc.epochs. Shuffling for epoch e is
/// keyed by (tc.seed, e), so resuming from a saved state reproduces an
/// uninterrupted run exactly. With a separate validation set all of `ds`
/// is used for training; otherwise the tail val_fraction is held out.
template <class T>
std::vector<EpochLoss> train(DenoiserNet<T>& net, const PatchDataset& ds, const TrainConfig& tc,
                             TrainState<T>& state, const EpochCallback<T>& on_epoch = {},
                             const PatchDataset* validation = nullptr) {
    tc.validate();
    const NetConfig& cfg = net.config();
    if (ds.count == 0) throw ArgumentError("training set is empty");
    if (ds.p_y % cfg.divisor() != 0 || ds.p_x % cfg.divisor() != 0)
        throw ConfigError("patch " + std::to_string(ds.p_y) + "x" + std::to_string(ds.p_x) +
                          " is not divisible by 2^(L-1) = " + std::to_string(cfg.divisor()));
    if (validation && (validation->p_y != ds.p_y || validation->p_x != ds.p_x))
        throw ShapeError("validation patches differ in shape from training patches");
    const std::size_t n_train = validation ? ds.count : train_split(ds.count, tc.val_fraction);
    state.adam.ensure(net.params());

    for (int e = state.epochs_done; e < tc.epochs; ++e) {
        const double lr = tc.lr_at(e);
        std::vector<std::size_t> order(ds.count);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(tc.seed, static_cast<std::uint64_t>(e), Stream::shuffle));
        for (std::size_t i = n_train; i-- > 1;) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(i)));
            std::swap(order[i], order[j]);
        }
        double total = 0.0;
        for (std::size_t b = 0; b < n_train; b += tc.batch_size) {
            const std::size_t cnt = std::min<std::size_t>(tc.batch_size, n_train - b);
            const Tensor4<T> x = gather_batch<T>(ds.data, ds, order, b, cnt);
            const Tensor4<T> t = gather_batch<T>(ds.labels, ds, order, b, cnt);
            net.zero_grad();
            Tensor4<T> dy;
            const double loss = mse_loss(net.forward(x, true), t, &dy);
            if (!std::isfinite(loss))
                throw NumericError("non-finite training loss at epoch " + std::to_string(e) + ", batch " +
                                   std::to_string(b / tc.batch_size) + " (lr " + std::to_string(lr) +
                                   "); lower the learning rate or check the initialisation");
            net.backward(dy);
            adam_step(net.params(), state.adam, tc, lr);
            total += loss * static_cast<double>(cnt);
        }
        EpochLoss rec;
        rec.epoch = e;
        rec.lr = lr;
        rec.train_loss = total / static_cast<double>(n_train);
        rec.val_loss = validation ? evaluate_loss(net, *validation, 0, validation->count, tc.batch_size)
                                  : evaluate_loss(net, ds, n_train, ds.count, tc.batch_size);
        state.history.push_back(rec);
        state.epochs_done = e + 1;
        if (on_epoch) on_epoch(net, state);
    }
    return state.history;
}

template <class T>
std::vector<EpochLoss> train(DenoiserNet<T>& net, const PatchDataset& ds, const TrainConfig& tc) {
    TrainState<T> state;
    return train(net, ds, tc, state);
}

// ---- inference ----

enum class InferMode { full, tiled };

struct InferOptions {
    InferMode mode = InferMode::full;
    int tile_h = 8;
    int tile_w = 8;
};

template <class T>
Tensor4<T> planes_tensor(const CMatrix& a) {
    Tensor4<T> x(1, 2, static_cast<int>(a.rows()), static_cast<int>(a.cols()));
    for (int r = 0; r < x.h; ++r)
        for (int c = 0; c < x.w; ++c) {
            x(0, 0, r, c) = static_cast<T>(a(r, c).real());
            x(0, 1, r, c) = static_cast<T>(a(r, c).imag());
        }
    return x;
}

template <class T>
CMatrix tensor_complex(const Tensor4<T>& y, int sample = 0) {
    CMatrix a(y.h, y.w);
    for (int r = 0; r < y.h; ++r)
        for (int c = 0; c < y.w; ++c)
            a(r, c) = {static_cast<double>(y(sample, 0, r, c)), static_cast<double>(y(sample, 1, r, c))};
    return a;
}

/// Denoises one complex LS estimate. Full mode runs one forward pass;
/// tiled mode denoises non-overlapping tiles one at a time and stitches them.
template <class T>
CMatrix infer(DenoiserNet<T>& net, const CMatrix& g_ls, const InferOptions& opt = {}) {
    if (opt.mode == InferMode::full) return tensor_complex(net.forward(planes_tensor<T>(g_ls), false));
    const auto rows = static_cast<int>(g_ls.rows()), cols = static_cast<int>(g_ls.cols());
    if (opt.tile_h < 1 || opt.tile_w < 1 || rows % opt.tile_h != 0 || cols % opt.tile_w != 0)
        throw ShapeError("tile " + std::to_string(opt.tile_h) + "x" + std::to_string(opt.tile_w) +
                         " does not divide " + std::to_string(rows) + "x" + std::to_string(cols) + "; pad to " +
                         std::to_string((rows + opt.tile_h - 1) / opt.tile_h * opt.tile_h) + "x" +
                         std::to_string((cols + opt.tile_w - 1) / opt.tile_w * opt.tile_w));
    if (opt.tile_h == rows && opt.tile_w == cols) return infer(net, g_ls, InferOptions{});
    CMatrix out(rows, cols);
    for (int r = 0; r < rows; r += opt.tile_h)
        for (int c = 0; c < cols; c += opt.tile_w) {
            const CMatrix tile = g_ls.block(r, c, opt.tile_h, opt.tile_w);
            out.block(r, c, opt.tile_h, opt.tile_w) = tensor_complex(net.forward(planes_tensor<T>(tile), false));
        }
    return out;
}

// ---- gradient check ----

struct GradCheckResult {
    double max_rel_error = 0.0;
    int probes = 0;
    int skipped = 0;  ///< perturbations that crossed a ReLU or pooling switch
};

/// Central differences with step h over randomly drawn coordinates of
/// `values`; `loss` re-evaluates the objective, `signature` reports the
/// activation pattern so probes that cross a non-smooth point are skipped.
GradCheckResult finite_difference_check(const std::vector<std::pair<double*, std::size_t>>& values,
                                        const std::vector<std::pair<const double*, std::size_t>>& grads,
                                        const std::function<double()>& loss,
                                        const std::function<std::uint64_t()>& signature, int probes,
                                        std::uint64_t seed, double step = 1e-5);

/// Checks every backward pass of the net (train-mode batch norm) with the
/// objective sum(w * net(x)) for fixed random w. Probes are split between
/// parameters and input entries.
GradCheckResult gradient_check(DenoiserNet<double>& net, const Tensor4<double>& x, int probes,
                               std::uint64_t seed, bool train_mode = true);

/// Same for a single convolution layer.
GradCheckResult gradient_check(Conv2d<double>& conv, const Tensor4<double>& x, int probes, std::uint64_t seed);

/// Gives every parameter (including the zero-initialised final convs) a
/// random value so no gradient path is identically zero.
void randomize_parameters(DenoiserNet<double>& net, std::uint64_t seed, double scale = 0.3);

// ---- checkpoint ----

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    NetConfig net_config;
    TrainConfig train_config;
    TrainState<float> state;
    bool has_optimizer = true;
    std::map<std::string, std::string> meta;
    DenoiserNet<float> net;
};

std::string encode_checkpoint(const Checkpoint& ck);
Checkpoint decode_checkpoint(std::string_view bytes);
void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// epoch,lr,train_loss,val_loss
std::string loss_csv(const std::vector<EpochLoss>& history);

} // namespace riscest::nn
