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

// Layer primitives with exact backward passes. Every layer caches what
// its backward needs from the most recent forward call; backward
// accumulates parameter gradients (+=) and returns the input gradient.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "riscest/nn/tensor.hpp"
#include "riscest/rng.hpp"

namespace riscest::nn {

template <class T>
struct Param {
    std::string name;
    std::vector<T> value;
    std::vector<T> grad;

    Param() = default;
    Param(std::string n, std::size_t size) : name(std::move(n)), value(size, T(0)), grad(size, T(0)) {}
    std::size_t size() const { return value.size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Same-padded 2-D cross-correlation, stride 1, odd square kernel.
template <class T>
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(std::string name, int in_channels, int out_channels, int kernel)
        : weight(name + ".weight", static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel),
          bias(name + ".bias", static_cast<std::size_t>(out_channels)),
          in_c_(in_channels), out_c_(out_channels), k_(kernel) {
        if (in_channels < 1 || out_channels < 1) throw ConfigError("conv channels must be >= 1");
        if (kernel < 1 || kernel % 2 == 0) throw ConfigError("conv kernel must be odd");
    }

    int in_channels() const { return in_c_; }
    int out_channels() const { return out_c_; }
    int kernel() const { return k_; }

    /// Kaiming-uniform over fan-in (ReLU gain), zero bias.
    void init_kaiming(Rng& rng) {
        const double fan_in = static_cast<double>(in_c_) * k_ * k_;
        const double bound = std::sqrt(6.0 / fan_in);
        for (auto& v : weight.value) v = static_cast<T>(rng.uniform(-bound, bound));
        std::fill(bias.value.begin(), bias.value.end(), T(0));
    }

    /// Zeroes output channel o and sets its centre tap from input i to v.
    void set_tap(int o, int i, T v) {
        const std::size_t k2 = static_cast<std::size_t>(k_) * k_;
        weight.value[(static_cast<std::size_t>(o) * in_c_ + i) * k2 + (k_ / 2) * k_ + k_ / 2] = v;
    }
    void zero_output(int o) {
        const std::size_t n = static_cast<std::size_t>(in_c_) * k_ * k_;
        std::fill_n(weight.value.begin() + static_cast<std::ptrdiff_t>(o * n), n, T(0));
        bias.value[o] = T(0);
    }

    void zero_init() {
        std::fill(weight.value.begin(), weight.value.end(), T(0));
        std::fill(bias.value.begin(), bias.value.end(), T(0));
    }

    Tensor4<T> forward(const Tensor4<T>& x) {
        if (x.c != in_c_)
            throw ShapeError(weight.name + ": expected " + std::to_string(in_c_) + " input channels, got " +
                             std::to_string(x.c));
        in_n_ = x.n;
        in_h_ = x.h;
        in_w_ = x.w;
        im2col(x);
        const Eigen::Map<const RowMat<T>> wm(weight.value.data(), out_c_, in_c_ * k_ * k_);
        RowMat<T> y = wm * col_;
        Tensor4<T> out(x.n, out_c_, x.h, x.w);
        const std::size_t hw = x.plane();
        for (int in = 0; in < x.n; ++in)
            for (int oc = 0; oc < out_c_; ++oc) {
                const T* src = y.data() + static_cast<std::size_t>(oc) * y.cols() + in * hw;
                T* dst = out.data.data() + out.index(in, oc, 0, 0);
                const T b = bias.value[oc];
                for (std::size_t p = 0; p < hw; ++p) dst[p] = src[p] + b;
            }
        return out;
    }

    Tensor4<T> backward(const Tensor4<T>& dy) {
        if (dy.n != in_n_ || dy.c != out_c_ || dy.h != in_h_ || dy.w != in_w_)
            throw ShapeError(weight.name + ": gradient shape does not match the last forward");
        const std::size_t hw = dy.plane();
        RowMat<T> g(out_c_, static_cast<Eigen::Index>(dy.n * hw));
        for (int in = 0; in < dy.n; ++in)
            for (int oc = 0; oc < out_c_; ++oc) {
                const T* src = dy.data.data() + dy.index(in, oc, 0, 0);
                T* dst = g.data() + static_cast<std::size_t>(oc) * g.cols() + in * hw;
                std::copy(src, src + hw, dst);
            }
        Eigen::Map<RowMat<T>> dw(weight.grad.data(), out_c_, in_c_ * k_ * k_);
        dw.noalias() += g * col_.transpose();
        for (int oc = 0; oc < out_c_; ++oc) bias.grad[oc] += g.row(oc).sum();
        const Eigen::Map<const RowMat<T>> wm(weight.value.data(), out_c_, in_c_ * k_ * k_);
        const RowMat<T> dcol = wm.transpose() * g;
        return col2im(dcol);
    }

    Param<T> weight;
    Param<T> bias;

private:
    void im2col(const Tensor4<T>& x) {
        const int pad = k_ / 2;
        const std::size_t hw = x.plane();
        col_.resize(static_cast<Eigen::Index>(in_c_) * k_ * k_, static_cast<Eigen::Index>(x.n * hw));
        for (int ic = 0; ic < in_c_; ++ic)
            for (int ky = 0; ky < k_; ++ky)
                for (int kx = 0; kx < k_; ++kx) {
                    T* row = col_.data() + ((static_cast<std::size_t>(ic) * k_ + ky) * k_ + kx) * col_.cols();
                    for (int in = 0; in < x.n; ++in)
                        for (int yy = 0; yy < x.h; ++yy) {
                            const int sy = yy + ky - pad;
                            T* dst = row + in * hw + static_cast<std::size_t>(yy) * x.w;
                            if (sy < 0 || sy >= x.h) {
                                std::fill(dst, dst + x.w, T(0));
                                continue;
                            }
                            const T* src = x.data.data() + x.index(in, ic, sy, 0);
                            for (int xx = 0; xx < x.w; ++xx) {
                                const int sx = xx + kx - pad;
                                dst[xx] = (sx < 0 || sx >= x.w) ? T(0) : src[sx];
                            }
                        }
                }
    }

    Tensor4<T> col2im(const RowMat<T>& dcol) const {
        const int pad = k_ / 2;
        Tensor4<T> dx(in_n_, in_c_, in_h_, in_w_);
        const std::size_t hw = dx.plane();
        for (int ic = 0; ic < in_c_; ++ic)
            for (int ky = 0; ky < k_; ++ky)
                for (int kx = 0; kx < k_; ++kx) {
                    const T* row = dcol.data() + ((static_cast<std::size_t>(ic) * k_ + ky) * k_ + kx) * dcol.cols();
                    for (int in = 0; in < in_n_; ++in)
                        for (int yy = 0; yy < in_h_; ++yy) {
                            const int sy = yy + ky - pad;
                            if (sy < 0 || sy >= in_h_) continue;
                            const T* src = row + in * hw + static_cast<std::size_t>(yy) * in_w_;
                            T* dst = dx.data.data() + dx.index(in, ic, sy, 0);
                            for (int xx = 0; xx < in_w_; ++xx) {
                                const int sx = xx + kx - pad;
                                if (sx >= 0 && sx < in_w_) dst[sx] += src[xx];
                            }
                        }
                }
        return dx;
    }

    int in_c_ = 0, out_c_ = 0, k_ = 1;
    int in_n_ = 0, in_h_ = 0, in_w_ = 0;
    RowMat<T> col_;
};

/// Per-channel batch normalisation. Train mode normalises with batch
/// statistics (biased variance) and updates running statistics with the
/// unbiased variance; eval mode uses the running statistics.
template <class T>
class BatchNorm2d {
public:
    static constexpr double kEps = 1e-5;
    static constexpr double kMomentum = 0.1;

    BatchNorm2d() = default;
    BatchNorm2d(std::string name, int channels)
        : gamma(name + ".gamma", static_cast<std::size_t>(channels)),
          beta(name + ".beta", static_cast<std::size_t>(channels)),
          running_mean(static_cast<std::size_t>(channels), T(0)),
          running_var(static_cast<std::size_t>(channels), T(1)), c_(channels) {
        std::fill(gamma.value.begin(), gamma.value.end(), T(1));
    }

    Tensor4<T> forward(const Tensor4<T>& x, bool train) {
        if (x.c != c_) throw ShapeError(gamma.name + ": channel mismatch");
        train_ = train;
        const std::size_t hw = x.plane();
        const double count = static_cast<double>(x.n) * hw;
        xhat_ = Tensor4<T>(x.n, x.c, x.h, x.w);
        inv_std_.assign(c_, T(0));
        Tensor4<T> y(x.n, x.c, x.h, x.w);
        for (int ch = 0; ch < c_; ++ch) {
            double mean, var;
            if (train) {
                double s = 0.0;
                for (int in = 0; in < x.n; ++in) {
                    const T* p = x.data.data() + x.index(in, ch, 0, 0);
                    for (std::size_t i = 0; i < hw; ++i) s += p[i];
                }
                mean = s / count;
                double ss = 0.0;
                for (int in = 0; in < x.n; ++in) {
                    const T* p = x.data.data() + x.index(in, ch, 0, 0);
                    for (std::size_t i = 0; i < hw; ++i) ss += (p[i] - mean) * (p[i] - mean);
                }
                var = ss / count;
                const double unbiased = count > 1 ? ss / (count - 1) : var;
                running_mean[ch] = static_cast<T>((1 - kMomentum) * running_mean[ch] + kMomentum * mean);
                running_var[ch] = static_cast<T>((1 - kMomentum) * running_var[ch] + kMomentum * unbiased);
            } else {
                mean = running_mean[ch];
                var = running_var[ch];
            }
            const double inv = 1.0 / std::sqrt(var + kEps);
            inv_std_[ch] = static_cast<T>(inv);
            const T g = gamma.value[ch], b = beta.value[ch];
            for (int in = 0; in < x.n; ++in) {
                const std::size_t base = x.index(in, ch, 0, 0);
                for (std::size_t i = 0; i < hw; ++i) {
                    const T xh = static_cast<T>((x.data[base + i] - mean) * inv);
                    xhat_.data[base + i] = xh;
                    y.data[base + i] = g * xh + b;
                }
            }
        }
        return y;
    }

    Tensor4<T> backward(const Tensor4<T>& dy) {
        if (!dy.same_shape(xhat_)) throw ShapeError(gamma.name + ": gradient shape mismatch");
        const std::size_t hw = dy.plane();
        const double count = static_cast<double>(dy.n) * hw;
        Tensor4<T> dx(dy.n, dy.c, dy.h, dy.w);
        for (int ch = 0; ch < c_; ++ch) {
            double sum_dy = 0.0, sum_dy_xh = 0.0;
            for (int in = 0; in < dy.n; ++in) {
                const std::size_t base = dy.index(in, ch, 0, 0);
                for (std::size_t i = 0; i < hw; ++i) {
                    sum_dy += dy.data[base + i];
                    sum_dy_xh += static_cast<double>(dy.data[base + i]) * xhat_.data[base + i];
                }
            }
            gamma.grad[ch] += static_cast<T>(sum_dy_xh);
            beta.grad[ch] += static_cast<T>(sum_dy);
            const double g = gamma.value[ch];
            const double inv = inv_std_[ch];
            for (int in = 0; in < dy.n; ++in) {
                const std::size_t base = dy.index(in, ch, 0, 0);
                for (std::size_t i = 0; i < hw; ++i) {
                    if (train_) {
                        const double v = count * dy.data[base + i] - sum_dy - xhat_.data[base + i] * sum_dy_xh;
                        dx.data[base + i] = static_cast<T>(g * inv * v / count);
                    } else {
                        dx.data[base + i] = static_cast<T>(g * inv * dy.data[base + i]);
                    }
                }
            }
        }
        return dx;
    }

    Param<T> gamma;
    Param<T> beta;
    std::vector<T> running_mean;
    std::vector<T> running_var;

private:
    int c_ = 0;
    bool train_ = true;
    Tensor4<T> xhat_;
    std::vector<T> inv_std_;
};

template <class T>
class ReLU {
public:
    Tensor4<T> forward(const Tensor4<T>& x) {
        Tensor4<T> y = x;
        mask_.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            mask_[i] = x.data[i] > T(0);
            if (!mask_[i]) y.data[i] = T(0);
        }
        return y;
    }

    Tensor4<T> backward(const Tensor4<T>& dy) const {
        Tensor4<T> dx = dy;
        for (std::size_t i = 0; i < dx.size(); ++i)
            if (!mask_[i]) dx.data[i] = T(0);
        return dx;
    }

    const std::vector<std::uint8_t>& mask() const { return mask_; }

private:
    std::vector<std::uint8_t> mask_;
};

/// Non-overlapping max pooling with a square window of `factor`.
template <class T>
class MaxPool {
public:
    explicit MaxPool(int factor = 2) : f_(factor) {
        if (factor < 1) throw ConfigError("pool factor must be >= 1");
    }

    Tensor4<T> forward(const Tensor4<T>& x) {
        if (x.h % f_ != 0 || x.w % f_ != 0)
            throw ShapeError("max pool by " + std::to_string(f_) + " needs spatial dims divisible by it, got " +
                             std::to_string(x.h) + "x" + std::to_string(x.w));
        in_ = {x.n, x.c, x.h, x.w};
        Tensor4<T> y(x.n, x.c, x.h / f_, x.w / f_);
        argmax_.resize(y.size());
        std::size_t o = 0;
        for (int in = 0; in < x.n; ++in)
            for (int ch = 0; ch < x.c; ++ch)
                for (int oy = 0; oy < y.h; ++oy)
                    for (int ox = 0; ox < y.w; ++ox, ++o) {
                        std::size_t best = x.index(in, ch, oy * f_, ox * f_);
                        for (int dy = 0; dy < f_; ++dy)
                            for (int dx = 0; dx < f_; ++dx) {
                                const std::size_t k = x.index(in, ch, oy * f_ + dy, ox * f_ + dx);
                                if (x.data[k] > x.data[best]) best = k;
                            }
                        argmax_[o] = best;
                        y.data[o] = x.data[best];
                    }
        return y;
    }

    Tensor4<T> backward(const Tensor4<T>& dy) const {
        Tensor4<T> dx(in_[0], in_[1], in_[2], in_[3]);
        for (std::size_t o = 0; o < dy.size(); ++o) dx.data[argmax_[o]] += dy.data[o];
        return dx;
    }

    int factor() const { return f_; }
    const std::vector<std::size_t>& argmax() const { return argmax_; }

private:
    int f_ = 2;
    std::array<int, 4> in_{};
    std::vector<std::size_t> argmax_;
};

/// Bilinear upsampling by an integer factor, align_corners = false with
/// edge clamping (source coordinate (o + 0.5) / f - 0.5, clamped at 0).
template <class T>
class BilinearUp {
public:
    explicit BilinearUp(int factor = 2) : f_(factor) {
        if (factor < 1) throw ConfigError("upsample factor must be >= 1");
    }

    Tensor4<T> forward(const Tensor4<T>& x) {
        in_ = {x.n, x.c, x.h, x.w};
        rows_ = axis(x.h);
        cols_ = axis(x.w);
        Tensor4<T> y(x.n, x.c, x.h * f_, x.w * f_);
        for (int in = 0; in < x.n; ++in)
            for (int ch = 0; ch < x.c; ++ch) {
                const T* src = x.data.data() + x.index(in, ch, 0, 0);
                T* dst = y.data.data() + y.index(in, ch, 0, 0);
                for (int oy = 0; oy < y.h; ++oy) {
                    const Tap& r = rows_[oy];
                    for (int ox = 0; ox < y.w; ++ox) {
                        const Tap& c = cols_[ox];
                        const T top = c.w0 * src[r.i0 * x.w + c.i0] + c.w1 * src[r.i0 * x.w + c.i1];
                        const T bot = c.w0 * src[r.i1 * x.w + c.i0] + c.w1 * src[r.i1 * x.w + c.i1];
                        dst[oy * y.w + ox] = r.w0 * top + r.w1 * bot;
                    }
                }
            }
        return y;
    }

    Tensor4<T> backward(const Tensor4<T>& dy) const {
        Tensor4<T> dx(in_[0], in_[1], in_[2], in_[3]);
        for (int in = 0; in < dy.n; ++in)
            for (int ch = 0; ch < dy.c; ++ch) {
                const T* src = dy.data.data() + dy.index(in, ch, 0, 0);
                T* dst = dx.data.data() + dx.index(in, ch, 0, 0);
                for (int oy = 0; oy < dy.h; ++oy) {
                    const Tap& r = rows_[oy];
                    for (int ox = 0; ox < dy.w; ++ox) {
                        const Tap& c = cols_[ox];
                        const T g = src[oy * dy.w + ox];
                        dst[r.i0 * dx.w + c.i0] += r.w0 * c.w0 * g;
                        dst[r.i0 * dx.w + c.i1] += r.w0 * c.w1 * g;
                        dst[r.i1 * dx.w + c.i0] += r.w1 * c.w0 * g;
                        dst[r.i1 * dx.w + c.i1] += r.w1 * c.w1 * g;
                    }
                }
            }
        return dx;
    }

private:
    struct Tap {
        int i0, i1;
        T w0, w1;
    };

    std::vector<Tap> axis(int in) const {
        std::vector<Tap> taps(static_cast<std::size_t>(in) * f_);
        for (int o = 0; o < in * f_; ++o) {
            const double src = std::max(0.0, (o + 0.5) / f_ - 0.5);
            const int i0 = std::min(static_cast<int>(src), in - 1);
            const int i1 = std::min(i0 + 1, in - 1);
            const double l1 = src - i0;
            taps[o] = {i0, i1, static_cast<T>(1.0 - l1), static_cast<T>(l1)};
        }
        return taps;
    }

    int f_ = 2;
    std::array<int, 4> in_{};
    std::vector<Tap> rows_, cols_;
};

/// Channel concatenation; all parts must share n, h, w.
template <class T>
Tensor4<T> concat(const std::vector<const Tensor4<T>*>& parts) {
    if (parts.empty()) throw ShapeError("concat of nothing");
    const Tensor4<T>& f = *parts.front();
    int channels = 0;
    for (const auto* p : parts) {
        if (p->n != f.n || p->h != f.h || p->w != f.w)
            throw ShapeError("concat: " + p->shape_string() + " vs " + f.shape_string());
        channels += p->c;
    }
    Tensor4<T> out(f.n, channels, f.h, f.w);
    for (int in = 0; in < f.n; ++in) {
        T* dst = out.sample(in);
        for (const auto* p : parts) {
            const T* src = p->sample(in);
            dst = std::copy(src, src + p->sample_size(), dst);
        }
    }
    return out;
}

/// Inverse of concat for gradients: splits channels by the given widths.
template <class T>
std::vector<Tensor4<T>> split_channels(const Tensor4<T>& x, const std::vector<int>& widths) {
    std::vector<Tensor4<T>> out;
    int total = 0;
    for (int c : widths) {
        out.emplace_back(x.n, c, x.h, x.w);
        total += c;
    }
    if (total != x.c) throw ShapeError("split_channels: widths do not sum to channel count");
    for (int in = 0; in < x.n; ++in) {
        const T* src = x.sample(in);
        for (auto& part : out) {
            std::copy(src, src + part.sample_size(), part.sample(in));
            src += part.sample_size();
        }
    }
    return out;
}

template <class T>
void add_into(Tensor4<T>& acc, const Tensor4<T>& x) {
    if (!acc.same_shape(x)) throw ShapeError("add: " + acc.shape_string() + " vs " + x.shape_string());
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data[i] += x.data[i];
}

} // namespace riscest::nn
