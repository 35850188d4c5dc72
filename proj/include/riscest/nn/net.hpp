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

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "riscest/nn/layers.hpp"

namespace riscest::nn {

struct NetConfig {
    int levels = 2;           ///< encoder depth L
    int base_filters = 8;     ///< C0; level l has C0 * 2^l channels
    int convs_per_block = 2;  ///< i
    int kernel = 3;           ///< K
    bool batchnorm = true;
    int in_channels = 2;
    int out_channels = 2;
    int patch_h = 8;          ///< training input height
    int patch_w = 8;          ///< training input width

    int width(int level) const { return base_filters << level; }
    /// 2^(L-1): every input dimension must be a multiple of this.
    int divisor() const { return 1 << (levels - 1); }
    void validate() const;
    bool operator==(const NetConfig&) const = default;
};

inline void NetConfig::validate() const {
    if (levels < 2 || levels > 8) throw ConfigError("levels must be in [2, 8]");
    if (base_filters < 1) throw ConfigError("base_filters must be >= 1");
    if (convs_per_block < 1) throw ConfigError("convs_per_block must be >= 1");
    if (kernel < 1 || kernel % 2 == 0) throw ConfigError("kernel must be odd and >= 1");
    if (in_channels < 1 || out_channels < 1) throw ConfigError("channel counts must be >= 1");
    if (patch_h < 1 || patch_w < 1 || patch_h % divisor() != 0 || patch_w % divisor() != 0)
        throw ConfigError("patch " + std::to_string(patch_h) + "x" + std::to_string(patch_w) +
                          " is not divisible by 2^(L-1) = " + std::to_string(divisor()));
}

/// Z = A - r(A), A = conv1x1(I), r = i convs with BN/ReLU between them and
/// a linear final conv.
template <class T>
class DenoiseBlock {
public:
    DenoiseBlock() = default;
    DenoiseBlock(const std::string& name, int in_c, int out_c, int convs, int kernel, bool bn)
        : align(name + ".align", in_c, out_c, 1) {
        for (int j = 0; j < convs; ++j) {
            residual.emplace_back(name + ".conv" + std::to_string(j), out_c, out_c, kernel);
            if (j + 1 < convs) {
                if (bn) norms.emplace_back(name + ".bn" + std::to_string(j), out_c);
                relus.emplace_back();
            }
        }
    }

    int out_channels() const { return align.out_channels(); }

    Tensor4<T> forward(const Tensor4<T>& x, bool train) {
        Tensor4<T> a = align.forward(x);
        Tensor4<T> r = a;
        for (std::size_t j = 0; j < residual.size(); ++j) {
            r = residual[j].forward(r);
            if (j + 1 < residual.size()) {
                if (!norms.empty()) r = norms[j].forward(r, train);
                r = relus[j].forward(r);
            }
        }
        for (std::size_t k = 0; k < a.size(); ++k) a.data[k] -= r.data[k];
        return a;
    }

    Tensor4<T> backward(const Tensor4<T>& dz) {
        Tensor4<T> dr = dz;
        for (auto& v : dr.data) v = -v;
        for (std::size_t j = residual.size(); j-- > 0;) {
            if (j + 1 < residual.size()) {
                dr = relus[j].backward(dr);
                if (!norms.empty()) dr = norms[j].backward(dr);
            }
            dr = residual[j].backward(dr);
        }
        add_into(dr, dz);
        return align.backward(dr);
    }

    Conv2d<T> align;
    std::vector<Conv2d<T>> residual;
    std::vector<BatchNorm2d<T>> norms;
    std::vector<ReLU<T>> relus;
};

/// Full-scale skip fusion at decoder level l: concat -> conv -> relu -> conv.
template <class T>
struct DecoderStage {
    int level = 0;
    std::vector<MaxPool<T>> pools;    ///< one per shallower encoder level
    std::vector<BilinearUp<T>> ups;   ///< one per deeper decoder level
    std::vector<int> widths;          ///< channel widths in concat order
    Conv2d<T> conv1, conv2;
    ReLU<T> relu;
};

/// Encoder of L denoise blocks with 2x2 max pooling between them, a
/// bottleneck block at the deepest resolution, L-1 decoder stages and a
/// linear 1x1 head.
template <class T>
class DenoiserNet {
public:
    DenoiserNet() = default;
    explicit DenoiserNet(const NetConfig& cfg) : cfg_(cfg) {
        cfg.validate();
        const int L = cfg.levels;
        for (int l = 0; l < L; ++l) {
            const int in_c = l == 0 ? cfg.in_channels : cfg.width(l - 1);
            encoder_.emplace_back("enc" + std::to_string(l), in_c, cfg.width(l), cfg.convs_per_block,
                                  cfg.kernel, cfg.batchnorm);
            if (l > 0) enc_pools_.emplace_back(2);
        }
        bottleneck_ = DenoiseBlock<T>("bottleneck", cfg.width(L - 1), cfg.width(L - 1), cfg.convs_per_block,
                                      cfg.kernel, cfg.batchnorm);
        decoder_.resize(L - 1);
        for (int l = L - 2; l >= 0; --l) {
            DecoderStage<T>& st = decoder_[l];
            st.level = l;
            st.widths.push_back(cfg.width(l));
            for (int j = 0; j < l; ++j) {
                st.pools.emplace_back(1 << (l - j));
                st.widths.push_back(cfg.width(j));
            }
            for (int j = l + 1; j < L; ++j) {
                st.ups.emplace_back(1 << (j - l));
                st.widths.push_back(decoded_width(j));
            }
            int cin = 0;
            for (int w : st.widths) cin += w;
            const std::string name = "dec" + std::to_string(l);
            st.conv1 = Conv2d<T>(name + ".conv1", cin, cfg.width(l), cfg.kernel);
            st.conv2 = Conv2d<T>(name + ".conv2", cfg.width(l), cfg.width(l), cfg.kernel);
        }
        head_ = Conv2d<T>("head", cfg.width(0), cfg.out_channels, 1);
        collect();
    }

    DenoiserNet(const DenoiserNet& o) {
        if (o.params_.empty()) return;
        *this = DenoiserNet(o.cfg_);
        copy_state_from(o);
    }
    DenoiserNet& operator=(const DenoiserNet& o) {
        if (this != &o) {
            DenoiserNet tmp(o);
            *this = std::move(tmp);
        }
        return *this;
    }
    DenoiserNet(DenoiserNet&& o) noexcept { *this = std::move(o); }
    DenoiserNet& operator=(DenoiserNet&& o) noexcept {
        cfg_ = o.cfg_;
        encoder_ = std::move(o.encoder_);
        enc_pools_ = std::move(o.enc_pools_);
        bottleneck_ = std::move(o.bottleneck_);
        decoder_ = std::move(o.decoder_);
        head_ = std::move(o.head_);
        collect();
        o.params_.clear();
        o.buffers_.clear();
        return *this;
    }

    const NetConfig& config() const { return cfg_; }

    /// Kaiming-uniform convs, zero biases, zero final conv in every denoise
    /// block, then optionally the identity path.
    void init(std::uint64_t seed, bool identity = true) {
        Rng rng(derive_seed(seed, 0, Stream::init));
        auto block_init = [&](DenoiseBlock<T>& b) {
            b.align.init_kaiming(rng);
            for (std::size_t j = 0; j < b.residual.size(); ++j) {
                if (j + 1 < b.residual.size())
                    b.residual[j].init_kaiming(rng);
                else
                    b.residual[j].zero_init();
            }
        };
        for (auto& b : encoder_) block_init(b);
        block_init(bottleneck_);
        for (auto& st : decoder_) {
            st.conv1.init_kaiming(rng);
            st.conv2.init_kaiming(rng);
        }
        head_.init_kaiming(rng);
        if (identity) identity_path();
    }

    /// Rewires a few level-0 channels so the untrained net maps its input to
    /// itself: enc0 copies the input into its first channels, dec0 passes
    /// them through the ReLU as a (+x, -x) pair and recombines them, and the
    /// head selects the result. All other weights keep their random values.
    void identity_path() {
        const int c = cfg_.in_channels;
        if (c != cfg_.out_channels || cfg_.width(0) < 2 * c) return;
        DecoderStage<T>& st = decoder_[0];
        head_.zero_init();
        for (int k = 0; k < c; ++k) {
            encoder_[0].align.zero_output(k);
            encoder_[0].align.set_tap(k, k, T(1));
            st.conv1.zero_output(2 * k);
            st.conv1.zero_output(2 * k + 1);
            st.conv1.set_tap(2 * k, k, T(1));
            st.conv1.set_tap(2 * k + 1, k, T(-1));
            st.conv2.zero_output(k);
            st.conv2.set_tap(k, 2 * k, T(1));
            st.conv2.set_tap(k, 2 * k + 1, T(-1));
            head_.set_tap(k, k, T(1));
        }
    }

    void check_input(const Tensor4<T>& x) const {
        if (x.c != cfg_.in_channels)
            throw ShapeError("net expects " + std::to_string(cfg_.in_channels) + " input channels, got " +
                             std::to_string(x.c));
        const int d = cfg_.divisor();
        if (x.h % d != 0 || x.w % d != 0) {
            const int ph = (d - x.h % d) % d, pw = (d - x.w % d) % d;
            throw ShapeError("input " + std::to_string(x.h) + "x" + std::to_string(x.w) +
                             " is not divisible by " + std::to_string(d) + "; pad by " + std::to_string(ph) +
                             " rows and " + std::to_string(pw) + " columns");
        }
    }

    Tensor4<T> forward(const Tensor4<T>& x, bool train) {
        check_input(x);
        const int L = cfg_.levels;
        enc_out_.clear();
        Tensor4<T> h = x;
        for (int l = 0; l < L; ++l) {
            if (l > 0) h = enc_pools_[l - 1].forward(h);
            h = encoder_[l].forward(h, train);
            enc_out_.push_back(h);
        }
        dec_out_.assign(L, Tensor4<T>());
        dec_out_[L - 1] = bottleneck_.forward(enc_out_[L - 1], train);
        for (int l = L - 2; l >= 0; --l) {
            DecoderStage<T>& st = decoder_[l];
            std::vector<Tensor4<T>> resized;
            resized.reserve(L);
            for (int j = 0; j < l; ++j) resized.push_back(st.pools[j].forward(enc_out_[j]));
            for (int j = l + 1; j < L; ++j) resized.push_back(st.ups[j - l - 1].forward(dec_out_[j]));
            std::vector<const Tensor4<T>*> parts{&enc_out_[l]};
            for (const auto& t : resized) parts.push_back(&t);
            Tensor4<T> z = st.conv1.forward(concat(parts));
            z = st.relu.forward(z);
            dec_out_[l] = st.conv2.forward(z);
        }
        return head_.forward(dec_out_[0]);
    }

    /// Backpropagates dy through the most recent forward; accumulates
    /// parameter gradients and returns the input gradient.
    Tensor4<T> backward(const Tensor4<T>& dy) {
        const int L = cfg_.levels;
        std::vector<Tensor4<T>> d_dec(L), d_enc(L);
        for (int l = 0; l < L; ++l) {
            d_dec[l] = Tensor4<T>(dec_out_[l].n, dec_out_[l].c, dec_out_[l].h, dec_out_[l].w);
            d_enc[l] = Tensor4<T>(enc_out_[l].n, enc_out_[l].c, enc_out_[l].h, enc_out_[l].w);
        }
        d_dec[0] = head_.backward(dy);
        for (int l = 0; l <= L - 2; ++l) {
            DecoderStage<T>& st = decoder_[l];
            Tensor4<T> g = st.conv2.backward(d_dec[l]);
            g = st.relu.backward(g);
            g = st.conv1.backward(g);
            std::vector<Tensor4<T>> parts = split_channels(g, st.widths);
            add_into(d_enc[l], parts[0]);
            for (int j = 0; j < l; ++j) add_into(d_enc[j], st.pools[j].backward(parts[1 + j]));
            for (int j = l + 1; j < L; ++j) add_into(d_dec[j], st.ups[j - l - 1].backward(parts[j]));
        }
        add_into(d_enc[L - 1], bottleneck_.backward(d_dec[L - 1]));
        Tensor4<T> g;
        for (int l = L - 1; l >= 0; --l) {
            g = encoder_[l].backward(d_enc[l]);
            if (l > 0) add_into(d_enc[l - 1], enc_pools_[l - 1].backward(g));
        }
        return g;
    }

    std::vector<Param<T>*>& params() { return params_; }
    const std::vector<Param<T>*>& params() const { return params_; }
    /// Batch-norm running statistics in a fixed order.
    std::vector<std::vector<T>*>& buffers() { return buffers_; }
    const std::vector<std::vector<T>*>& buffers() const { return buffers_; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto* p : params_) n += p->size();
        return n;
    }

    void zero_grad() {
        for (auto* p : params_) p->zero_grad();
    }

    /// Hash of every ReLU mask and pooling argmax from the last forward.
    /// Changes exactly when a perturbation crosses a non-smooth point.
    std::uint64_t activation_signature() const {
        std::uint64_t h = 1469598103934665603ULL;
        auto mix = [&h](std::uint64_t v) { h = (h ^ v) * 1099511628211ULL; };
        auto block = [&](const DenoiseBlock<T>& b) {
            for (const auto& r : b.relus)
                for (auto m : r.mask()) mix(m);
        };
        for (const auto& b : encoder_) block(b);
        block(bottleneck_);
        for (const auto& p : enc_pools_)
            for (auto a : p.argmax()) mix(a);
        for (const auto& st : decoder_) {
            for (auto m : st.relu.mask()) mix(m);
            for (const auto& p : st.pools)
                for (auto a : p.argmax()) mix(a);
        }
        return h;
    }

    /// Conv layers in wiring order, for cost accounting.
    std::vector<const Conv2d<T>*> convs() const {
        std::vector<const Conv2d<T>*> out;
        auto block = [&](const DenoiseBlock<T>& b) {
            out.push_back(&b.align);
            for (const auto& c : b.residual) out.push_back(&c);
        };
        for (const auto& b : encoder_) block(b);
        block(bottleneck_);
        for (int l = cfg_.levels - 2; l >= 0; --l) {
            out.push_back(&decoder_[l].conv1);
            out.push_back(&decoder_[l].conv2);
        }
        out.push_back(&head_);
        return out;
    }

    const DenoiseBlock<T>& encoder_block(int l) const { return encoder_.at(l); }
    DenoiseBlock<T>& encoder_block(int l) { return encoder_.at(l); }
    const DenoiseBlock<T>& bottleneck() const { return bottleneck_; }
    const DecoderStage<T>& decoder_stage(int l) const { return decoder_.at(l); }
    /// Output of every encoder level and decoder level (bottleneck at L-1) from the last forward.
    const std::vector<Tensor4<T>>& encoder_outputs() const { return enc_out_; }
    const std::vector<Tensor4<T>>& decoder_outputs() const { return dec_out_; }

    /// Copies parameters and buffers from a net of the same config, any precision.
    template <class U>
    void copy_state_from(const DenoiserNet<U>& o) {
        if (!(o.config() == cfg_)) throw ConfigError("cannot copy state between different net configs");
        for (std::size_t i = 0; i < params_.size(); ++i) {
            const auto& src = o.params()[i]->value;
            std::transform(src.begin(), src.end(), params_[i]->value.begin(),
                           [](U v) { return static_cast<T>(v); });
        }
        for (std::size_t i = 0; i < buffers_.size(); ++i) {
            const auto& src = *o.buffers()[i];
            std::transform(src.begin(), src.end(), buffers_[i]->begin(), [](U v) { return static_cast<T>(v); });
        }
    }

private:
    int decoded_width(int level) const { return cfg_.width(level); }

    void collect() {
        params_.clear();
        buffers_.clear();
        auto conv = [&](Conv2d<T>& c) {
            params_.push_back(&c.weight);
            params_.push_back(&c.bias);
        };
        auto block = [&](DenoiseBlock<T>& b) {
            conv(b.align);
            for (std::size_t j = 0; j < b.residual.size(); ++j) {
                conv(b.residual[j]);
                if (j < b.norms.size()) {
                    params_.push_back(&b.norms[j].gamma);
                    params_.push_back(&b.norms[j].beta);
                    buffers_.push_back(&b.norms[j].running_mean);
                    buffers_.push_back(&b.norms[j].running_var);
                }
            }
        };
        for (auto& b : encoder_) block(b);
        block(bottleneck_);
        for (int l = cfg_.levels - 2; l >= 0; --l) {
            conv(decoder_[l].conv1);
            conv(decoder_[l].conv2);
        }
        conv(head_);
    }

    NetConfig cfg_;
    std::vector<DenoiseBlock<T>> encoder_;
    std::vector<MaxPool<T>> enc_pools_;
    DenoiseBlock<T> bottleneck_;
    std::vector<DecoderStage<T>> decoder_;
    Conv2d<T> head_;
    std::vector<Tensor4<T>> enc_out_, dec_out_;
    std::vector<Param<T>*> params_;
    std::vector<std::vector<T>*> buffers_;
};

} // namespace riscest::nn
