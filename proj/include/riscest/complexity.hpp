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

// Multiply-accumulate counts per sample (batch excluded). One MAC is one
// multiply plus one add; FLOPs are twice these numbers.

#include <cstdint>
#include <string>
#include <vector>

#include "riscest/nn/net.hpp"

namespace riscest {

enum class Section { encoder, bottleneck, decoder };

struct LayerCost {
    std::string name;
    Section section = Section::encoder;
    int level = 0;
    int height = 0, width = 0;
    int c_in = 0, c_out = 0, kernel = 1;
    std::uint64_t macs = 0;
};

struct CostBreakdown {
    std::uint64_t encoder_cost = 0;
    std::uint64_t bottleneck_cost = 0;
    std::uint64_t decoder_cost = 0;
    std::uint64_t total = 0;
    /// MACs spent in 1x1 alignment convs; already included in the sections.
    std::uint64_t alignment_cost = 0;
    std::vector<LayerCost> layers;
};

/// H W C_in C_out K^2.
std::uint64_t conv_cost(std::uint64_t h, std::uint64_t w, std::uint64_t c_in, std::uint64_t c_out,
                        std::uint64_t k);

/// Dominant-term model: encoder H0 W0 C0^2 K^2 L, bottleneck H0 W0 C0^2 K^2,
/// decoder H0 W0 C0^2 K^2 L^2.
CostBreakdown closed_form_cost(std::uint64_t h0, std::uint64_t w0, std::uint64_t c0, std::uint64_t k,
                               std::uint64_t levels);

/// Counts every conv of the wiring graph at its level's resolution
/// H_l = H0 / 2^l. Depends only on shapes, never on parameter values.
template <class T>
CostBreakdown exact_layer_cost(const nn::DenoiserNet<T>& net, int h0, int w0) {
    const nn::NetConfig& cfg = net.config();
    const int d = cfg.divisor();
    if (h0 < 1 || w0 < 1 || h0 % d != 0 || w0 % d != 0)
        throw ShapeError("input " + std::to_string(h0) + "x" + std::to_string(w0) + " is not divisible by " +
                         std::to_string(d));
    CostBreakdown out;
    auto add = [&](const nn::Conv2d<T>& c, Section s, int level, bool align) {
        LayerCost lc;
        lc.name = c.weight.name.substr(0, c.weight.name.rfind('.'));
        lc.section = s;
        lc.level = level;
        lc.height = h0 >> level;
        lc.width = w0 >> level;
        lc.c_in = c.in_channels();
        lc.c_out = c.out_channels();
        lc.kernel = c.kernel();
        lc.macs = conv_cost(lc.height, lc.width, lc.c_in, lc.c_out, lc.kernel);
        if (align) out.alignment_cost += lc.macs;
        (s == Section::encoder ? out.encoder_cost : s == Section::bottleneck ? out.bottleneck_cost : out.decoder_cost) +=
            lc.macs;
        out.layers.push_back(lc);
    };
    auto block = [&](const nn::DenoiseBlock<T>& b, Section s, int level) {
        add(b.align, s, level, true);
        for (const auto& c : b.residual) add(c, s, level, false);
    };
    for (int l = 0; l < cfg.levels; ++l) block(net.encoder_block(l), Section::encoder, l);
    block(net.bottleneck(), Section::bottleneck, cfg.levels - 1);
    for (int l = cfg.levels - 2; l >= 0; --l) {
        add(net.decoder_stage(l).conv1, Section::decoder, l, false);
        add(net.decoder_stage(l).conv2, Section::decoder, l, false);
    }
    const auto convs = net.convs();
    add(*convs.back(), Section::decoder, 0, false);  // head
    out.total = out.encoder_cost + out.bottleneck_cost + out.decoder_cost;
    return out;
}

/// A lone layer is booked under the encoder section.
template <class T>
CostBreakdown exact_layer_cost(const nn::Conv2d<T>& conv, int h, int w) {
    CostBreakdown out;
    LayerCost lc;
    lc.name = conv.weight.name.substr(0, conv.weight.name.rfind('.'));
    lc.height = h;
    lc.width = w;
    lc.c_in = conv.in_channels();
    lc.c_out = conv.out_channels();
    lc.kernel = conv.kernel();
    lc.macs = conv_cost(h, w, lc.c_in, lc.c_out, lc.kernel);
    out.encoder_cost = out.total = lc.macs;
    if (lc.kernel == 1) out.alignment_cost = lc.macs;
    out.layers.push_back(lc);
    return out;
}

const char* section_name(Section s);

/// section,level,layer,height,width,c_in,c_out,kernel,macs rows, then totals.
std::string cost_csv(const CostBreakdown& c);
/// Aligned human-readable table.
std::string cost_table(const CostBreakdown& c);

} // namespace riscest
