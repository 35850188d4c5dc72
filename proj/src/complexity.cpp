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
#include "riscest/complexity.hpp"

#include <cstdio>

namespace riscest {

std::uint64_t conv_cost(std::uint64_t h, std::uint64_t w, std::uint64_t c_in, std::uint64_t c_out,
                        std::uint64_t k) {
    return h * w * c_in * c_out * k * k;
}

CostBreakdown closed_form_cost(std::uint64_t h0, std::uint64_t w0, std::uint64_t c0, std::uint64_t k,
                               std::uint64_t levels) {
    if (h0 == 0 || w0 == 0 || c0 == 0 || k == 0 || levels == 0)
        throw ArgumentError("closed_form_cost needs positive arguments");
    const std::uint64_t div = std::uint64_t{1} << (levels - 1);
    if (h0 % div != 0 || w0 % div != 0)
        throw ArgumentError("H0 and W0 must be divisible by 2^(L-1)");
    const std::uint64_t base = h0 * w0 * c0 * c0 * k * k;
    CostBreakdown c;
    c.encoder_cost = base * levels;
    c.bottleneck_cost = base;
    c.decoder_cost = base * levels * levels;
    c.total = c.encoder_cost + c.bottleneck_cost + c.decoder_cost;
    return c;
}

const char* section_name(Section s) {
    switch (s) {
    case Section::encoder: return "encoder";
    case Section::bottleneck: return "bottleneck";
    case Section::decoder: return "decoder";
    }
    return "?";
}

std::string cost_csv(const CostBreakdown& c) {
    std::string out = "# unit: multiply-accumulates per sample\n";
    out += "section,level,layer,height,width,c_in,c_out,kernel,macs\n";
    for (const auto& l : c.layers) {
        out += std::string(section_name(l.section)) + ',' + std::to_string(l.level) + ',' + l.name + ',' +
               std::to_string(l.height) + ',' + std::to_string(l.width) + ',' + std::to_string(l.c_in) + ',' +
               std::to_string(l.c_out) + ',' + std::to_string(l.kernel) + ',' + std::to_string(l.macs) + '\n';
    }
    out += "encoder,,total,,,,,," + std::to_string(c.encoder_cost) + '\n';
    out += "bottleneck,,total,,,,,," + std::to_string(c.bottleneck_cost) + '\n';
    out += "decoder,,total,,,,,," + std::to_string(c.decoder_cost) + '\n';
    out += "alignment,,total,,,,,," + std::to_string(c.alignment_cost) + '\n';
    out += "all,,total,,,,,," + std::to_string(c.total) + '\n';
    return out;
}

std::string cost_table(const CostBreakdown& c) {
    std::string out;
    char buf[200];
    if (!c.layers.empty()) {
        std::snprintf(buf, sizeof buf, "%-11s %5s %-18s %9s %11s %3s %15s\n", "section", "level", "layer", "HxW",
                      "Cin->Cout", "K", "MACs");
        out += buf;
        for (const auto& l : c.layers) {
            const std::string hw = std::to_string(l.height) + "x" + std::to_string(l.width);
            const std::string ch = std::to_string(l.c_in) + "->" + std::to_string(l.c_out);
            std::snprintf(buf, sizeof buf, "%-11s %5d %-18s %9s %11s %3d %15llu\n", section_name(l.section), l.level,
                          l.name.c_str(), hw.c_str(), ch.c_str(), l.kernel,
                          static_cast<unsigned long long>(l.macs));
            out += buf;
        }
        out += '\n';
    }
    const std::pair<const char*, std::uint64_t> rows[] = {{"encoder", c.encoder_cost},
                                                          {"bottleneck", c.bottleneck_cost},
                                                          {"decoder", c.decoder_cost},
                                                          {"(alignment)", c.alignment_cost},
                                                          {"total", c.total}};
    for (const auto& [name, v] : rows) {
        std::snprintf(buf, sizeof buf, "%-12s %18llu MACs\n", name, static_cast<unsigned long long>(v));
        out += buf;
    }
    return out;
}

} // namespace riscest
