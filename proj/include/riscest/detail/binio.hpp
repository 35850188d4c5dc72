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

// Little-endian primitives and the flat key=value header shared by the
// dataset and checkpoint containers.

#include <bit>
#include <cstdint>
#include <cstring>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "riscest/common.hpp"

namespace riscest::detail {

using Header = std::map<std::string, std::string>;

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

inline void put_f32s(std::string& out, std::span<const float> values) {
    out.reserve(out.size() + 4 * values.size());
    for (float f : values) put_f32(out, f);
}

inline std::uint32_t get_u32(std::string_view in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

inline float get_f32(std::string_view in, std::size_t at) {
    return std::bit_cast<float>(get_u32(in, at));
}

std::string encode_header(const Header& header);
Header decode_header(std::string_view text);

/// Writes magic | version | header length | header.
void put_preamble(std::string& out, std::string_view magic, std::uint32_t version,
                  const Header& header);

struct Preamble {
    Header header;
    std::size_t payload_offset = 0;
};

/// Validates magic and version, then parses the header.
Preamble read_preamble(std::string_view bytes, std::string_view magic, std::uint32_t version);

const std::string& require_key(const Header& header, const std::string& key);
long long require_int(const Header& header, const std::string& key);
double require_double(const Header& header, const std::string& key);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

} // namespace riscest::detail
