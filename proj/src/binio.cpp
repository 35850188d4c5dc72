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
#include "riscest/detail/binio.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace riscest::detail {

std::string encode_header(const Header& header) {
    std::string text;
    for (const auto& [key, value] : header) {
        if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos)
            throw ArgumentError("header entry '" + key + "' contains a reserved character");
        text += key;
        text += '=';
        text += value;
        text += '\n';
    }
    return text;
}

Header decode_header(std::string_view text) {
    Header header;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw IntegrityError("malformed header line: " + std::string(line.substr(0, 40)));
        header.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    }
    return header;
}

void put_preamble(std::string& out, std::string_view magic, std::uint32_t version,
                  const Header& header) {
    const std::string text = encode_header(header);
    out.append(magic);
    put_u32(out, version);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out += text;
}

Preamble read_preamble(std::string_view bytes, std::string_view magic, std::uint32_t version) {
    if (bytes.size() < magic.size() || bytes.substr(0, magic.size()) != magic)
        throw BadMagicError("bad magic: expected '" + std::string(magic) + "'");
    const std::size_t fixed = magic.size() + 8;
    if (bytes.size() < fixed) throw TruncatedError("file ends inside the preamble");
    const std::uint32_t found = get_u32(bytes, magic.size());
    if (found != version)
        throw VersionMismatchError("unsupported format version " + std::to_string(found) +
                                   " (expected " + std::to_string(version) + ")");
    const std::uint32_t header_len = get_u32(bytes, magic.size() + 4);
    if (bytes.size() < fixed + header_len) throw TruncatedError("file ends inside the header");
    Preamble p;
    p.header = decode_header(bytes.substr(fixed, header_len));
    p.payload_offset = fixed + header_len;
    return p;
}

const std::string& require_key(const Header& header, const std::string& key) {
    const auto it = header.find(key);
    if (it == header.end()) throw IntegrityError("header is missing key '" + key + "'");
    return it->second;
}

long long require_int(const Header& header, const std::string& key) {
    const std::string& v = require_key(header, key);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw IntegrityError("header key '" + key + "' is not an integer: " + v);
    return out;
}

double require_double(const Header& header, const std::string& key) {
    const std::string& v = require_key(header, key);
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw IntegrityError("header key '" + key + "' is not a number: " + v);
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_file(const std::string& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

} // namespace riscest::detail
