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
#include "riscest/patching.hpp"

#include <sstream>

#include "riscest/detail/binio.hpp"
#include "riscest/rng.hpp"

namespace riscest {

namespace {

constexpr std::string_view kMagic = "RCDS";
constexpr const char* kMetaPrefix = "meta.";

void write_patch(std::vector<float>& out, const CMatrix& a) {
    for (int plane = 0; plane < 2; ++plane)
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            for (Eigen::Index c = 0; c < a.cols(); ++c) {
                const cdouble v = a(r, c);
                out.push_back(static_cast<float>(plane == 0 ? v.real() : v.imag()));
            }
}

CMatrix read_patch(std::span<const float> values, int rows, int cols) {
    CMatrix a(rows, cols);
    const std::size_t plane = static_cast<std::size_t>(rows) * cols;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const std::size_t k = static_cast<std::size_t>(r) * cols + c;
            a(r, c) = {values[k], values[plane + k]};
        }
    return a;
}

std::string encode_origins(const std::vector<PatchOrigin>& origins) {
    std::ostringstream os;
    for (std::size_t i = 0; i < origins.size(); ++i) {
        if (i) os << ';';
        os << origins[i].sample << ':' << origins[i].x << ':' << origins[i].y;
    }
    return os.str();
}

std::vector<PatchOrigin> decode_origins(const std::string& text, std::size_t count) {
    std::vector<PatchOrigin> out;
    if (text.empty()) {
        if (count) throw IntegrityError("origins list is empty");
        return out;
    }
    out.reserve(count);
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ';')) {
        PatchOrigin o;
        char c1 = 0, c2 = 0;
        std::istringstream it(item);
        if (!(it >> o.sample >> c1 >> o.x >> c2 >> o.y) || c1 != ':' || c2 != ':')
            throw IntegrityError("malformed origin entry: " + item);
        out.push_back(o);
    }
    if (out.size() != count)
        throw IntegrityError("origins list has " + std::to_string(out.size()) + " entries, expected " +
                             std::to_string(count));
    return out;
}

} // namespace

Planes complex_to_planes(const CMatrix& a) {
    Planes p;
    p.height = static_cast<int>(a.rows());
    p.width = static_cast<int>(a.cols());
    p.values.resize(2 * a.size());
    const std::size_t plane = static_cast<std::size_t>(a.size());
    for (int r = 0; r < p.height; ++r)
        for (int c = 0; c < p.width; ++c) {
            const std::size_t k = static_cast<std::size_t>(r) * p.width + c;
            p.values[k] = a(r, c).real();
            p.values[plane + k] = a(r, c).imag();
        }
    return p;
}

CMatrix planes_to_complex(const Planes& p) {
    const std::size_t plane = static_cast<std::size_t>(p.height) * p.width;
    if (p.values.size() != 2 * plane) throw ShapeError("planes buffer does not match 2 x H x W");
    CMatrix a(p.height, p.width);
    for (int r = 0; r < p.height; ++r)
        for (int c = 0; c < p.width; ++c) {
            const std::size_t k = static_cast<std::size_t>(r) * p.width + c;
            a(r, c) = {p.values[k], p.values[plane + k]};
        }
    return a;
}

void PatchDataset::append(const CMatrix& input, const CMatrix& label, PatchOrigin origin) {
    if (input.rows() != p_y || input.cols() != p_x || label.rows() != p_y || label.cols() != p_x)
        throw ShapeError("patch must be " + std::to_string(p_y) + "x" + std::to_string(p_x));
    write_patch(data, input);
    write_patch(labels, label);
    origins.push_back(origin);
    ++count;
}

CMatrix PatchDataset::input_matrix(std::size_t i) const {
    if (i >= count) throw std::out_of_range("patch index");
    return read_patch(input(i), p_y, p_x);
}

CMatrix PatchDataset::label_matrix(std::size_t i) const {
    if (i >= count) throw std::out_of_range("patch index");
    return read_patch(label(i), p_y, p_x);
}

PatchDataset extract_patches(std::span<const CMatrix> inputs, std::span<const CMatrix> labels,
                             const PatchSpec& spec) {
    if (inputs.size() != labels.size()) throw ShapeError("inputs and labels differ in count");
    if (inputs.empty()) throw ArgumentError("no samples to patch");
    if (spec.p_x < 1 || spec.p_y < 1) throw ConfigError("patch size must be positive");
    if (spec.total_patches % inputs.size() != 0)
        throw ConfigError("total_patches (" + std::to_string(spec.total_patches) +
                          ") is not a multiple of the sample count (" +
                          std::to_string(inputs.size()) + ")");
    const std::size_t per_sample = spec.total_patches / inputs.size();

    PatchDataset ds;
    ds.p_x = spec.p_x;
    ds.p_y = spec.p_y;
    ds.data.reserve(spec.total_patches * ds.patch_values());
    ds.labels.reserve(spec.total_patches * ds.patch_values());
    ds.origins.reserve(spec.total_patches);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const CMatrix& x = inputs[i];
        const CMatrix& y = labels[i];
        if (x.rows() != y.rows() || x.cols() != y.cols())
            throw ShapeError("sample " + std::to_string(i) + ": input and label shapes differ");
        if (spec.p_y > x.rows() || spec.p_x > x.cols())
            throw ShapeError("patch " + std::to_string(spec.p_y) + "x" + std::to_string(spec.p_x) +
                             " exceeds sample " + std::to_string(x.rows()) + "x" +
                             std::to_string(x.cols()));
        const std::size_t global = spec.first_sample + i;
        Rng rng(derive_seed(spec.seed, global, Stream::patches));
        for (std::size_t j = 0; j < per_sample; ++j) {
            const int ox = static_cast<int>(rng.uniform_int(0, x.cols() - spec.p_x));
            const int oy = static_cast<int>(rng.uniform_int(0, x.rows() - spec.p_y));
            ds.append(x.block(oy, ox, spec.p_y, spec.p_x), y.block(oy, ox, spec.p_y, spec.p_x),
                      {global, ox, oy});
        }
    }
    return ds;
}

CMatrix reshape_direct(const CVector& b, int m_h, int m_v) {
    if (m_h < 1 || m_v < 1 || static_cast<Eigen::Index>(m_h) * m_v != b.size())
        throw ShapeError("cannot reshape a length-" + std::to_string(b.size()) + " vector to " +
                         std::to_string(m_v) + "x" + std::to_string(m_h));
    CMatrix grid(m_v, m_h);
    for (int r = 0; r < m_v; ++r)
        for (int c = 0; c < m_h; ++c) grid(r, c) = b[static_cast<Eigen::Index>(r) * m_h + c];
    return grid;
}

CVector flatten_direct(const CMatrix& grid) {
    CVector b(grid.size());
    for (Eigen::Index r = 0; r < grid.rows(); ++r)
        for (Eigen::Index c = 0; c < grid.cols(); ++c) b[r * grid.cols() + c] = grid(r, c);
    return b;
}

std::string encode_dataset(const PatchDataset& ds) {
    const std::size_t n = ds.count * ds.patch_values();
    if (ds.data.size() != n || ds.labels.size() != n || ds.origins.size() != ds.count)
        throw ShapeError("dataset buffers disagree with count");
    detail::Header h;
    for (const auto& [k, v] : ds.meta) h[kMetaPrefix + k] = v;
    h["count"] = std::to_string(ds.count);
    h["channels"] = "2";
    h["p_y"] = std::to_string(ds.p_y);
    h["p_x"] = std::to_string(ds.p_x);
    h["dtype"] = "f32le";
    h["origins"] = encode_origins(ds.origins);
    h["payload_bytes"] = std::to_string(2 * 4 * n);

    std::string out;
    detail::put_preamble(out, kMagic, kDatasetVersion, h);
    detail::put_f32s(out, ds.data);
    detail::put_f32s(out, ds.labels);
    return out;
}

PatchDataset decode_dataset(std::string_view bytes) {
    const detail::Preamble pre = detail::read_preamble(bytes, kMagic, kDatasetVersion);
    const auto& h = pre.header;
    PatchDataset ds;
    const long long count = detail::require_int(h, "count");
    ds.p_y = static_cast<int>(detail::require_int(h, "p_y"));
    ds.p_x = static_cast<int>(detail::require_int(h, "p_x"));
    if (count < 0 || ds.p_y < 1 || ds.p_x < 1 || detail::require_int(h, "channels") != 2)
        throw IntegrityError("dataset header has invalid dimensions");
    if (detail::require_key(h, "dtype") != "f32le") throw IntegrityError("unsupported dtype");
    ds.count = static_cast<std::size_t>(count);

    const std::size_t n = ds.count * ds.patch_values();
    const long long declared = detail::require_int(h, "payload_bytes");
    if (declared < 0 || static_cast<std::size_t>(declared) != 2 * 4 * n)
        throw IntegrityError("header declares " + std::to_string(declared) + " payload bytes but " +
                             std::to_string(ds.count) + " patches need " + std::to_string(2 * 4 * n));
    const std::size_t payload = bytes.size() - pre.payload_offset;
    if (payload < 2 * 4 * n)
        throw TruncatedError("payload has " + std::to_string(payload) + " of " +
                             std::to_string(2 * 4 * n) + " bytes");
    if (payload > 2 * 4 * n)
        throw IntegrityError(std::to_string(payload - 2 * 4 * n) + " trailing bytes after payload");
    ds.data.resize(n);
    ds.labels.resize(n);
    std::size_t at = pre.payload_offset;
    for (std::size_t i = 0; i < n; ++i, at += 4) ds.data[i] = detail::get_f32(bytes, at);
    for (std::size_t i = 0; i < n; ++i, at += 4) ds.labels[i] = detail::get_f32(bytes, at);
    ds.origins = decode_origins(detail::require_key(h, "origins"), ds.count);

    const std::string prefix = kMetaPrefix;
    for (const auto& [k, v] : h)
        if (k.starts_with(prefix)) ds.meta[k.substr(prefix.size())] = v;
    return ds;
}

void serialize_dataset(const PatchDataset& ds, const std::filesystem::path& path) {
    detail::write_file(path.string(), encode_dataset(ds));
}

PatchDataset deserialize_dataset(const std::filesystem::path& path) {
    return decode_dataset(detail::read_file(path.string()));
}

} // namespace riscest
