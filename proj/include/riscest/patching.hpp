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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "riscest/common.hpp"

namespace riscest {

/// Real/imaginary plane encoding of a complex H x W matrix, laid out
/// [plane, row, col] row-major.
struct Planes {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    double at(int plane, int row, int col) const {
        return values[(static_cast<std::size_t>(plane) * height + row) * width + col];
    }
};

Planes complex_to_planes(const CMatrix& a);
CMatrix planes_to_complex(const Planes& p);

struct PatchSpec {
    int p_x = 1;  ///< width along the RIS axis (columns)
    int p_y = 1;  ///< height along the antenna axis (rows)
    std::size_t total_patches = 1;
    std::uint64_t seed = 0;
    /// Global index of the first sample, so a dataset can be extracted in
    /// chunks with the same streams and provenance as in one call.
    std::size_t first_sample = 0;
};

/// Where a patch came from: sample index and top-left offsets.
struct PatchOrigin {
    std::size_t sample = 0;
    int x = 0;  ///< column offset
    int y = 0;  ///< row offset

    bool operator==(const PatchOrigin&) const = default;
};

/// Paired input / label patches, each stored [patch, plane, row, col] as f32.
struct PatchDataset {
    std::size_t count = 0;
    int p_y = 0;
    int p_x = 0;
    std::vector<float> data;
    std::vector<float> labels;
    std::vector<PatchOrigin> origins;
    /// Generation metadata (config snapshot, seeds, SNR range, ...).
    std::map<std::string, std::string> meta;

    std::size_t patch_values() const { return 2 * static_cast<std::size_t>(p_y) * p_x; }
    std::span<const float> input(std::size_t i) const {
        return {data.data() + i * patch_values(), patch_values()};
    }
    std::span<const float> label(std::size_t i) const {
        return {labels.data() + i * patch_values(), patch_values()};
    }
    /// Appends one pair of complex patches of the dataset's shape.
    void append(const CMatrix& input, const CMatrix& label, PatchOrigin origin);
    CMatrix input_matrix(std::size_t i) const;
    CMatrix label_matrix(std::size_t i) const;
};

/// Random patch extraction. Each sample gives total_patches / len(X)
/// patches with offsets x ~ U{0..N-p_x}, y ~ U{0..M-p_y}; sample i draws
/// from derive_seed(spec.seed, first_sample + i, Stream::patches). Output is sample-major.
PatchDataset extract_patches(std::span<const CMatrix> inputs, std::span<const CMatrix> labels,
                             const PatchSpec& spec);

/// Row-major reshape of an M-vector onto the BS grid: entry m goes to
/// (row gamma_m, col alpha_m), giving an m_v x m_h matrix.
CMatrix reshape_direct(const CVector& b, int m_h, int m_v);
CVector flatten_direct(const CMatrix& grid);

inline constexpr std::uint32_t kDatasetVersion = 1;

void serialize_dataset(const PatchDataset& ds, const std::filesystem::path& path);
PatchDataset deserialize_dataset(const std::filesystem::path& path);

/// In-memory forms of the container, used by the file functions.
std::string encode_dataset(const PatchDataset& ds);
PatchDataset decode_dataset(std::string_view bytes);

} // namespace riscest
