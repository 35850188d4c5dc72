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

#include <cstddef>
#include <string>
#include <vector>

#include "riscest/common.hpp"

namespace riscest::nn {

/// Dense [batch, channels, height, width] tensor, row-major.
template <class T>
struct Tensor4 {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> data;

    Tensor4() = default;
    Tensor4(int n_, int c_, int h_, int w_, T fill = T(0))
        : n(n_), c(c_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {
        if (n_ < 1 || c_ < 1 || h_ < 1 || w_ < 1)
            throw ShapeError("tensor dims must be >= 1, got " + shape_string());
    }

    std::size_t size() const { return data.size(); }
    std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
    std::size_t sample_size() const { return static_cast<std::size_t>(c) * h * w; }

    std::size_t index(int in, int ic, int iy, int ix) const {
        return ((static_cast<std::size_t>(in) * c + ic) * h + iy) * w + ix;
    }
    T& operator()(int in, int ic, int iy, int ix) { return data[index(in, ic, iy, ix)]; }
    T operator()(int in, int ic, int iy, int ix) const { return data[index(in, ic, iy, ix)]; }

    T* sample(int in) { return data.data() + static_cast<std::size_t>(in) * sample_size(); }
    const T* sample(int in) const { return data.data() + static_cast<std::size_t>(in) * sample_size(); }

    bool same_shape(const Tensor4& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }

    std::string shape_string() const {
        return "[" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
               std::to_string(w) + "]";
    }
};

} // namespace riscest::nn
