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

#include "riscest/common.hpp"
#include "riscest/geometry.hpp"

namespace riscest {

/// Bessel function of the first kind, order zero. Maclaurin series (in
/// extended precision) below x = 12, Hankel asymptotic expansion above.
/// Absolute error below 1e-10 on [0, 100]. Negative arguments use J0(-x) = J0(x).
double bessel_j0(double x);

enum class ArraySide { ris, bs };

/// Real-symmetric correlation matrix with unit diagonal.
struct CorrelationMatrix {
    RMatrix entries;
    ArraySide side = ArraySide::ris;

    Eigen::Index dim() const { return entries.rows(); }
};

struct CorrelationConfig {
    double rho = 0.8;  ///< exponential correlation factor in [0, 1)
    ArrayGeometry bs;

    void validate() const;
};

/// R[n, n'] = J0(2 pi / lambda * |d_n - d_n'|).
CorrelationMatrix ris_correlation(const ArrayGeometry& geom);

/// Exponential Toeplitz factor T[i, j] = rho^|i - j|.
RMatrix exponential_toeplitz(int size, double rho);

/// Kronecker product of the per-axis exponential factors. The vertical factor
/// is the slow index so that entry (m, m') matches the row-by-row element
/// numbering of element_position.
CorrelationMatrix bs_correlation(const CorrelationConfig& cfg);

/// Hermitian square root U diag(sqrt(max(lambda, 0))) U^H.
/// Throws NotPsdError when the smallest eigenvalue is below -1e-6.
RMatrix psd_sqrt(const RMatrix& r);
CMatrix psd_sqrt(const CMatrix& r);
inline RMatrix psd_sqrt(const CorrelationMatrix& r) { return psd_sqrt(r.entries); }

} // namespace riscest
