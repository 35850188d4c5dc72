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

#include <Eigen/Dense>

#include "riscest/common.hpp"

namespace riscest {

/// Uniform planar array in the YZ plane. Elements are numbered row by row:
/// the horizontal index runs fastest.
struct ArrayGeometry {
    int n_h = 1;              ///< elements per row (horizontal)
    int n_v = 1;              ///< rows (vertical)
    double d_h = 0.0;         ///< horizontal spacing [m]
    double d_v = 0.0;         ///< vertical spacing [m]
    double wavelength = 0.0;  ///< carrier wavelength [m]

    int size() const { return n_h * n_v; }
    void validate() const;

    /// Array with spacings given in wavelengths.
    static ArrayGeometry with_spacing(int n_h, int n_v, double wavelength, double spacing_h_wl,
                                      double spacing_v_wl);
};

/// Azimuth and elevation, both within [-pi/2, pi/2].
struct Direction {
    double azimuth = 0.0;
    double elevation = 0.0;

    void validate() const;
};

/// Phase law used by array_response. `wave_vector` evaluates exp(j w^T d_n)
/// with the full wave vector. `azimuth_vertical` uses sin(azimuth) in the
/// vertical term of the closed-form UPA response instead of sin(elevation).
enum class ResponseForm { wave_vector, azimuth_vertical };

double wavelength_for(double carrier_hz);

/// Position of element n (1-based) as [0, alpha*d_h, gamma*d_v].
Eigen::Vector3d element_position(const ArrayGeometry& geom, int n);

/// (2 pi / lambda) [cos(el) cos(az), cos(el) sin(az), sin(el)].
Eigen::Vector3d wave_vector(const Direction& dir, double wavelength);

/// Normalised steering vector, every entry has modulus 1/sqrt(n_h n_v).
CVector array_response(const ArrayGeometry& geom, const Direction& dir,
                       ResponseForm form = ResponseForm::wave_vector);

} // namespace riscest
