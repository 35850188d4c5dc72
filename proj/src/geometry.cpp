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
#include "riscest/geometry.hpp"

#include <cmath>
#include <string>

namespace riscest {

void ArrayGeometry::validate() const {
    if (n_h < 1 || n_v < 1)
        throw ArgumentError("array geometry needs at least one element per axis, got " +
                            std::to_string(n_h) + "x" + std::to_string(n_v));
    if (!(d_h > 0.0) || !(d_v > 0.0))
        throw ArgumentError("array spacings must be positive");
    if (!(wavelength > 0.0))
        throw ArgumentError("wavelength must be positive");
}

ArrayGeometry ArrayGeometry::with_spacing(int n_h, int n_v, double wavelength,
                                          double spacing_h_wl, double spacing_v_wl) {
    ArrayGeometry g{n_h, n_v, spacing_h_wl * wavelength, spacing_v_wl * wavelength, wavelength};
    g.validate();
    return g;
}

void Direction::validate() const {
    constexpr double half_pi = kPi / 2.0;
    if (!(std::abs(azimuth) <= half_pi) || !(std::abs(elevation) <= half_pi))
        throw ArgumentError("direction angles must lie in [-pi/2, pi/2]");
}

double wavelength_for(double carrier_hz) {
    if (!(carrier_hz > 0.0)) throw ArgumentError("carrier frequency must be positive");
    return kSpeedOfLight / carrier_hz;
}

Eigen::Vector3d element_position(const ArrayGeometry& geom, int n) {
    if (n < 1 || n > geom.size())
        throw std::out_of_range("element index " + std::to_string(n) + " outside 1.." +
                                std::to_string(geom.size()));
    const int alpha = (n - 1) % geom.n_h;
    const int gamma = (n - 1) / geom.n_h;
    return {0.0, alpha * geom.d_h, gamma * geom.d_v};
}

Eigen::Vector3d wave_vector(const Direction& dir, double wavelength) {
    dir.validate();
    const double k = 2.0 * kPi / wavelength;
    const double ce = std::cos(dir.elevation);
    return {k * ce * std::cos(dir.azimuth), k * ce * std::sin(dir.azimuth),
            k * std::sin(dir.elevation)};
}

CVector array_response(const ArrayGeometry& geom, const Direction& dir, ResponseForm form) {
    geom.validate();
    const Eigen::Vector3d w = wave_vector(dir, geom.wavelength);
    const double k = 2.0 * kPi / geom.wavelength;
    // Only the y and z components of the positions are non-zero.
    const double step_h = w.y() * geom.d_h;
    const double step_v =
        form == ResponseForm::wave_vector ? w.z() * geom.d_v : k * std::sin(dir.azimuth) * geom.d_v;

    const int total = geom.size();
    const double scale = 1.0 / std::sqrt(static_cast<double>(total));
    CVector a(total);
    for (int i = 0; i < total; ++i) {
        const int alpha = i % geom.n_h;
        const int gamma = i / geom.n_h;
        a[i] = std::polar(scale, alpha * step_h + gamma * step_v);
    }
    return a;
}

} // namespace riscest
