// SPDX-License-Identifier: Apache-2.0
//
// chartlab - channel charting laboratory over a procedural urban twin
// Copyright (C) 2026 chartlab contributors
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

#include <vector>

#include <Eigen/Dense>

#include "chartlab/common.hpp"

namespace chartlab {

/// RSSI proxy of a covariance CSI sample: 10 log10(trace(C) / N_R) dB.
double rssi_of(const Eigen::MatrixXcd& covariance);

struct FingerprintConfig {
    double cell_size_m = 4.0;
    int k_f = 3;  // candidate cells blended by inverse RSSI gap; 1 = nearest
};

/// Grid fingerprint database: mean RSSI of the training samples that fell in
/// each populated cell. Cell indices are row-major over the training bounding
/// box and give the deterministic tie order.
struct FingerprintDb {
    Eigen::Vector2d origin{0, 0};
    double cell_size_m = 4.0;
    int nx = 0, ny = 0;

    struct Cell {
        int index = 0;
        Eigen::Vector2d center{0, 0};
        double mean_rssi = 0.0;
        int count = 0;
    };
    std::vector<Cell> cells;  // ascending index
};

FingerprintDb fingerprint_train(const std::vector<Eigen::Vector2d>& positions,
                                const std::vector<double>& rssi,
                                const FingerprintConfig& cfg);

/// Match by RSSI distance: the k_f closest cells (ties to the lower index)
/// vote with inverse-gap weights; an exact gap-0 match returns that cell's
/// center outright.
Eigen::Vector2d fingerprint_locate(const FingerprintDb& db, double rssi, int k_f);

struct MusicConfig {
    int assumed_sources = 1;            // P-hat
    double az_step_rad = kPi / 720.0;   // 0.25 degrees
    double delay_step_s = 1e-9;
};

/// MUSIC pseudo-spectrum over the boresight sector grid
/// boresight - pi/2 + g*step, g = 0..round(pi/step), at elevation 0:
/// spectrum(theta) = 1 / ||E_n^H a(theta)||^2 with E_n spanning the
/// N_R - P-hat weakest eigenvectors of the covariance.
/// The panel response at elevation 0 depends on azimuth only through
/// sin(az - boresight), so directions behind the panel alias onto the front
/// sector exactly; the grid covers the one half-plane where the response is
/// injective. grid_out, when given, receives the azimuth grid.
Eigen::VectorXd music_spectrum(const Eigen::MatrixXcd& covariance,
                               const MusicConfig& cfg, const ArrayConfig& array,
                               std::vector<double>* grid_out = nullptr);

struct MusicResult {
    bool localizable = false;
    double azimuth_rad = 0.0;
    double range_m = 0.0;
    double peak_gap_db = 0.0;  // peak over median, dB
    Eigen::Vector2d position{0, 0};
};

/// Single-anchor MUSIC localization: azimuth from the spectrum peak, range
/// from the quantized strongest-tap delay, position = BS + range *
/// (cos az, sin az). A peak less than 3 dB over the spectrum median marks the
/// sample unlocalizable.
MusicResult music_locate(const Eigen::MatrixXcd& covariance, const MusicConfig& cfg,
                         const ArrayConfig& array, const Eigen::Vector3d& bs_position,
                         double delay_s);

} // namespace chartlab
