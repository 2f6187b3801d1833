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

#include "chartlab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "chartlab/channel.hpp"

namespace chartlab {

double rssi_of(const Eigen::MatrixXcd& covariance) {
    if (covariance.rows() != covariance.cols() || covariance.rows() < 1)
        throw DataError("rssi_of requires a square covariance");
    const double tr = covariance.real().trace();
    if (!(tr > 0.0)) throw NumericalError("rssi_of requires positive covariance trace");
    return 10.0 * std::log10(tr / static_cast<double>(covariance.rows()));
}

FingerprintDb fingerprint_train(const std::vector<Eigen::Vector2d>& positions,
                                const std::vector<double>& rssi,
                                const FingerprintConfig& cfg) {
    if (positions.empty()) throw DataError("fingerprint_train requires samples");
    if (positions.size() != rssi.size())
        throw DataError("fingerprint_train input lengths differ");
    if (!(cfg.cell_size_m > 0.0)) throw ConfigError("cell size must be positive");

    FingerprintDb db;
    db.cell_size_m = cfg.cell_size_m;
    Eigen::Vector2d lo = positions[0], hi = positions[0];
    for (const Eigen::Vector2d& p : positions) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    db.origin = lo;
    db.nx = std::max(1, static_cast<int>(std::floor((hi.x() - lo.x()) / cfg.cell_size_m)) + 1);
    db.ny = std::max(1, static_cast<int>(std::floor((hi.y() - lo.y()) / cfg.cell_size_m)) + 1);

    std::map<int, std::pair<double, int>> acc;  // index -> (rssi sum, count)
    for (size_t i = 0; i < positions.size(); ++i) {
        int ix = static_cast<int>(std::floor((positions[i].x() - lo.x()) / cfg.cell_size_m));
        int iy = static_cast<int>(std::floor((positions[i].y() - lo.y()) / cfg.cell_size_m));
        ix = std::clamp(ix, 0, db.nx - 1);
        iy = std::clamp(iy, 0, db.ny - 1);
        auto& [sum, count] = acc[iy * db.nx + ix];
        sum += rssi[i];
        ++count;
    }
    db.cells.reserve(acc.size());
    for (const auto& [index, entry] : acc) {
        FingerprintDb::Cell cell;
        cell.index = index;
        cell.center = db.origin + cfg.cell_size_m *
                                      Eigen::Vector2d(index % db.nx + 0.5,
                                                      index / db.nx + 0.5);
        cell.mean_rssi = entry.first / entry.second;
        cell.count = entry.second;
        db.cells.push_back(cell);
    }
    return db;
}

Eigen::Vector2d fingerprint_locate(const FingerprintDb& db, double rssi, int k_f) {
    if (db.cells.empty()) throw DataError("fingerprint database is empty");
    if (k_f < 1) throw ConfigError("k_f must be >= 1");

    // Candidate order: RSSI gap ascending, cell index breaking ties.
    std::vector<int> order(db.cells.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ga = std::abs(db.cells[static_cast<size_t>(a)].mean_rssi - rssi);
        const double gb = std::abs(db.cells[static_cast<size_t>(b)].mean_rssi - rssi);
        if (ga != gb) return ga < gb;
        return db.cells[static_cast<size_t>(a)].index < db.cells[static_cast<size_t>(b)].index;
    });

    const size_t k = std::min<size_t>(static_cast<size_t>(k_f), order.size());
    const double best_gap = std::abs(db.cells[static_cast<size_t>(order[0])].mean_rssi - rssi);
    if (best_gap == 0.0 || k == 1) return db.cells[static_cast<size_t>(order[0])].center;

    double wsum = 0.0;
    Eigen::Vector2d pos = Eigen::Vector2d::Zero();
    for (size_t i = 0; i < k; ++i) {
        const FingerprintDb::Cell& cell = db.cells[static_cast<size_t>(order[i])];
        const double w = 1.0 / std::abs(cell.mean_rssi - rssi);
        wsum += w;
        pos += w * cell.center;
    }
    return pos / wsum;
}

Eigen::VectorXd music_spectrum(const Eigen::MatrixXcd& covariance,
                               const MusicConfig& cfg, const ArrayConfig& array,
                               std::vector<double>* grid_out) {
    const Eigen::Index n_r = covariance.rows();
    if (covariance.cols() != n_r || n_r < 2)
        throw DataError("music_spectrum requires a square covariance, N_R >= 2");
    if (cfg.assumed_sources < 1 || cfg.assumed_sources >= n_r)
        throw ConfigError("assumed source count must lie in [1, N_R)");
    if (!(cfg.az_step_rad > 0.0)) throw ConfigError("azimuth grid step must be positive");
    if (array.size() != static_cast<int>(n_r))
        throw ConfigError("array size does not match covariance dimension");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(covariance);
    if (eig.info() != Eigen::Success)
        throw NumericalError("music_spectrum eigendecomposition failed");
    // Eigenvalues ascend, so the leading columns span the noise subspace.
    const Eigen::MatrixXcd noise =
        eig.eigenvectors().leftCols(n_r - cfg.assumed_sources);

    // a(az, 0) depends on sin(az - boresight) only, so a full-circle grid
    // would carry an exact front-back mirror of every peak. Search the
    // half-plane about boresight where the response is injective.
    const int n_grid = 1 + std::max(1, static_cast<int>(std::llround(kPi / cfg.az_step_rad)));
    Eigen::VectorXd spectrum(n_grid);
    if (grid_out) grid_out->resize(static_cast<size_t>(n_grid));
    for (int g = 0; g < n_grid; ++g) {
        const double az = array.boresight_az - kPi / 2.0 + g * cfg.az_step_rad;
        if (grid_out) (*grid_out)[static_cast<size_t>(g)] = az;
        const Eigen::VectorXcd a = steering_vector(array, az, 0.0);
        const double denom = (noise.adjoint() * a).squaredNorm();
        spectrum(g) = 1.0 / std::max(denom, 1e-300);
    }
    return spectrum;
}

MusicResult music_locate(const Eigen::MatrixXcd& covariance, const MusicConfig& cfg,
                         const ArrayConfig& array, const Eigen::Vector3d& bs_position,
                         double delay_s) {
    if (!(cfg.delay_step_s > 0.0)) throw ConfigError("delay grid step must be positive");
    if (delay_s < 0.0) throw DataError("music_locate requires a nonnegative delay");

    std::vector<double> grid;
    const Eigen::VectorXd spectrum = music_spectrum(covariance, cfg, array, &grid);

    Eigen::Index peak = 0;
    spectrum.maxCoeff(&peak);

    std::vector<double> sorted(spectrum.data(), spectrum.data() + spectrum.size());
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];

    MusicResult res;
    res.peak_gap_db = 10.0 * std::log10(spectrum(peak) / std::max(median, 1e-300));
    res.azimuth_rad = grid[static_cast<size_t>(peak)];
    res.range_m = kSpeedOfLight * (std::round(delay_s / cfg.delay_step_s) * cfg.delay_step_s);
    res.localizable = res.peak_gap_db >= 3.0;
    res.position = bs_position.head<2>() +
                   res.range_m * Eigen::Vector2d(std::cos(res.azimuth_rad),
                                                 std::sin(res.azimuth_rad));
    return res;
}

} // namespace chartlab
