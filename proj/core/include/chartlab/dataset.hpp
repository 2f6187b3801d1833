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

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chartlab/common.hpp"

namespace chartlab {

/// One CSI record. `labeled` marks training-pool membership (decided per
/// whole trajectory at generation time); the complement is the validation
/// set. Chart anchors are drawn only from labeled records.
struct CsiSample {
    Eigen::MatrixXcd covariance;     // N_R x N_R Hermitian PSD
    Eigen::Vector3d position{0, 0, 0};  // VE antenna, meters
    int vehicle_id = -1;
    int time_index = -1;
    bool los = false;
    bool labeled = false;
    double strongest_delay_s = -1.0;  // absolute delay of the strongest path
};

struct Dataset {
    int n_rx = 0;
    std::vector<CsiSample> samples;

    int size() const { return static_cast<int>(samples.size()); }
    int labeled_count() const;
    double los_fraction() const;
};

/// Binary layout: magic, then N/N_R/L as u64, then per record the covariance
/// (row-major re/im double pairs), position, ids, flags, strongest delay.
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

/// Structured-text export for debugging (positions, flags, covariance trace).
void write_dataset_text(const std::string& path, const Dataset& ds);

/// Assign whole trajectories (all samples sharing a vehicle_id) to the
/// validation side until at least `validation_fraction` of the samples is
/// covered; every remaining sample is flagged labeled. Deterministic in seed.
void apply_trajectory_split(Dataset& ds, double validation_fraction, std::uint64_t seed);

/// Per-sample split variant (labeled flag drawn independently per record).
void apply_pointwise_split(Dataset& ds, double validation_fraction, std::uint64_t seed);

/// FNV-1a over the raw bytes of a file; used to key caches and to tie charts
/// to the dataset that produced them.
std::uint64_t file_hash(const std::string& path);

} // namespace chartlab
