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

#include "chartlab/config.hpp"
#include "chartlab/dataset.hpp"
#include "chartlab/evaluate.hpp"

namespace chartlab {

/// Record of one generated dataset, persisted as manifest_<mode>.txt in the
/// output directory. File paths are relative to that directory; every later
/// stage checks the config hash and the dataset content hash before using
/// the files, and the vehicle id lists make the trajectory-disjointness of
/// the train/validation split checkable without reloading the dataset.
struct DatasetManifest {
    std::uint64_t config_hash = 0;
    std::string mode;
    std::uint64_t seed = 0;
    std::string dataset_file;
    std::uint64_t dataset_hash = 0;
    std::string scene_file;
    std::string snapshots_file;
    int records = 0;
    int n_rx = 0;
    int labeled = 0;
    int validation = 0;
    double los_fraction = 0.0;
    int pool = 0;     // candidate (snapshot, vehicle) pairs available
    int dropped = 0;  // candidates skipped because no path reached the BS
    std::vector<int> labeled_vehicles;     // sorted vehicle ids per side
    std::vector<int> validation_vehicles;
};

void save_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest load_manifest(const std::string& path);

/// Sidecar of a fitted chart, tying it to the dataset and config that
/// produced it.
struct ChartMeta {
    std::uint64_t config_hash = 0;
    std::string dataset_file;
    std::uint64_t dataset_hash = 0;
    double supervision_pct = 0.0;
    std::uint64_t chart_seed = 0;
    int anchors = 0;
    double kl_final = 0.0;
};

void save_chart_meta(const std::string& path, const ChartMeta& m);
ChartMeta load_chart_meta(const std::string& path);

/// Output-directory naming convention shared by all stages.
std::string manifest_filename(TwinMode mode);
std::string dataset_filename(TwinMode mode);
std::string chart_basename(TwinMode mode, double supervision_pct);
std::string run_tag(TwinMode mode, double supervision_pct);

/// Stable per-stage seed derivation from the experiment master seed, so the
/// random streams of different stages (and of different samples) never
/// alias.
std::uint64_t derive_seed(std::uint64_t base, const std::string& stream);

/// Create-exclusive lock file guarding an output directory against
/// concurrent writers; removed when the guard leaves scope. An existing
/// lock file aborts with instructions instead of waiting.
class DirectoryLock {
public:
    explicit DirectoryLock(const std::string& dir);
    ~DirectoryLock();

    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    std::string path_;
};

/// Scene + traffic + ray tracing + channel synthesis into a CsiSample
/// dataset with a trajectory-level train/validation split. Writes the scene,
/// the snapshots, the dataset and the manifest under cfg.out_dir.
DatasetManifest cmd_generate(const ExperimentConfig& cfg);

/// Fits the chart for one supervision level on the generated dataset (the
/// pairwise dissimilarity matrix is cached on disk keyed by dataset hash and
/// eigenvalue floor). Returns the chart file path.
std::string cmd_chart(const ExperimentConfig& cfg, double supervision_pct);

/// Metrics of one fitted chart: CT/TW/KS over all points, localization
/// error statistics over the validation side only. Writes the metrics,
/// ECDF and LoS/NLoS quartile CSVs under cfg.out_dir/results.
MetricsCsvRow cmd_evaluate(const ExperimentConfig& cfg, double supervision_pct);

/// Classic baselines on the generated dataset: RSSI fingerprinting at every
/// supervision level (trained on the chart's anchor sets) and single-anchor
/// MUSIC, both evaluated on the validation side.
void cmd_baseline(const ExperimentConfig& cfg);

/// Full study: generate + chart + evaluate + baseline for both twin modes
/// across every configured supervision level with shared seeds, plus a
/// combined metrics CSV and a sweep manifest listing all outputs with
/// content hashes.
void cmd_sweep(const ExperimentConfig& cfg);

} // namespace chartlab
