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
#include <optional>
#include <string>
#include <vector>

#include "chartlab/baselines.hpp"
#include "chartlab/channel.hpp"
#include "chartlab/charting.hpp"
#include "chartlab/features.hpp"
#include "chartlab/raytrace.hpp"
#include "chartlab/scene.hpp"

namespace chartlab {

/// Everything a study needs, with paper-scale defaults shrunk to desk scale
/// (N = 2000; the original scale is configurable). Loaded from a sectioned
/// key=value file; unknown sections or keys are configuration errors.
struct ExperimentConfig {
    // [experiment]
    int n_samples = 2000;
    TwinMode mode = TwinMode::static_scene;
    std::vector<double> supervision_pct = {5, 10, 25, 35, 50};
    double validation_fraction = 0.5;
    std::uint64_t seed = 1;
    bool per_point_split = false;  // default: split whole trajectories
    std::string out_dir = "out";

    // [scene]
    ScenarioParams scene;

    // [traffic]
    // At full scene scale only the BS streets are specularly reachable
    // (roughly a tenth of the candidate pool), so the default pool is sized
    // with a wide margin over n_samples.
    int n_vehicles = 60;
    int n_steps = 400;
    double dt_s = 0.5;

    // [raytrace] (f0 and mode are synchronized from [channel]/[experiment])
    TraceConfig trace;

    // [channel]
    ChannelConfig channel;
    ArrayConfig bs_array{4, 8, 0.5, 0.0};
    ArrayConfig ue_array{4, 2, 0.5, 0.0};
    bool estimate = false;  // false: perfect CSI (infinite-SNR shortcut)
    bool wssus = false;
    PilotConfig pilot;
    NoiseModel noise;

    // [features]
    double eig_floor = kDefaultEigFloor;

    // [charting]
    ChartingConfig charting;

    // [evaluate]
    int k_neighbors = 0;  // 0 = ceil(0.01 N)

    // [baselines]
    FingerprintConfig fingerprint;
    MusicConfig music;

    void validate() const;  // throws ConfigError with the offending key
};

/// Values passed on the command line that take precedence over the file.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::vector<double>> supervision;
    std::optional<std::string> out_dir;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void apply_overrides(ExperimentConfig& cfg, const CliOverrides& ov);

/// Deterministic full dump of the effective config (fixed key order, %.17g
/// doubles); its FNV-1a hash identifies the run in manifests and caches.
std::string canonical_config_text(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

TwinMode mode_from_name(const std::string& name);
const char* mode_name(TwinMode mode);

} // namespace chartlab
