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

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chartlab/scene.hpp"

namespace chartlab {

/// One specular multipath component. Angles are global-frame with azimuth in
/// (-pi, pi] and elevation in [-pi/2, pi/2]; the DoA points from the receiver
/// back along the arriving ray.
struct PathTuple {
    double dod_az = 0, dod_el = 0;   // departure direction at the Tx
    double doa_az = 0, doa_el = 0;   // arrival direction at the Rx
    double delay_s = 0;              // tau = path_length / c
    double doppler_hz = 0;
    double power = 0;                // linear |beta|^2
    double path_length_m = 0;
    int bounce_count = 0;            // 0 iff line of sight
};

/// PathTuple plus the geometry it was built from, so every traced path can
/// be re-validated by forward reconstruction.
struct TracedPath {
    PathTuple tuple;
    std::vector<Eigen::Vector3d> vertices;  // tx, bounce points..., rx
    std::vector<int> wall_ids;              // one per bounce (-1 = ground)
    std::vector<MaterialId> materials;      // one per bounce
};

/// Axis-extruded oriented box standing on the ground, used as an occluder
/// for a vehicle body.
struct Blocker {
    Eigen::Vector2d center_xy{0, 0};
    double heading = 0.0;                    // rad
    Eigen::Vector3d extents{0, 0, 0};        // length, width, height
    int vehicle_id = -1;
};

enum class TwinMode { static_scene, dynamic_scene };

struct TraceConfig {
    int max_order = 2;                 // specular bounces, in [0, 3]
    double f0_hz = 28e9;
    double concrete_loss_db = 6.0;     // per-bounce reflection losses
    double glass_loss_db = 2.0;
    double vehicle_loss_db = 3.0;
    bool ground_reflection = true;     // one extra first-order path off z=0
    bool vehicle_reflections = false;  // first-order bounces off blocker faces
    double max_path_length_m = 1500.0;
    TwinMode mode = TwinMode::static_scene;
};

/// Vertical rectangular reflector: base segment a->b at z in [0, height].
struct Wall {
    Eigen::Vector2d a{0, 0}, b{0, 0};
    double height = 0.0;
    MaterialId material = MaterialId::concrete;
    int id = -1;

    Eigen::Vector2d outward_normal() const; // unit, to the right of a->b
    double length() const { return (b - a).norm(); }
};

/// All building walls of the scene, one per footprint edge, in a fixed order.
std::vector<Wall> scene_walls(const Scene& scene);

/// Four vertical side faces of a blocker box.
std::vector<Wall> blocker_walls(const Blocker& blk, int first_id);

Blocker blocker_from_vehicle(const VehicleState& v);

/// Mirror p across the infinite vertical plane through the wall.
Eigen::Vector3d mirror_image(const Eigen::Vector3d& p, const Wall& wall);

/// True iff the open segment a-b penetrates any building or blocker by more
/// than 1e-9 m. Tangential grazing does not block.
bool los_blocked(const Scene& scene, const Eigen::Vector3d& a,
                 const Eigen::Vector3d& b, const std::vector<Blocker>& blockers);

/// Geometric Doppler of a path departing along unit vector u_dep from a
/// transmitter moving with tx_velocity.
double doppler_shift(const Eigen::Vector3d& departure_unit,
                     const Eigen::Vector3d& tx_velocity, double f0_hz);

/// Free-space loss at f0 plus fixed per-bounce material losses.
double path_gain(double path_length_m, int bounce_count,
                 const std::vector<MaterialId>& materials, const TraceConfig& cfg);

/// Image-method multipath search: the LoS path when unblocked, plus every
/// valid specular reflection sequence up to cfg.max_order whose unfolded
/// chain is unoccluded. Results are sorted by delay. In static mode the
/// blocker list is ignored.
std::vector<TracedPath> trace_paths(const Scene& scene, const Eigen::Vector3d& tx,
                                    const Eigen::Vector3d& tx_velocity,
                                    const Eigen::Vector3d& rx,
                                    const std::vector<Blocker>& blockers,
                                    const TraceConfig& cfg);

/// Structured-text path dump: one row per path.
void write_paths_text(const std::string& path, int time_index, int vehicle_id,
                      const std::vector<TracedPath>& paths, bool append);

} // namespace chartlab
