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

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "chartlab/common.hpp"

namespace chartlab {

enum class MaterialId { concrete = 0, glass = 1, vehicle = 2 };

const char* material_name(MaterialId m);
MaterialId material_from_name(const std::string& name);

struct Rect {
    double xmin = 0, ymin = 0, xmax = 0, ymax = 0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double diagonal() const { return std::hypot(width(), height()); }
    bool contains(const Eigen::Vector2d& p) const {
        return p.x() >= xmin && p.x() <= xmax && p.y() >= ymin && p.y() <= ymax;
    }
};

/// Extruded 2.5D building. Footprint vertices are counterclockwise and the
/// polygon must be convex.
struct Building {
    std::vector<Eigen::Vector2d> footprint;
    double height = 0.0;          // m
    MaterialId material = MaterialId::concrete;

    bool contains_xy(const Eigen::Vector2d& p) const;
};

struct BaseStation {
    Eigen::Vector3d position{0, 0, 0};
    ArrayConfig array;
};

struct RoadEdge {
    int a = 0;
    int b = 0;
    double lane_width = 0.0; // corridor full width, m
};

struct RoadGraph {
    std::vector<Eigen::Vector2d> nodes;
    std::vector<RoadEdge> edges;

    std::vector<std::vector<int>> adjacency() const; // node -> neighbor nodes
    bool connected() const;
};

struct Scene {
    Rect bounds;
    std::vector<Building> buildings;
    RoadGraph roads;
    BaseStation bs;
};

struct ScenarioParams {
    double width_m = 550.0;
    double height_m = 670.0;
    double block_m = 40.0;       // square block cell edge
    double street_m = 15.0;      // street (corridor) width
    double min_height_m = 10.0;
    double max_height_m = 40.0;
    double glass_fraction = 0.3; // probability a building is glass
    double bs_height_m = 21.7;
};

enum class VehicleType { sedan = 0, hatchback = 1, truck = 2, bus = 3 };

struct VehicleClass {
    const char* name;
    double rooftop_height_m;   // top of the body
    double length_m;
    double width_m;
    double max_speed_mps;
};

const VehicleClass& vehicle_class(VehicleType t);
VehicleType vehicle_type_from_name(const std::string& name);

struct VehicleState {
    int vehicle_id = 0;
    VehicleType type = VehicleType::sedan;
    Eigen::Vector2d position{0, 0};
    double heading = 0.0; // rad
    double speed = 0.0;   // m/s, constant per vehicle
    int time_index = 0;
    // Walk bookkeeping: node the vehicle is heading to and the node it came
    // from, both indices into the scene road graph.
    int target_node = -1;
    int prev_node = -1;
};

struct Snapshot {
    int time_index = 0;
    std::vector<VehicleState> vehicles;
};

/// Deterministic Manhattan-grid city: square blocks separated by streets,
/// one building per block, perimeter streets included. The road graph has a
/// node at every street intersection.
Scene generate_city(std::uint64_t seed, const ScenarioParams& params);

/// Random-waypoint walk on the road graph. Each vehicle keeps a constant
/// speed and turns at nodes by seeded choice (never reversing unless at a
/// dead end). Step displacement along the walked polyline is speed*dt.
std::vector<Snapshot> simulate_traffic(const Scene& scene, std::uint64_t seed,
                                       int n_steps, double dt, int n_vehicles);

/// Advance one vehicle by dt along the road graph. Exposed so the kinematic
/// contract is directly testable.
void advance_vehicle(const Scene& scene, VehicleState& v, double dt, Rng& rng);

/// Antenna sits 0.2 m above the body rooftop.
Eigen::Vector3d ve_antenna_position(const VehicleState& v);

/// Empty string when all scene invariants hold, else a description of the
/// first violation.
std::string scene_check(const Scene& scene);

/// Distance from point p to segment [a, b].
double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b);

// Structured-text persistence. One record per line, fixed field order,
// meters with nine decimal digits.
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);
void save_snapshots(const std::vector<Snapshot>& snaps, const std::string& path);
std::vector<Snapshot> load_snapshots(const std::string& path);

} // namespace chartlab
