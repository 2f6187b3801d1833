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

#include "chartlab/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>

namespace chartlab {

const char* material_name(MaterialId m) {
    switch (m) {
        case MaterialId::concrete: return "concrete";
        case MaterialId::glass: return "glass";
        case MaterialId::vehicle: return "vehicle";
    }
    return "concrete";
}

MaterialId material_from_name(const std::string& name) {
    if (name == "concrete") return MaterialId::concrete;
    if (name == "glass") return MaterialId::glass;
    if (name == "vehicle") return MaterialId::vehicle;
    throw DataError("unknown material: " + name);
}

bool Building::contains_xy(const Eigen::Vector2d& p) const {
    // Convex CCW polygon: inside iff left of (or on) every edge.
    const std::size_t n = footprint.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d& a = footprint[i];
        const Eigen::Vector2d& b = footprint[(i + 1) % n];
        const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
        if (cross < 0.0) return false;
    }
    return true;
}

std::vector<std::vector<int>> RoadGraph::adjacency() const {
    std::vector<std::vector<int>> adj(nodes.size());
    for (const RoadEdge& e : edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    return adj;
}

bool RoadGraph::connected() const {
    if (nodes.empty()) return false;
    auto adj = adjacency();
    std::vector<char> seen(nodes.size(), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count == nodes.size();
}

static const VehicleClass kVehicleClasses[4] = {
    {"sedan", 1.67, 4.60, 1.80, 14.0},
    {"hatchback", 1.80, 4.00, 1.75, 14.0},
    {"truck", 2.76, 8.00, 2.50, 11.0},
    {"bus", 4.41, 12.00, 2.55, 10.0},
};

const VehicleClass& vehicle_class(VehicleType t) {
    return kVehicleClasses[static_cast<int>(t)];
}

VehicleType vehicle_type_from_name(const std::string& name) {
    for (int i = 0; i < 4; ++i)
        if (name == kVehicleClasses[i].name) return static_cast<VehicleType>(i);
    throw DataError("unknown vehicle class: " + name);
}

Scene generate_city(std::uint64_t seed, const ScenarioParams& p) {
    if (p.width_m <= 0 || p.height_m <= 0 || p.block_m <= 0 || p.street_m <= 0)
        throw ConfigError("scene dimensions must be positive");
    if (p.street_m >= p.block_m)
        throw ConfigError("street width must be smaller than the block size");
    if (p.min_height_m <= 0 || p.max_height_m < p.min_height_m || p.max_height_m > 200.0)
        throw ConfigError("building height range must satisfy 0 < min <= max <= 200");
    if (p.glass_fraction < 0 || p.glass_fraction > 1)
        throw ConfigError("glass fraction must be in [0, 1]");

    const double pitch = p.block_m + p.street_m;
    const int nx = static_cast<int>(std::floor((p.width_m - p.street_m) / pitch));
    const int ny = static_cast<int>(std::floor((p.height_m - p.street_m) / pitch));
    if (nx < 1 || ny < 1)
        throw ConfigError("bounds too small for one block plus perimeter streets");

    Scene scene;
    scene.bounds = Rect{0.0, 0.0, p.width_m, p.height_m};

    Rng rng(seed);

    // Buildings: one per block, inset so the footprint clears the street
    // corridor on every side.
    const double inset = std::min(2.5, 0.1 * p.block_m);
    for (int by = 0; by < ny; ++by) {
        for (int bx = 0; bx < nx; ++bx) {
            const double x0 = p.street_m + bx * pitch + inset;
            const double y0 = p.street_m + by * pitch + inset;
            const double x1 = p.street_m + bx * pitch + p.block_m - inset;
            const double y1 = p.street_m + by * pitch + p.block_m - inset;
            Building b;
            b.footprint = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; // CCW
            b.height = rng.uniform(p.min_height_m, p.max_height_m);
            b.material = rng.uniform() < p.glass_fraction ? MaterialId::glass
                                                          : MaterialId::concrete;
            scene.buildings.push_back(std::move(b));
        }
    }

    // Road graph: nodes at street-centerline intersections.
    const auto node_id = [&](int ix, int iy) { return iy * (nx + 1) + ix; };
    for (int iy = 0; iy <= ny; ++iy)
        for (int ix = 0; ix <= nx; ++ix)
            scene.roads.nodes.emplace_back(p.street_m / 2.0 + ix * pitch,
                                           p.street_m / 2.0 + iy * pitch);
    for (int iy = 0; iy <= ny; ++iy)
        for (int ix = 0; ix <= nx; ++ix) {
            if (ix < nx)
                scene.roads.edges.push_back({node_id(ix, iy), node_id(ix + 1, iy), p.street_m});
            if (iy < ny)
                scene.roads.edges.push_back({node_id(ix, iy), node_id(ix, iy + 1), p.street_m});
        }

    // Base station on the intersection nearest the scene center.
    const Eigen::Vector2d center(p.width_m / 2.0, p.height_m / 2.0);
    int best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < scene.roads.nodes.size(); ++i) {
        const double d = (scene.roads.nodes[i] - center).norm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    scene.bs.position = Eigen::Vector3d(scene.roads.nodes[best].x(),
                                        scene.roads.nodes[best].y(), p.bs_height_m);
    scene.bs.array = ArrayConfig{}; // 4x8 panel, boresight +x

    return scene;
}

Eigen::Vector3d ve_antenna_position(const VehicleState& v) {
    const VehicleClass& c = vehicle_class(v.type);
    return Eigen::Vector3d(v.position.x(), v.position.y(), c.rooftop_height_m + 0.2);
}

static void advance_on_graph(const RoadGraph& g,
                             const std::vector<std::vector<int>>& adj,
                             VehicleState& v, double dt, Rng& rng) {
    if (v.target_node < 0) return; // not placed on the graph
    double remaining = v.speed * dt;
    while (remaining > 0.0) {
        const Eigen::Vector2d target = g.nodes[v.target_node];
        const Eigen::Vector2d delta = target - v.position;
        const double dist = delta.norm();
        if (remaining < dist - 1e-12) {
            const Eigen::Vector2d dir = delta / dist;
            v.position += remaining * dir;
            v.heading = std::atan2(dir.y(), dir.x());
            return;
        }
        // Reached the target node; spend the leftover on a new edge.
        remaining -= dist;
        v.position = target;
        const std::vector<int>& nb = adj[static_cast<std::size_t>(v.target_node)];
        int next = -1;
        if (nb.size() == 1) {
            next = nb[0]; // dead end: reverse
        } else {
            // Seeded choice among neighbors, excluding the node we came from.
            std::vector<int> options;
            options.reserve(nb.size());
            for (int n : nb)
                if (n != v.prev_node) options.push_back(n);
            next = options[static_cast<std::size_t>(rng.uniform_int(options.size()))];
        }
        v.prev_node = v.target_node;
        v.target_node = next;
        if (remaining <= 0.0) {
            const Eigen::Vector2d dir = (g.nodes[next] - v.position).normalized();
            v.heading = std::atan2(dir.y(), dir.x());
            return;
        }
    }
}

void advance_vehicle(const Scene& scene, VehicleState& v, double dt, Rng& rng) {
    const auto adj = scene.roads.adjacency();
    advance_on_graph(scene.roads, adj, v, dt, rng);
}

std::vector<Snapshot> simulate_traffic(const Scene& scene, std::uint64_t seed,
                                       int n_steps, double dt, int n_vehicles) {
    if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (dt <= 0) throw ConfigError("dt must be > 0");
    if (scene.roads.nodes.empty() || scene.roads.edges.empty())
        throw ConfigError("road graph is empty");
    if (!scene.roads.connected()) throw ConfigError("road graph is not connected");

    Rng rng(seed);
    const auto adj = scene.roads.adjacency();

    std::vector<VehicleState> fleet;
    fleet.reserve(static_cast<std::size_t>(n_vehicles));
    for (int k = 0; k < n_vehicles; ++k) {
        VehicleState v;
        v.vehicle_id = k;
        v.type = static_cast<VehicleType>(rng.uniform_int(4));
        const int start = static_cast<int>(rng.uniform_int(scene.roads.nodes.size()));
        const std::vector<int>& nb = adj[start];
        const int target = nb[static_cast<std::size_t>(rng.uniform_int(nb.size()))];
        v.position = scene.roads.nodes[start];
        v.prev_node = start;
        v.target_node = target;
        const Eigen::Vector2d dir =
            (scene.roads.nodes[target] - v.position).normalized();
        v.heading = std::atan2(dir.y(), dir.x());
        const double vmax = vehicle_class(v.type).max_speed_mps;
        v.speed = rng.uniform(0.4 * vmax, vmax);
        fleet.push_back(v);
    }

    std::vector<Snapshot> snaps;
    snaps.reserve(static_cast<std::size_t>(n_steps));
    for (int t = 0; t < n_steps; ++t) {
        for (VehicleState& v : fleet) {
            if (t > 0) advance_on_graph(scene.roads, adj, v, dt, rng);
            v.time_index = t;
        }
        Snapshot s;
        s.time_index = t;
        s.vehicles = fleet;
        snaps.push_back(std::move(s));
    }
    return snaps;
}

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                              const Eigen::Vector2d& b) {
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 == 0.0) return (p - a).norm();
    double t = (p - a).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

static double polygon_segment_distance(const std::vector<Eigen::Vector2d>& poly,
                                       const Eigen::Vector2d& a,
                                       const Eigen::Vector2d& b) {
    double d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Eigen::Vector2d& c = poly[i];
        const Eigen::Vector2d& e = poly[(i + 1) % poly.size()];
        // Segment-segment distance via endpoint projections; sufficient here
        // because generated footprints never cross corridors.
        d = std::min(d, point_segment_distance(c, a, b));
        d = std::min(d, point_segment_distance(e, a, b));
        d = std::min(d, point_segment_distance(a, c, e));
        d = std::min(d, point_segment_distance(b, c, e));
    }
    return d;
}

std::string scene_check(const Scene& scene) {
    for (std::size_t bi = 0; bi < scene.buildings.size(); ++bi) {
        const Building& b = scene.buildings[bi];
        if (b.footprint.size() < 3) return "building with fewer than 3 vertices";
        if (b.height <= 0 || b.height > 200) return "building height out of (0, 200]";
        double area2 = 0.0;
        for (std::size_t i = 0; i < b.footprint.size(); ++i) {
            const Eigen::Vector2d& u = b.footprint[i];
            const Eigen::Vector2d& v = b.footprint[(i + 1) % b.footprint.size()];
            area2 += u.x() * v.y() - v.x() * u.y();
            if (!scene.bounds.contains(u)) return "footprint vertex outside bounds";
        }
        if (area2 <= 0.0) return "footprint not counterclockwise";
        // Convexity: all cross products of consecutive edges non-negative.
        const std::size_t n = b.footprint.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::Vector2d e1 = b.footprint[(i + 1) % n] - b.footprint[i];
            const Eigen::Vector2d e2 = b.footprint[(i + 2) % n] - b.footprint[(i + 1) % n];
            if (e1.x() * e2.y() - e1.y() * e2.x() < 0) return "footprint not convex";
        }
        for (const RoadEdge& e : scene.roads.edges) {
            const double d = polygon_segment_distance(
                b.footprint, scene.roads.nodes[e.a], scene.roads.nodes[e.b]);
            if (d < e.lane_width / 2.0) return "building overlaps a road corridor";
        }
    }
    if (!scene.roads.connected()) return "road graph not connected";
    for (const Building& b : scene.buildings) {
        if (b.contains_xy(scene.bs.position.head<2>()))
            return "base station inside a building footprint";
    }
    return {};
}

// ---------------------------------------------------------------------------
// Text persistence

static void write_double(std::FILE* f, double x) { std::fprintf(f, " %.9f", x); }

void save_scene(const Scene& scene, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw DataError("cannot write scene file: " + path);
    std::fprintf(f, "chartlab-scene 1\n");
    std::fprintf(f, "bounds %.9f %.9f %.9f %.9f\n", scene.bounds.xmin, scene.bounds.ymin,
                 scene.bounds.xmax, scene.bounds.ymax);
    std::fprintf(f, "bs %.9f %.9f %.9f %d %d %.9f %.9f\n", scene.bs.position.x(),
                 scene.bs.position.y(), scene.bs.position.z(), scene.bs.array.rows,
                 scene.bs.array.cols, scene.bs.array.spacing_wavelengths,
                 scene.bs.array.boresight_az);
    for (const Building& b : scene.buildings) {
        std::fprintf(f, "building %.9f %s %zu", b.height, material_name(b.material),
                     b.footprint.size());
        for (const auto& v : b.footprint) {
            write_double(f, v.x());
            write_double(f, v.y());
        }
        std::fprintf(f, "\n");
    }
    for (const auto& n : scene.roads.nodes)
        std::fprintf(f, "road_node %.9f %.9f\n", n.x(), n.y());
    for (const RoadEdge& e : scene.roads.edges)
        std::fprintf(f, "road_edge %d %d %.9f\n", e.a, e.b, e.lane_width);
    std::fclose(f);
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read scene file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("chartlab-scene 1", 0) != 0)
        throw DataError("not a chartlab scene file: " + path);
    Scene scene;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "bounds") {
            ss >> scene.bounds.xmin >> scene.bounds.ymin >> scene.bounds.xmax >>
                scene.bounds.ymax;
        } else if (tag == "bs") {
            double x, y, z;
            ss >> x >> y >> z >> scene.bs.array.rows >> scene.bs.array.cols >>
                scene.bs.array.spacing_wavelengths >> scene.bs.array.boresight_az;
            scene.bs.position = Eigen::Vector3d(x, y, z);
        } else if (tag == "building") {
            Building b;
            std::string mat;
            std::size_t nv = 0;
            ss >> b.height >> mat >> nv;
            b.material = material_from_name(mat);
            for (std::size_t i = 0; i < nv; ++i) {
                double x, y;
                ss >> x >> y;
                b.footprint.emplace_back(x, y);
            }
            if (!ss) throw DataError("malformed building record");
            scene.buildings.push_back(std::move(b));
        } else if (tag == "road_node") {
            double x, y;
            ss >> x >> y;
            scene.roads.nodes.emplace_back(x, y);
        } else if (tag == "road_edge") {
            RoadEdge e;
            ss >> e.a >> e.b >> e.lane_width;
            scene.roads.edges.push_back(e);
        } else {
            throw DataError("unknown scene record: " + tag);
        }
        if (!ss) throw DataError("malformed scene record: " + tag);
    }
    return scene;
}

void save_snapshots(const std::vector<Snapshot>& snaps, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw DataError("cannot write snapshot file: " + path);
    std::fprintf(f, "chartlab-snapshots 1\n");
    for (const Snapshot& s : snaps)
        for (const VehicleState& v : s.vehicles)
            std::fprintf(f, "vehicle %d %d %s %.9f %.9f %.9f %.9f\n", s.time_index,
                         v.vehicle_id, vehicle_class(v.type).name, v.position.x(),
                         v.position.y(), v.heading, v.speed);
    std::fclose(f);
}

std::vector<Snapshot> load_snapshots(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read snapshot file: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("chartlab-snapshots 1", 0) != 0)
        throw DataError("not a chartlab snapshot file: " + path);
    std::vector<Snapshot> snaps;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tag, cls;
        int t;
        VehicleState v;
        ss >> tag >> t >> v.vehicle_id >> cls >> v.position.x() >> v.position.y() >>
            v.heading >> v.speed;
        if (tag != "vehicle" || !ss) throw DataError("malformed snapshot record");
        v.type = vehicle_type_from_name(cls);
        v.time_index = t;
        if (snaps.empty() || snaps.back().time_index != t) {
            Snapshot s;
            s.time_index = t;
            snaps.push_back(s);
        }
        snaps.back().vehicles.push_back(v);
    }
    return snaps;
}

} // namespace chartlab
