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

#include "chartlab/raytrace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "chartlab/common.hpp"

namespace chartlab {
namespace {

// A segment only counts as occluded when it penetrates a solid by more than
// this depth, so legs that merely touch a wall (their own reflection point)
// or graze an edge are kept.
constexpr double kPenetrationEps = 1e-9;

// Minimum clearance, in metres of signed plane distance, for a point to be
// treated as strictly in front of a reflector.
constexpr double kSideEps = 1e-9;

/// Convex vertical prism (building or vehicle box) as intersection of
/// half-spaces: n_i . (xy - a_i) <= 0 for every base edge, 0 <= z <= height.
struct Prism {
    std::vector<Eigen::Vector2d> anchor;
    std::vector<Eigen::Vector2d> normal;  // outward unit normals
    double height = 0.0;
    Eigen::Vector2d bb_min{0, 0}, bb_max{0, 0};
};

Prism prism_from_polygon(const std::vector<Eigen::Vector2d>& poly, double height) {
    Prism pr;
    pr.height = height;
    const size_t n = poly.size();
    pr.anchor.reserve(n);
    pr.normal.reserve(n);
    pr.bb_min = pr.bb_max = poly[0];
    for (size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d& a = poly[i];
        const Eigen::Vector2d& b = poly[(i + 1) % n];
        Eigen::Vector2d d = b - a;
        const double len = d.norm();
        if (len <= 1e-12)
            throw GeometryError("degenerate footprint edge in occluder");
        d /= len;
        pr.anchor.push_back(a);
        pr.normal.emplace_back(d.y(), -d.x());  // right of a->b, outward for CCW
        pr.bb_min = pr.bb_min.cwiseMin(a);
        pr.bb_max = pr.bb_max.cwiseMax(a);
    }
    return pr;
}

std::vector<Eigen::Vector2d> blocker_corners(const Blocker& blk) {
    const Eigen::Vector2d u(std::cos(blk.heading), std::sin(blk.heading));
    const Eigen::Vector2d v(-u.y(), u.x());
    const double hl = 0.5 * blk.extents.x();
    const double hw = 0.5 * blk.extents.y();
    // CCW when traversed in this order.
    return {blk.center_xy + hl * u + hw * v, blk.center_xy - hl * u + hw * v,
            blk.center_xy - hl * u - hw * v, blk.center_xy + hl * u - hw * v};
}

/// Clip segment a-b against the prism; true iff the interior overlap is
/// longer than kPenetrationEps.
bool segment_penetrates(const Prism& pr, const Eigen::Vector3d& a,
                        const Eigen::Vector3d& b) {
    // Cheap rejects on the bounding volume.
    if (std::min(a.z(), b.z()) >= pr.height) return false;
    if (std::max(a.x(), b.x()) < pr.bb_min.x() || std::min(a.x(), b.x()) > pr.bb_max.x() ||
        std::max(a.y(), b.y()) < pr.bb_min.y() || std::min(a.y(), b.y()) > pr.bb_max.y())
        return false;

    double t0 = 0.0, t1 = 1.0;
    auto clip = [&](double c0, double c1) -> bool {
        // Constraint c(t) = c0 + t (c1 - c0) <= 0.
        if (c0 <= 0.0 && c1 <= 0.0) return true;
        if (c0 > 0.0 && c1 > 0.0) return false;
        const double tc = c0 / (c0 - c1);
        if (c0 > 0.0)
            t0 = std::max(t0, tc);
        else
            t1 = std::min(t1, tc);
        return t0 < t1;
    };

    if (!clip(a.z() - pr.height, b.z() - pr.height)) return false;  // z <= h
    if (!clip(-a.z(), -b.z())) return false;                        // z >= 0
    const Eigen::Vector2d axy = a.head<2>(), bxy = b.head<2>();
    for (size_t i = 0; i < pr.anchor.size(); ++i) {
        const double c0 = pr.normal[i].dot(axy - pr.anchor[i]);
        const double c1 = pr.normal[i].dot(bxy - pr.anchor[i]);
        if (!clip(c0, c1)) return false;
    }
    return (t1 - t0) * (b - a).norm() > kPenetrationEps;
}

std::vector<Prism> build_prisms(const Scene& scene, const std::vector<Blocker>& blockers) {
    std::vector<Prism> prisms;
    prisms.reserve(scene.buildings.size() + blockers.size());
    for (const Building& bld : scene.buildings)
        prisms.push_back(prism_from_polygon(bld.footprint, bld.height));
    for (const Blocker& blk : blockers)
        prisms.push_back(prism_from_polygon(blocker_corners(blk), blk.extents.z()));
    return prisms;
}

bool any_occludes(const std::vector<Prism>& prisms, const Eigen::Vector3d& a,
                  const Eigen::Vector3d& b) {
    for (const Prism& pr : prisms)
        if (segment_penetrates(pr, a, b)) return true;
    return false;
}

double signed_plane_distance(const Wall& w, const Eigen::Vector2d& p_xy) {
    return w.outward_normal().dot(p_xy - w.a);
}

/// Everything trace_paths needs while walking wall sequences.
struct TraceContext {
    const std::vector<Wall>* walls = nullptr;
    const std::vector<Prism>* prisms = nullptr;
    Eigen::Vector3d tx{0, 0, 0}, rx{0, 0, 0};
    Eigen::Vector3d tx_velocity{0, 0, 0};
    const TraceConfig* cfg = nullptr;
    std::vector<TracedPath>* out = nullptr;
    std::vector<int> seq;
    std::vector<Eigen::Vector3d> images;  // images[j] = tx mirrored j times
    std::vector<Eigen::Vector2d> cached_normals;
};

TracedPath assemble_path(const std::vector<Eigen::Vector3d>& vertices,
                         const std::vector<int>& wall_ids,
                         const std::vector<MaterialId>& materials,
                         const Eigen::Vector3d& tx_velocity, const TraceConfig& cfg) {
    TracedPath tp;
    tp.vertices = vertices;
    tp.wall_ids = wall_ids;
    tp.materials = materials;

    double length = 0.0;
    for (size_t i = 0; i + 1 < vertices.size(); ++i)
        length += (vertices[i + 1] - vertices[i]).norm();

    const Eigen::Vector3d dep = (vertices[1] - vertices[0]).normalized();
    const Eigen::Vector3d& last_hop = vertices[vertices.size() - 2];
    const Eigen::Vector3d arr = (last_hop - vertices.back()).normalized();

    PathTuple& t = tp.tuple;
    t.bounce_count = static_cast<int>(wall_ids.size());
    t.path_length_m = length;
    t.delay_s = length / kSpeedOfLight;
    t.dod_az = wrap_azimuth(std::atan2(dep.y(), dep.x()));
    t.dod_el = std::asin(std::clamp(dep.z(), -1.0, 1.0));
    t.doa_az = wrap_azimuth(std::atan2(arr.y(), arr.x()));
    t.doa_el = std::asin(std::clamp(arr.z(), -1.0, 1.0));
    t.doppler_hz = doppler_shift(dep, tx_velocity, cfg.f0_hz);
    t.power = path_gain(length, t.bounce_count, materials, cfg);
    return tp;
}

/// Backward pass of the image method: recover reflection points from the
/// image chain, enforce that each lies strictly inside its wall rectangle,
/// then run occlusion on every leg.
void validate_sequence(TraceContext& ctx) {
    const size_t k = ctx.seq.size();
    const std::vector<Wall>& walls = *ctx.walls;
    const TraceConfig& cfg = *ctx.cfg;

    if ((ctx.rx - ctx.images[k]).norm() > cfg.max_path_length_m) return;

    std::vector<Eigen::Vector3d> pts(k);
    Eigen::Vector3d from = ctx.rx;
    for (size_t j = k; j-- > 0;) {
        const Wall& w = walls[static_cast<size_t>(ctx.seq[j])];
        const Eigen::Vector3d& img = ctx.images[j + 1];
        const double s0 = signed_plane_distance(w, from.head<2>());
        const double s1 = signed_plane_distance(w, img.head<2>());
        if (s0 <= kSideEps || s1 >= -kSideEps) return;  // must cross front->back
        const double t = s0 / (s0 - s1);
        const Eigen::Vector3d p = from + t * (img - from);
        // Strictly inside the finite rectangle.
        const Eigen::Vector2d dir = (w.b - w.a).normalized();
        const double along = dir.dot(p.head<2>() - w.a);
        if (along <= 0.0 || along >= w.length()) return;
        if (p.z() <= 0.0 || p.z() >= w.height) return;
        pts[j] = p;
        from = p;
    }

    std::vector<Eigen::Vector3d> vertices;
    vertices.reserve(k + 2);
    vertices.push_back(ctx.tx);
    for (const Eigen::Vector3d& p : pts) vertices.push_back(p);
    vertices.push_back(ctx.rx);

    std::vector<MaterialId> materials;
    materials.reserve(k);
    for (int wid : ctx.seq) materials.push_back(walls[static_cast<size_t>(wid)].material);

    for (size_t i = 0; i + 1 < vertices.size(); ++i) {
        if ((vertices[i + 1] - vertices[i]).norm() <= kPenetrationEps) return;
        if (any_occludes(*ctx.prisms, vertices[i], vertices[i + 1])) return;
    }

    std::vector<int> ids;
    ids.reserve(k);
    for (int wid : ctx.seq) ids.push_back(walls[static_cast<size_t>(wid)].id);
    ctx.out->push_back(assemble_path(vertices, ids, materials, ctx.tx_velocity, cfg));
}

void search_walls(TraceContext& ctx, int depth_left) {
    if (depth_left <= 0) return;
    const std::vector<Wall>& walls = *ctx.walls;
    // By value: the push_back below may reallocate ctx.images.
    const Eigen::Vector3d src = ctx.images.back();
    const int prev = ctx.seq.empty() ? -1 : ctx.seq.back();

    for (size_t wi = 0; wi < walls.size(); ++wi) {
        if (static_cast<int>(wi) == prev) continue;
        const Wall& w = walls[wi];
        // The current image must face the wall.
        if (ctx.cached_normals[wi].dot(src.head<2>() - w.a) <= kSideEps) continue;
        // After bouncing off prev the ray lives in prev's front half-space,
        // so the next wall needs at least one endpoint there.
        if (prev >= 0) {
            const Wall& pw = walls[static_cast<size_t>(prev)];
            const Eigen::Vector2d& pn = ctx.cached_normals[static_cast<size_t>(prev)];
            if (pn.dot(w.a - pw.a) <= kSideEps && pn.dot(w.b - pw.a) <= kSideEps)
                continue;
        }

        Eigen::Vector3d img = mirror_image(src, w);
        ctx.seq.push_back(static_cast<int>(wi));
        ctx.images.push_back(img);
        validate_sequence(ctx);
        search_walls(ctx, depth_left - 1);
        ctx.images.pop_back();
        ctx.seq.pop_back();
    }
}

void trace_ground_reflection(TraceContext& ctx) {
    const Eigen::Vector3d& tx = ctx.tx;
    const Eigen::Vector3d& rx = ctx.rx;
    if (tx.z() <= kSideEps || rx.z() <= kSideEps) return;
    const double t = rx.z() / (rx.z() + tx.z());
    Eigen::Vector3d p = rx + t * (Eigen::Vector3d(tx.x(), tx.y(), -tx.z()) - rx);
    p.z() = 0.0;
    if ((p - tx).norm() + (rx - p).norm() > ctx.cfg->max_path_length_m) return;
    if ((p - tx).norm() <= kPenetrationEps || (rx - p).norm() <= kPenetrationEps) return;
    if (any_occludes(*ctx.prisms, tx, p) || any_occludes(*ctx.prisms, p, rx)) return;
    ctx.out->push_back(assemble_path({tx, p, rx}, {-1}, {MaterialId::concrete},
                                     ctx.tx_velocity, *ctx.cfg));
}

void trace_vehicle_faces(TraceContext& ctx, const std::vector<Blocker>& blockers,
                         int first_face_id) {
    int face_id = first_face_id;
    for (const Blocker& blk : blockers) {
        const std::vector<Wall> faces = blocker_walls(blk, face_id);
        face_id += static_cast<int>(faces.size());
        for (const Wall& w : faces) {
            const double s_tx = signed_plane_distance(w, ctx.tx.head<2>());
            const double s_rx = signed_plane_distance(w, ctx.rx.head<2>());
            if (s_tx <= kSideEps || s_rx <= kSideEps) continue;
            const Eigen::Vector3d img = mirror_image(ctx.tx, w);
            const double s1 = signed_plane_distance(w, img.head<2>());
            if (s1 >= -kSideEps) continue;
            const double t = s_rx / (s_rx - s1);
            const Eigen::Vector3d p = ctx.rx + t * (img - ctx.rx);
            const Eigen::Vector2d dir = (w.b - w.a).normalized();
            const double along = dir.dot(p.head<2>() - w.a);
            if (along <= 0.0 || along >= w.length()) continue;
            if (p.z() <= 0.0 || p.z() >= w.height) continue;
            const double len = (p - ctx.tx).norm() + (ctx.rx - p).norm();
            if (len > ctx.cfg->max_path_length_m) continue;
            if ((p - ctx.tx).norm() <= kPenetrationEps ||
                (ctx.rx - p).norm() <= kPenetrationEps)
                continue;
            if (any_occludes(*ctx.prisms, ctx.tx, p) ||
                any_occludes(*ctx.prisms, p, ctx.rx))
                continue;
            ctx.out->push_back(assemble_path({ctx.tx, p, ctx.rx}, {w.id},
                                             {MaterialId::vehicle}, ctx.tx_velocity,
                                             *ctx.cfg));
        }
    }
}

}  // namespace

Eigen::Vector2d Wall::outward_normal() const {
    Eigen::Vector2d d = b - a;
    const double len = d.norm();
    if (len <= 1e-12) throw GeometryError("wall with zero-length base segment");
    d /= len;
    return {d.y(), -d.x()};
}

std::vector<Wall> scene_walls(const Scene& scene) {
    std::vector<Wall> walls;
    int id = 0;
    for (const Building& bld : scene.buildings) {
        const size_t n = bld.footprint.size();
        for (size_t i = 0; i < n; ++i) {
            Wall w;
            w.a = bld.footprint[i];
            w.b = bld.footprint[(i + 1) % n];
            w.height = bld.height;
            w.material = bld.material;
            w.id = id++;
            walls.push_back(w);
        }
    }
    return walls;
}

std::vector<Wall> blocker_walls(const Blocker& blk, int first_id) {
    const std::vector<Eigen::Vector2d> c = blocker_corners(blk);
    std::vector<Wall> faces;
    faces.reserve(4);
    for (size_t i = 0; i < 4; ++i) {
        Wall w;
        w.a = c[i];
        w.b = c[(i + 1) % 4];
        w.height = blk.extents.z();
        w.material = MaterialId::vehicle;
        w.id = first_id + static_cast<int>(i);
        faces.push_back(w);
    }
    return faces;
}

Blocker blocker_from_vehicle(const VehicleState& v) {
    const VehicleClass& cls = vehicle_class(v.type);
    Blocker blk;
    blk.center_xy = v.position;
    blk.heading = v.heading;
    blk.extents = Eigen::Vector3d(cls.length_m, cls.width_m, cls.rooftop_height_m);
    blk.vehicle_id = v.vehicle_id;
    return blk;
}

Eigen::Vector3d mirror_image(const Eigen::Vector3d& p, const Wall& wall) {
    const Eigen::Vector2d n = wall.outward_normal();  // throws on degenerate wall
    const double d = n.dot(p.head<2>() - wall.a);
    Eigen::Vector3d out = p;
    out.head<2>() -= 2.0 * d * n;
    return out;
}

bool los_blocked(const Scene& scene, const Eigen::Vector3d& a,
                 const Eigen::Vector3d& b, const std::vector<Blocker>& blockers) {
    return any_occludes(build_prisms(scene, blockers), a, b);
}

double doppler_shift(const Eigen::Vector3d& departure_unit,
                     const Eigen::Vector3d& tx_velocity, double f0_hz) {
    return f0_hz / kSpeedOfLight * tx_velocity.dot(departure_unit);
}

double path_gain(double path_length_m, int bounce_count,
                 const std::vector<MaterialId>& materials, const TraceConfig& cfg) {
    if (path_length_m <= 0.0)
        throw NumericalError("path_gain requires a positive path length");
    if (static_cast<size_t>(bounce_count) != materials.size())
        throw NumericalError("bounce count does not match material list");
    const double lambda = kSpeedOfLight / cfg.f0_hz;
    const double amp = lambda / (4.0 * kPi * path_length_m);
    double gain = amp * amp;
    for (MaterialId m : materials) {
        double loss_db = 0.0;
        switch (m) {
            case MaterialId::concrete: loss_db = cfg.concrete_loss_db; break;
            case MaterialId::glass: loss_db = cfg.glass_loss_db; break;
            case MaterialId::vehicle: loss_db = cfg.vehicle_loss_db; break;
        }
        gain *= std::pow(10.0, -loss_db / 10.0);
    }
    return gain;
}

std::vector<TracedPath> trace_paths(const Scene& scene, const Eigen::Vector3d& tx,
                                    const Eigen::Vector3d& tx_velocity,
                                    const Eigen::Vector3d& rx,
                                    const std::vector<Blocker>& blockers,
                                    const TraceConfig& cfg) {
    if (cfg.max_order < 0 || cfg.max_order > 3)
        throw ConfigError("trace max_order must lie in [0, 3]");
    if (cfg.max_path_length_m <= 0.0)
        throw ConfigError("max_path_length_m must be positive");
    if (cfg.f0_hz <= 0.0) throw ConfigError("carrier frequency must be positive");

    const std::vector<Blocker> no_blockers;
    const std::vector<Blocker>& active =
        (cfg.mode == TwinMode::dynamic_scene) ? blockers : no_blockers;

    const std::vector<Wall> walls = scene_walls(scene);
    const std::vector<Prism> prisms = build_prisms(scene, active);

    std::vector<TracedPath> out;
    TraceContext ctx;
    ctx.walls = &walls;
    ctx.prisms = &prisms;
    ctx.tx = tx;
    ctx.rx = rx;
    ctx.tx_velocity = tx_velocity;
    ctx.cfg = &cfg;
    ctx.out = &out;
    ctx.images.push_back(tx);
    ctx.cached_normals.reserve(walls.size());
    for (const Wall& w : walls) ctx.cached_normals.push_back(w.outward_normal());

    if ((rx - tx).norm() > kPenetrationEps &&
        (rx - tx).norm() <= cfg.max_path_length_m && !any_occludes(prisms, tx, rx))
        out.push_back(assemble_path({tx, rx}, {}, {}, tx_velocity, cfg));

    if (cfg.max_order >= 1) {
        search_walls(ctx, cfg.max_order);
        if (cfg.ground_reflection) trace_ground_reflection(ctx);
        if (cfg.vehicle_reflections && cfg.mode == TwinMode::dynamic_scene)
            trace_vehicle_faces(ctx, active, static_cast<int>(walls.size()));
    }

    std::stable_sort(out.begin(), out.end(), [](const TracedPath& x, const TracedPath& y) {
        if (x.tuple.delay_s != y.tuple.delay_s) return x.tuple.delay_s < y.tuple.delay_s;
        if (x.tuple.bounce_count != y.tuple.bounce_count)
            return x.tuple.bounce_count < y.tuple.bounce_count;
        return x.tuple.dod_az < y.tuple.dod_az;
    });
    return out;
}

void write_paths_text(const std::string& path, int time_index, int vehicle_id,
                      const std::vector<TracedPath>& paths, bool append) {
    std::FILE* f = std::fopen(path.c_str(), append ? "a" : "w");
    if (!f) throw DataError("cannot open path dump for writing: " + path);
    if (!append) {
        std::fprintf(f, "# chartlab-paths 1\n");
        std::fprintf(f,
                     "# time vehicle path bounce delay_s doppler_hz power dod_az "
                     "dod_el doa_az doa_el length_m walls\n");
    }
    for (size_t i = 0; i < paths.size(); ++i) {
        const PathTuple& t = paths[i].tuple;
        std::string walls;
        if (paths[i].wall_ids.empty()) {
            walls = "-";
        } else {
            char buf[32];
            for (size_t j = 0; j < paths[i].wall_ids.size(); ++j) {
                std::snprintf(buf, sizeof(buf), "%s%d", j ? ";" : "", paths[i].wall_ids[j]);
                walls += buf;
            }
        }
        std::fprintf(f, "%d %d %zu %d %.12e %.9e %.12e %.9f %.9f %.9f %.9f %.6f %s\n",
                     time_index, vehicle_id, i, t.bounce_count, t.delay_s, t.doppler_hz,
                     t.power, t.dod_az, t.dod_el, t.doa_az, t.doa_el, t.path_length_m,
                     walls.c_str());
    }
    if (std::fclose(f) != 0) throw DataError("failed to flush path dump: " + path);
}

} // namespace chartlab
