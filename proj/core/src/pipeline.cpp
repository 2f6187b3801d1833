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

#include "chartlab/pipeline.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cinttypes>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chartlab/baselines.hpp"
#include "chartlab/channel.hpp"
#include "chartlab/charting.hpp"
#include "chartlab/common.hpp"
#include "chartlab/features.hpp"
#include "chartlab/raytrace.hpp"
#include "chartlab/scene.hpp"

namespace fs = std::filesystem;

namespace chartlab {

namespace {

std::string join(const std::string& dir, const std::string& rel) {
    return (fs::path(dir) / rel).string();
}

std::string slurp(const std::string& path, const char* what) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw DataError(std::string(what) + " not found: " + path);
    std::string text;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, got);
    std::fclose(f);
    return text;
}

void spew(const std::string& path, const std::string& text) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot open for writing: " + path);
    const bool ok = std::fwrite(text.data(), 1, text.size(), f) == text.size();
    if (std::fclose(f) != 0 || !ok) throw DataError("write failed: " + path);
}

/// key=value lines after a fixed magic first line; '#' lines and blank
/// lines are ignored, duplicate keys rejected.
class KvFile {
public:
    KvFile(const std::string& path, const std::string& magic)
        : path_(path) {
        const std::string text = slurp(path, "metadata file");
        std::size_t start = 0;
        bool first = true;
        while (start <= text.size()) {
            std::size_t end = text.find('\n', start);
            if (end == std::string::npos) end = text.size();
            std::string line = text.substr(start, end - start);
            start = end + 1;
            if (first) {
                if (line != magic)
                    throw DataError("bad magic in " + path + " (expected '" + magic + "')");
                first = false;
                continue;
            }
            if (line.empty() || line[0] == '#') continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw DataError("malformed line in " + path + ": " + line);
            const std::string key = line.substr(0, eq);
            if (!kv_.emplace(key, line.substr(eq + 1)).second)
                throw DataError("duplicate key '" + key + "' in " + path);
        }
        if (first) throw DataError("empty metadata file: " + path);
    }

    const std::string& need(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end())
            throw DataError("missing key '" + key + "' in " + path_);
        return it->second;
    }

    std::uint64_t need_hex(const std::string& key) const {
        const std::string& v = need(key);
        char* end = nullptr;
        errno = 0;
        const std::uint64_t r = std::strtoull(v.c_str(), &end, 16);
        if (errno != 0 || end == v.c_str() || *end != '\0')
            throw DataError("bad hex value for '" + key + "' in " + path_);
        return r;
    }

    std::uint64_t need_u64(const std::string& key) const {
        const std::string& v = need(key);
        char* end = nullptr;
        errno = 0;
        const std::uint64_t r = std::strtoull(v.c_str(), &end, 10);
        if (errno != 0 || end == v.c_str() || *end != '\0')
            throw DataError("bad integer value for '" + key + "' in " + path_);
        return r;
    }

    int need_int(const std::string& key) const {
        return static_cast<int>(need_u64(key));
    }

    double need_double(const std::string& key) const {
        const std::string& v = need(key);
        char* end = nullptr;
        const double r = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0')
            throw DataError("bad numeric value for '" + key + "' in " + path_);
        return r;
    }

    std::vector<int> need_int_list(const std::string& key) const {
        const std::string& v = need(key);
        std::vector<int> out;
        std::size_t start = 0;
        while (start < v.size()) {
            std::size_t end = v.find(',', start);
            if (end == std::string::npos) end = v.size();
            out.push_back(std::atoi(v.substr(start, end - start).c_str()));
            start = end + 1;
        }
        return out;
    }

private:
    std::string path_;
    std::map<std::string, std::string> kv_;
};

std::string int_list(const std::vector<int>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(xs[i]);
    }
    return s;
}

std::string fmt(const char* format, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 1, 2)))
#endif
    ;

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, format);
    const int n = std::vsnprintf(buf, sizeof buf, format, ap);
    va_end(ap);
    if (n < 0 || n >= static_cast<int>(sizeof buf))
        throw DataError("formatted field too long");
    return std::string(buf, static_cast<std::size_t>(n));
}

template <typename T>
void shuffle_in_place(std::vector<T>& xs, Rng& rng) {
    for (std::size_t i = xs.size(); i > 1; --i) {
        const std::size_t j = rng.uniform_int(i);
        std::swap(xs[i - 1], xs[j]);
    }
}

void ensure_dirs(const std::string& out) {
    std::error_code ec;
    for (const char* sub : {"", "cache", "charts", "results"}) {
        const fs::path p = *sub ? fs::path(out) / sub : fs::path(out);
        fs::create_directories(p, ec);
        if (ec) throw DataError("cannot create output directory: " + p.string());
    }
}

std::string dissim_cache_name(std::uint64_t dataset_hash, double eig_floor) {
    return "cache/dissim_" + hash_hex(dataset_hash) + "_" + fmt("%.17g", eig_floor) +
           ".bin";
}

} // namespace

std::string manifest_filename(TwinMode mode) {
    return std::string("manifest_") + mode_name(mode) + ".txt";
}

std::string dataset_filename(TwinMode mode) {
    return std::string("dataset_") + mode_name(mode) + ".bin";
}

std::string run_tag(TwinMode mode, double supervision_pct) {
    return std::string(mode_name(mode)) + "_s" + fmt("%g", supervision_pct);
}

std::string chart_basename(TwinMode mode, double supervision_pct) {
    return "charts/chart_" + run_tag(mode, supervision_pct);
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& stream) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(base >> (8 * i));
    return fnv1a64(stream.data(), stream.size(), fnv1a64(b, sizeof b));
}

DirectoryLock::DirectoryLock(const std::string& dir)
    : path_(join(dir, "chartlab.lock")) {
    // "x" makes creation exclusive, so two writers cannot both win the race.
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f)
        throw DataError("output directory is locked: " + path_ +
                        " exists (another run is writing here; delete the file "
                        "if it is stale)");
    std::fprintf(f, "pid=%ld\n", static_cast<long>(getpid()));
    std::fclose(f);
}

DirectoryLock::~DirectoryLock() { std::remove(path_.c_str()); }

void save_manifest(const std::string& path, const DatasetManifest& m) {
    std::string t = "# chartlab-manifest 1\n";
    t += "config=" + hash_hex(m.config_hash) + "\n";
    t += "mode=" + m.mode + "\n";
    t += "seed=" + fmt("%" PRIu64, m.seed) + "\n";
    t += "dataset=" + m.dataset_file + "\n";
    t += "dataset_hash=" + hash_hex(m.dataset_hash) + "\n";
    t += "scene=" + m.scene_file + "\n";
    t += "snapshots=" + m.snapshots_file + "\n";
    t += "records=" + fmt("%d", m.records) + "\n";
    t += "n_rx=" + fmt("%d", m.n_rx) + "\n";
    t += "labeled=" + fmt("%d", m.labeled) + "\n";
    t += "validation=" + fmt("%d", m.validation) + "\n";
    t += "los_fraction=" + fmt("%.17g", m.los_fraction) + "\n";
    t += "pool=" + fmt("%d", m.pool) + "\n";
    t += "dropped=" + fmt("%d", m.dropped) + "\n";
    t += "labeled_vehicles=" + int_list(m.labeled_vehicles) + "\n";
    t += "validation_vehicles=" + int_list(m.validation_vehicles) + "\n";
    spew(path, t);
}

DatasetManifest load_manifest(const std::string& path) {
    const KvFile kv(path, "# chartlab-manifest 1");
    DatasetManifest m;
    m.config_hash = kv.need_hex("config");
    m.mode = kv.need("mode");
    m.seed = kv.need_u64("seed");
    m.dataset_file = kv.need("dataset");
    m.dataset_hash = kv.need_hex("dataset_hash");
    m.scene_file = kv.need("scene");
    m.snapshots_file = kv.need("snapshots");
    m.records = kv.need_int("records");
    m.n_rx = kv.need_int("n_rx");
    m.labeled = kv.need_int("labeled");
    m.validation = kv.need_int("validation");
    m.los_fraction = kv.need_double("los_fraction");
    m.pool = kv.need_int("pool");
    m.dropped = kv.need_int("dropped");
    m.labeled_vehicles = kv.need_int_list("labeled_vehicles");
    m.validation_vehicles = kv.need_int_list("validation_vehicles");
    return m;
}

void save_chart_meta(const std::string& path, const ChartMeta& m) {
    std::string t = "# chartlab-chart-meta 1\n";
    t += "config=" + hash_hex(m.config_hash) + "\n";
    t += "dataset=" + m.dataset_file + "\n";
    t += "dataset_hash=" + hash_hex(m.dataset_hash) + "\n";
    t += "supervision_pct=" + fmt("%.17g", m.supervision_pct) + "\n";
    t += "chart_seed=" + fmt("%" PRIu64, m.chart_seed) + "\n";
    t += "anchors=" + fmt("%d", m.anchors) + "\n";
    t += "kl_final=" + fmt("%.17g", m.kl_final) + "\n";
    spew(path, t);
}

ChartMeta load_chart_meta(const std::string& path) {
    const KvFile kv(path, "# chartlab-chart-meta 1");
    ChartMeta m;
    m.config_hash = kv.need_hex("config");
    m.dataset_file = kv.need("dataset");
    m.dataset_hash = kv.need_hex("dataset_hash");
    m.supervision_pct = kv.need_double("supervision_pct");
    m.chart_seed = kv.need_u64("chart_seed");
    m.anchors = kv.need_int("anchors");
    m.kl_final = kv.need_double("kl_final");
    return m;
}

namespace {

// ---------------------------------------------------------------------
// generate

DatasetManifest generate_impl(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::uint64_t chash = config_hash(cfg);

    Scene scene = generate_city(derive_seed(cfg.seed, "scene"), cfg.scene);
    scene.bs.array = cfg.bs_array;
    const std::vector<Snapshot> snaps = simulate_traffic(
        scene, derive_seed(cfg.seed, "traffic"), cfg.n_steps, cfg.dt_s, cfg.n_vehicles);

    TraceConfig tr = cfg.trace;
    tr.f0_hz = cfg.channel.f0_hz; // single source of truth for the carrier
    tr.mode = cfg.mode;

    // Candidate (snapshot, vehicle) pairs in a seeded shuffled order. The
    // stream is independent of the twin mode, so static and dynamic runs of
    // the same seed visit the same candidates.
    std::vector<std::pair<int, int>> cand;
    cand.reserve(static_cast<std::size_t>(cfg.n_steps) * cfg.n_vehicles);
    for (int t = 0; t < cfg.n_steps; ++t)
        for (int v = 0; v < cfg.n_vehicles; ++v) cand.emplace_back(t, v);
    Rng sel(derive_seed(cfg.seed, "selection"));
    shuffle_in_place(cand, sel);

    std::optional<ChannelEstimator> estimator;
    if (cfg.estimate)
        estimator.emplace(cfg.ue_array.size(), cfg.channel.n_taps(), cfg.pilot,
                          cfg.bs_array);

    Dataset ds;
    ds.n_rx = cfg.bs_array.size();
    ds.samples.reserve(static_cast<std::size_t>(cfg.n_samples));
    int dropped = 0;

    for (const auto& [t, vi] : cand) {
        if (ds.size() >= cfg.n_samples) break;
        const Snapshot& snap = snaps[static_cast<std::size_t>(t)];
        const VehicleState& v = snap.vehicles[static_cast<std::size_t>(vi)];

        std::vector<Blocker> blockers;
        if (cfg.mode == TwinMode::dynamic_scene) {
            blockers.reserve(snap.vehicles.size());
            for (const VehicleState& w : snap.vehicles)
                blockers.push_back(blocker_from_vehicle(w));
        }

        const Eigen::Vector3d tx = ve_antenna_position(v);
        const Eigen::Vector3d vel(v.speed * std::cos(v.heading),
                                  v.speed * std::sin(v.heading), 0.0);
        const std::vector<TracedPath> traced =
            trace_paths(scene, tx, vel, scene.bs.position, blockers, tr);
        if (traced.empty()) {
            // Deep shadow: nothing reaches the BS, so there is no CSI to
            // record. Skipped candidates are counted in the manifest.
            ++dropped;
            continue;
        }

        bool los = false;
        double tau_min = traced.front().tuple.delay_s;
        double best_power = -1.0, best_delay = 0.0;
        std::vector<PathTuple> tuples;
        tuples.reserve(traced.size());
        for (const TracedPath& p : traced) {
            tuples.push_back(p.tuple);
            los = los || p.tuple.bounce_count == 0;
            tau_min = std::min(tau_min, p.tuple.delay_s);
            if (p.tuple.power > best_power) {
                best_power = p.tuple.power;
                best_delay = p.tuple.delay_s;
            }
        }
        // The receiver synchronizes to the first arrival; the tap grid
        // spans excess delay. The common phase rotation this removes is
        // invisible to the covariance features.
        for (PathTuple& p : tuples) p.delay_s -= tau_min;

        ArrayConfig tx_array = cfg.ue_array;
        tx_array.boresight_az = v.heading; // panel mounted along the roof

        const std::string sample_key =
            std::to_string(t) + "/" + std::to_string(v.vehicle_id);
        std::optional<std::uint64_t> wseed;
        if (cfg.wssus) wseed = derive_seed(cfg.seed, "wssus/" + sample_key);

        ChannelTaps taps = synthesize_taps(tuples, tx_array, cfg.bs_array,
                                           t * cfg.dt_s, cfg.channel, wseed);
        if (estimator)
            taps = estimator->estimate(taps, cfg.noise,
                                       derive_seed(cfg.seed, "noise/" + sample_key));

        CsiSample s;
        s.covariance = csi_covariance(taps_to_frequency(taps, cfg.channel));
        s.position = tx;
        s.vehicle_id = v.vehicle_id;
        s.time_index = t;
        s.los = los;
        s.strongest_delay_s = best_delay;
        ds.samples.push_back(std::move(s));
    }

    if (ds.size() < cfg.n_samples)
        throw DataError(fmt("candidate pool exhausted: %d of %d samples reachable "
                            "(%d candidates had no path; grow traffic or relax the "
                            "trace limits)",
                            ds.size(), cfg.n_samples, dropped));

    if (cfg.per_point_split)
        apply_pointwise_split(ds, cfg.validation_fraction, derive_seed(cfg.seed, "split"));
    else
        apply_trajectory_split(ds, cfg.validation_fraction, derive_seed(cfg.seed, "split"));

    DatasetManifest m;
    m.config_hash = chash;
    m.mode = mode_name(cfg.mode);
    m.seed = cfg.seed;
    m.dataset_file = dataset_filename(cfg.mode);
    m.scene_file = "scene.txt";
    m.snapshots_file = "snapshots.txt";
    m.records = ds.size();
    m.n_rx = ds.n_rx;
    m.labeled = ds.labeled_count();
    m.validation = ds.size() - ds.labeled_count();
    m.los_fraction = ds.los_fraction();
    m.pool = static_cast<int>(cand.size());
    m.dropped = dropped;

    if (!cfg.per_point_split) {
        // Whole trajectories land on one side, so the per-vehicle lists are
        // well defined and let anyone audit the split from the manifest.
        std::map<int, bool> side;
        for (const CsiSample& s : ds.samples) side[s.vehicle_id] = s.labeled;
        for (const auto& [vid, labeled] : side)
            (labeled ? m.labeled_vehicles : m.validation_vehicles).push_back(vid);
    }

    save_scene(scene, join(cfg.out_dir, m.scene_file));
    save_snapshots(snaps, join(cfg.out_dir, m.snapshots_file));
    const std::string dpath = join(cfg.out_dir, m.dataset_file);
    save_dataset(dpath, ds);
    m.dataset_hash = file_hash(dpath);
    save_manifest(join(cfg.out_dir, manifest_filename(cfg.mode)), m);
    return m;
}

// ---------------------------------------------------------------------
// chart

/// Loads the manifest and dataset for cfg.mode, refusing stale inputs.
Dataset load_checked_dataset(const ExperimentConfig& cfg, DatasetManifest* mout) {
    const std::string mpath = join(cfg.out_dir, manifest_filename(cfg.mode));
    DatasetManifest m = load_manifest(mpath);
    if (m.config_hash != config_hash(cfg))
        throw DataError("config hash mismatch: " + mpath + " was produced by " +
                        hash_hex(m.config_hash) + " but the current config hashes to " +
                        hash_hex(config_hash(cfg)) +
                        " (re-run generate or restore the original flags)");
    const std::string dpath = join(cfg.out_dir, m.dataset_file);
    if (file_hash(dpath) != m.dataset_hash)
        throw DataError("dataset content hash mismatch: " + dpath +
                        " does not match its manifest (re-run generate)");
    Dataset ds = load_dataset(dpath);
    if (ds.size() != m.records)
        throw DataError("dataset record count mismatch against manifest: " + dpath);
    if (mout) *mout = m;
    return ds;
}

/// The anchor subset for one supervision level: a seeded draw from the
/// labeled pool, shared verbatim by the chart and the fingerprint baseline.
std::vector<int> anchor_indices(const ExperimentConfig& cfg, const Dataset& ds,
                                double supervision_pct) {
    std::vector<int> pool;
    for (int i = 0; i < ds.size(); ++i)
        if (ds.samples[static_cast<std::size_t>(i)].labeled) pool.push_back(i);

    int want = static_cast<int>(std::llround(supervision_pct / 100.0 * ds.size()));
    if (want > static_cast<int>(pool.size())) {
        // The trajectory split can overshoot the validation fraction by up
        // to one trajectory, leaving slightly fewer labeled samples than
        // the top supervision level asks for. Use the whole pool then.
        std::fprintf(stderr,
                     "chartlab: supervision %.6g%% wants %d anchors, labeled pool "
                     "has %zu; using the whole pool\n",
                     supervision_pct, want, pool.size());
        want = static_cast<int>(pool.size());
    }
    if (want < 2)
        throw ConfigError(fmt("supervision %.6g%% yields %d anchors; at least 2 "
                              "are needed to span a chart",
                              supervision_pct, want));

    Rng rng(derive_seed(cfg.seed, "anchors/" + run_tag(cfg.mode, supervision_pct)));
    shuffle_in_place(pool, rng);
    pool.resize(static_cast<std::size_t>(want));
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::string chart_impl(const ExperimentConfig& cfg, double supervision_pct) {
    DatasetManifest m;
    const Dataset ds = load_checked_dataset(cfg, &m);
    const int n = ds.size();

    // O(N^2) dissimilarities are cached on disk; every supervision level of
    // a sweep reuses the same matrix.
    const std::string cpath =
        join(cfg.out_dir, dissim_cache_name(m.dataset_hash, cfg.eig_floor));
    Eigen::MatrixXd d;
    if (fs::exists(cpath)) {
        d = load_dissimilarity(cpath);
        if (d.rows() != n)
            throw DataError("dissimilarity cache does not match the dataset: " +
                            cpath + " (delete the cache entry)");
    } else {
        std::vector<Eigen::MatrixXcd> covs;
        covs.reserve(static_cast<std::size_t>(n));
        for (const CsiSample& s : ds.samples) covs.push_back(s.covariance);
        d = dissimilarity_matrix(covs, cfg.eig_floor);
        save_dissimilarity(cpath, d);
    }

    const std::vector<int> anchors = anchor_indices(cfg, ds, supervision_pct);
    LabeledSplit split;
    split.labeled = anchors;
    split.labeled_positions.resize(static_cast<Eigen::Index>(anchors.size()), 2);
    {
        std::vector<char> is_anchor(static_cast<std::size_t>(n), 0);
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            is_anchor[static_cast<std::size_t>(anchors[a])] = 1;
            split.labeled_positions.row(static_cast<Eigen::Index>(a)) =
                ds.samples[static_cast<std::size_t>(anchors[a])].position.head<2>().transpose();
        }
        for (int i = 0; i < n; ++i)
            if (!is_anchor[static_cast<std::size_t>(i)]) split.unlabeled.push_back(i);
    }

    const std::string tag = run_tag(cfg.mode, supervision_pct);
    const std::uint64_t chart_seed = derive_seed(cfg.seed, "tsne/" + tag);
    const Chart chart = fit(d, split, cfg.charting, chart_seed);

    const std::string base = join(cfg.out_dir, chart_basename(cfg.mode, supervision_pct));
    save_chart(base + ".txt", chart);
    save_loss_trace(join(cfg.out_dir, "charts/loss_" + tag + ".csv"), chart.kl_trace);

    ChartMeta meta;
    meta.config_hash = m.config_hash;
    meta.dataset_file = m.dataset_file;
    meta.dataset_hash = m.dataset_hash;
    meta.supervision_pct = supervision_pct;
    meta.chart_seed = chart_seed;
    meta.anchors = static_cast<int>(anchors.size());
    meta.kl_final = chart.kl_trace.empty() ? 0.0 : chart.kl_trace.back();
    save_chart_meta(base + ".meta", meta);
    return base + ".txt";
}

// ---------------------------------------------------------------------
// evaluate

MetricsCsvRow evaluate_impl(const ExperimentConfig& cfg, double supervision_pct) {
    const std::string base = join(cfg.out_dir, chart_basename(cfg.mode, supervision_pct));
    const ChartMeta meta = load_chart_meta(base + ".meta");
    if (meta.config_hash != config_hash(cfg))
        throw DataError("chart " + base + ".txt was fitted under config " +
                        hash_hex(meta.config_hash) + ", current config is " +
                        hash_hex(config_hash(cfg)) + "; refusing to mix them");
    const std::string dpath = join(cfg.out_dir, meta.dataset_file);
    if (file_hash(dpath) != meta.dataset_hash)
        throw DataError("dataset " + dpath + " changed since the chart was fitted; "
                        "refusing to evaluate against it");

    const Dataset ds = load_dataset(dpath);
    const Chart chart = load_chart(base + ".txt");
    const int n = ds.size();
    if (chart.size() != n)
        throw DataError("chart and dataset sizes differ: " + base + ".txt");

    Eigen::MatrixXd truth(n, 2), est(n, 2);
    std::vector<char> los(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        const CsiSample& s = ds.samples[static_cast<std::size_t>(i)];
        truth.row(i) = s.position.head<2>().transpose();
        est.row(i) = localize(chart, i).transpose();
        los[static_cast<std::size_t>(i)] = s.los;
    }

    const int k = cfg.k_neighbors > 0 ? cfg.k_neighbors : default_neighborhood(n);
    MetricsReport rep = localization_report(truth, est, est, los, k);

    // Rank and stress metrics describe the whole chart; positioning error is
    // only meaningful on samples the fit never saw as anchors, so the error
    // statistics are recomputed over the validation side.
    std::vector<double> v_all, v_los, v_nlos;
    for (int i = 0; i < n; ++i) {
        const CsiSample& s = ds.samples[static_cast<std::size_t>(i)];
        if (s.labeled) continue;
        const double e = (truth.row(i) - est.row(i)).norm();
        v_all.push_back(e);
        (s.los ? v_los : v_nlos).push_back(e);
    }
    if (v_all.empty())
        throw DataError("no validation samples to evaluate (validation fraction 0?)");
    rep.all = localization_stats(v_all);
    rep.los = localization_stats(v_los);
    rep.nlos = localization_stats(v_nlos);

    const std::string tag = run_tag(cfg.mode, supervision_pct);
    MetricsCsvRow row;
    row.scenario = mode_name(cfg.mode);
    row.supervision_pct = supervision_pct;
    row.report = rep;
    write_metrics_csv(join(cfg.out_dir, "results/metrics_" + tag + ".csv"), {row});
    write_ecdf_csv(join(cfg.out_dir, "results/ecdf_" + tag + ".csv"), rep.all.ecdf);
    write_quartiles_csv(join(cfg.out_dir, "results/quartiles_" + tag + ".csv"),
                        {{"all", rep.all}, {"los", rep.los}, {"nlos", rep.nlos}});

    std::string t = "# chartlab-eval-meta 1\n";
    t += "config=" + hash_hex(meta.config_hash) + "\n";
    t += "chart=" + chart_basename(cfg.mode, supervision_pct) + ".txt\n";
    t += "dataset_hash=" + hash_hex(meta.dataset_hash) + "\n";
    spew(join(cfg.out_dir, "results/eval_" + tag + ".meta"), t);
    return row;
}

// ---------------------------------------------------------------------
// baseline

struct BaselineRow {
    std::string method;
    double supervision_pct = 0.0; // 0 = not applicable
    LocalizationStats stats;
    int unlocalizable = 0;
};

void write_baseline_csv(const std::string& path, const std::vector<BaselineRow>& rows) {
    std::string t = "method,supervision_pct,count,unlocalizable,mean_m,median_m,"
                    "p90_m,max_m\n";
    for (const BaselineRow& r : rows)
        t += fmt("%s,%.6g,%d,%d,%.9f,%.9f,%.9f,%.9f\n", r.method.c_str(),
                 r.supervision_pct, r.stats.count, r.unlocalizable, r.stats.mean,
                 r.stats.median, r.stats.p90, r.stats.max);
    spew(path, t);
}

void baseline_impl(const ExperimentConfig& cfg) {
    DatasetManifest m;
    const Dataset ds = load_checked_dataset(cfg, &m);
    const Scene scene = load_scene(join(cfg.out_dir, m.scene_file));

    std::vector<double> rssi(static_cast<std::size_t>(ds.size()));
    std::vector<int> validation;
    for (int i = 0; i < ds.size(); ++i) {
        rssi[static_cast<std::size_t>(i)] =
            rssi_of(ds.samples[static_cast<std::size_t>(i)].covariance);
        if (!ds.samples[static_cast<std::size_t>(i)].labeled) validation.push_back(i);
    }
    if (validation.empty())
        throw DataError("no validation samples for the baselines");

    std::vector<BaselineRow> rows;

    // RSSI fingerprinting, trained on exactly the chart's anchor set per
    // supervision level so the comparison is like for like.
    for (double pct : cfg.supervision_pct) {
        const std::vector<int> anchors = anchor_indices(cfg, ds, pct);
        std::vector<Eigen::Vector2d> pos;
        std::vector<double> train_rssi;
        pos.reserve(anchors.size());
        train_rssi.reserve(anchors.size());
        for (int a : anchors) {
            pos.push_back(ds.samples[static_cast<std::size_t>(a)].position.head<2>());
            train_rssi.push_back(rssi[static_cast<std::size_t>(a)]);
        }
        const FingerprintDb db = fingerprint_train(pos, train_rssi, cfg.fingerprint);

        std::vector<double> errs;
        errs.reserve(validation.size());
        for (int i : validation) {
            const Eigen::Vector2d hat =
                fingerprint_locate(db, rssi[static_cast<std::size_t>(i)],
                                   cfg.fingerprint.k_f);
            errs.push_back(
                (hat - ds.samples[static_cast<std::size_t>(i)].position.head<2>())
                    .norm());
        }
        BaselineRow r;
        r.method = "fingerprint";
        r.supervision_pct = pct;
        r.stats = localization_stats(errs);
        rows.push_back(r);
        write_ecdf_csv(join(cfg.out_dir, "results/baseline_ecdf_fingerprint_" +
                                             run_tag(cfg.mode, pct) + ".csv"),
                       rows.back().stats.ecdf);
    }

    // Single-anchor MUSIC needs no training data at all.
    {
        std::vector<double> errs;
        int unloc = 0;
        for (int i : validation) {
            const CsiSample& s = ds.samples[static_cast<std::size_t>(i)];
            const MusicResult r = music_locate(s.covariance, cfg.music, cfg.bs_array,
                                               scene.bs.position, s.strongest_delay_s);
            if (!r.localizable) {
                ++unloc;
                continue;
            }
            errs.push_back((r.position - s.position.head<2>()).norm());
        }
        BaselineRow r;
        r.method = "music";
        r.stats = localization_stats(errs);
        r.unlocalizable = unloc;
        rows.push_back(r);
        write_ecdf_csv(join(cfg.out_dir, std::string("results/baseline_ecdf_music_") +
                                             mode_name(cfg.mode) + ".csv"),
                       rows.back().stats.ecdf);
    }

    write_baseline_csv(
        join(cfg.out_dir, std::string("results/baseline_") + mode_name(cfg.mode) + ".csv"),
        rows);

    std::string t = "# chartlab-baseline-meta 1\n";
    t += "config=" + hash_hex(m.config_hash) + "\n";
    t += "dataset_hash=" + hash_hex(m.dataset_hash) + "\n";
    spew(join(cfg.out_dir, std::string("results/baseline_") + mode_name(cfg.mode) + ".meta"),
         t);
}

} // namespace

// ---------------------------------------------------------------------
// public entry points (each takes the output-directory lock)

DatasetManifest cmd_generate(const ExperimentConfig& cfg) {
    cfg.validate();
    ensure_dirs(cfg.out_dir);
    DirectoryLock lock(cfg.out_dir);
    return generate_impl(cfg);
}

std::string cmd_chart(const ExperimentConfig& cfg, double supervision_pct) {
    cfg.validate();
    ensure_dirs(cfg.out_dir);
    DirectoryLock lock(cfg.out_dir);
    return chart_impl(cfg, supervision_pct);
}

MetricsCsvRow cmd_evaluate(const ExperimentConfig& cfg, double supervision_pct) {
    cfg.validate();
    ensure_dirs(cfg.out_dir);
    DirectoryLock lock(cfg.out_dir);
    return evaluate_impl(cfg, supervision_pct);
}

void cmd_baseline(const ExperimentConfig& cfg) {
    cfg.validate();
    ensure_dirs(cfg.out_dir);
    DirectoryLock lock(cfg.out_dir);
    baseline_impl(cfg);
}

void cmd_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    ensure_dirs(cfg.out_dir);
    DirectoryLock lock(cfg.out_dir);

    std::vector<MetricsCsvRow> rows;
    std::vector<std::string> outputs; // out-dir relative, in creation order
    std::uint64_t hash_static = 0, hash_dynamic = 0;

    for (TwinMode mode : {TwinMode::static_scene, TwinMode::dynamic_scene}) {
        ExperimentConfig c = cfg;
        c.mode = mode;
        (mode == TwinMode::static_scene ? hash_static : hash_dynamic) = config_hash(c);

        generate_impl(c);
        outputs.push_back(manifest_filename(mode));
        outputs.push_back(dataset_filename(mode));

        for (double pct : c.supervision_pct) {
            chart_impl(c, pct);
            rows.push_back(evaluate_impl(c, pct));
            const std::string tag = run_tag(mode, pct);
            outputs.push_back(chart_basename(mode, pct) + ".txt");
            outputs.push_back(chart_basename(mode, pct) + ".meta");
            outputs.push_back("charts/loss_" + tag + ".csv");
            outputs.push_back("results/metrics_" + tag + ".csv");
            outputs.push_back("results/ecdf_" + tag + ".csv");
            outputs.push_back("results/quartiles_" + tag + ".csv");
        }

        baseline_impl(c);
        outputs.push_back(std::string("results/baseline_") + mode_name(mode) + ".csv");
    }
    outputs.push_back("scene.txt");
    outputs.push_back("snapshots.txt");

    write_metrics_csv(join(cfg.out_dir, "results/sweep_metrics.csv"), rows);
    outputs.push_back("results/sweep_metrics.csv");

    std::string t = "# chartlab-sweep 1\n";
    t += "config_static=" + hash_hex(hash_static) + "\n";
    t += "config_dynamic=" + hash_hex(hash_dynamic) + "\n";
    for (const std::string& rel : outputs)
        t += "file=" + hash_hex(file_hash(join(cfg.out_dir, rel))) + " " + rel + "\n";
    spew(join(cfg.out_dir, "results/sweep_manifest.txt"), t);
}

} // namespace chartlab
