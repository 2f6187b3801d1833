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

#include "chartlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <numeric>

namespace chartlab {
namespace {

constexpr char kDatasetMagic[8] = {'C', 'L', 'D', 'S', '0', '0', '0', '1'};

void write_or_throw(std::FILE* f, const void* data, size_t bytes, const std::string& path) {
    if (std::fwrite(data, 1, bytes, f) != bytes) {
        std::fclose(f);
        throw DataError("short write on dataset file: " + path);
    }
}

void read_or_throw(std::FILE* f, void* data, size_t bytes, const std::string& path) {
    if (std::fread(data, 1, bytes, f) != bytes) {
        std::fclose(f);
        throw DataError("truncated dataset file: " + path);
    }
}

} // namespace

int Dataset::labeled_count() const {
    int l = 0;
    for (const CsiSample& s : samples) l += s.labeled ? 1 : 0;
    return l;
}

double Dataset::los_fraction() const {
    if (samples.empty()) return 0.0;
    int c = 0;
    for (const CsiSample& s : samples) c += s.los ? 1 : 0;
    return static_cast<double>(c) / static_cast<double>(samples.size());
}

void save_dataset(const std::string& path, const Dataset& ds) {
    if (ds.n_rx < 1) throw DataError("dataset has no antenna dimension");
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot open dataset file for writing: " + path);

    write_or_throw(f, kDatasetMagic, 8, path);
    const std::uint64_t n = static_cast<std::uint64_t>(ds.samples.size());
    const std::uint64_t n_rx = static_cast<std::uint64_t>(ds.n_rx);
    const std::uint64_t n_labeled = static_cast<std::uint64_t>(ds.labeled_count());
    write_or_throw(f, &n, sizeof(n), path);
    write_or_throw(f, &n_rx, sizeof(n_rx), path);
    write_or_throw(f, &n_labeled, sizeof(n_labeled), path);

    std::vector<double> buf(static_cast<size_t>(ds.n_rx) * ds.n_rx * 2);
    for (const CsiSample& s : ds.samples) {
        if (s.covariance.rows() != ds.n_rx || s.covariance.cols() != ds.n_rx) {
            std::fclose(f);
            throw DataError("sample covariance shape mismatch");
        }
        size_t k = 0;
        for (int i = 0; i < ds.n_rx; ++i)
            for (int j = 0; j < ds.n_rx; ++j) {
                buf[k++] = s.covariance(i, j).real();
                buf[k++] = s.covariance(i, j).imag();
            }
        write_or_throw(f, buf.data(), buf.size() * sizeof(double), path);
        double pos[3] = {s.position.x(), s.position.y(), s.position.z()};
        write_or_throw(f, pos, sizeof(pos), path);
        const std::int32_t ids[2] = {s.vehicle_id, s.time_index};
        write_or_throw(f, ids, sizeof(ids), path);
        const std::uint8_t flags[2] = {static_cast<std::uint8_t>(s.los ? 1 : 0),
                                       static_cast<std::uint8_t>(s.labeled ? 1 : 0)};
        write_or_throw(f, flags, sizeof(flags), path);
        write_or_throw(f, &s.strongest_delay_s, sizeof(double), path);
    }
    if (std::fclose(f) != 0) throw DataError("failed to flush dataset file: " + path);
}

Dataset load_dataset(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw DataError("cannot open dataset file: " + path);

    char magic[8];
    read_or_throw(f, magic, 8, path);
    if (std::memcmp(magic, kDatasetMagic, 8) != 0) {
        std::fclose(f);
        throw DataError("not a dataset file: " + path);
    }
    std::uint64_t n = 0, n_rx = 0, n_labeled = 0;
    read_or_throw(f, &n, sizeof(n), path);
    read_or_throw(f, &n_rx, sizeof(n_rx), path);
    read_or_throw(f, &n_labeled, sizeof(n_labeled), path);
    if (n_rx < 1 || n_rx > 4096 || n > (1u << 24)) {
        std::fclose(f);
        throw DataError("implausible dataset header: " + path);
    }

    Dataset ds;
    ds.n_rx = static_cast<int>(n_rx);
    ds.samples.resize(n);
    std::vector<double> buf(static_cast<size_t>(n_rx) * n_rx * 2);
    for (CsiSample& s : ds.samples) {
        read_or_throw(f, buf.data(), buf.size() * sizeof(double), path);
        s.covariance.resize(static_cast<Eigen::Index>(n_rx), static_cast<Eigen::Index>(n_rx));
        size_t k = 0;
        for (Eigen::Index i = 0; i < s.covariance.rows(); ++i)
            for (Eigen::Index j = 0; j < s.covariance.cols(); ++j) {
                const double re = buf[k++];
                const double im = buf[k++];
                s.covariance(i, j) = cplx(re, im);
            }
        double pos[3];
        read_or_throw(f, pos, sizeof(pos), path);
        s.position = Eigen::Vector3d(pos[0], pos[1], pos[2]);
        std::int32_t ids[2];
        read_or_throw(f, ids, sizeof(ids), path);
        s.vehicle_id = ids[0];
        s.time_index = ids[1];
        std::uint8_t flags[2];
        read_or_throw(f, flags, sizeof(flags), path);
        s.los = flags[0] != 0;
        s.labeled = flags[1] != 0;
        read_or_throw(f, &s.strongest_delay_s, sizeof(double), path);
    }
    std::fclose(f);
    if (static_cast<std::uint64_t>(ds.labeled_count()) != n_labeled)
        throw DataError("dataset header labeled count mismatch: " + path);
    return ds;
}

void write_dataset_text(const std::string& path, const Dataset& ds) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw DataError("cannot open dataset text export for writing: " + path);
    bool ok = std::fprintf(f, "# chartlab-dataset-text 1\n") > 0;
    ok = ok && std::fprintf(f, "# n %d n_rx %d labeled %d\n", ds.size(), ds.n_rx,
                            ds.labeled_count()) > 0;
    ok = ok && std::fprintf(f, "# index vehicle time x y z los labeled "
                            "strongest_delay_s cov_trace\n") > 0;
    for (size_t i = 0; i < ds.samples.size() && ok; ++i) {
        const CsiSample& s = ds.samples[i];
        ok = std::fprintf(f, "%zu %d %d %.9f %.9f %.9f %d %d %.12e %.12e\n", i,
                          s.vehicle_id, s.time_index, s.position.x(), s.position.y(),
                          s.position.z(), s.los ? 1 : 0, s.labeled ? 1 : 0,
                          s.strongest_delay_s, s.covariance.real().trace()) > 0;
    }
    if (std::fclose(f) != 0 || !ok)
        throw DataError("failed to write dataset text export: " + path);
}

namespace {

void apply_split_flags(Dataset& ds, const std::vector<char>& validation) {
    for (size_t i = 0; i < ds.samples.size(); ++i)
        ds.samples[i].labeled = validation[i] == 0;
}

} // namespace

void apply_trajectory_split(Dataset& ds, double validation_fraction, std::uint64_t seed) {
    if (validation_fraction < 0.0 || validation_fraction >= 1.0)
        throw ConfigError("validation fraction must lie in [0, 1)");
    if (ds.samples.empty()) throw DataError("cannot split an empty dataset");

    // Trajectories keyed by vehicle id, in ascending id order for determinism.
    std::map<int, std::vector<size_t>> trajectories;
    for (size_t i = 0; i < ds.samples.size(); ++i)
        trajectories[ds.samples[i].vehicle_id].push_back(i);

    std::vector<int> ids;
    ids.reserve(trajectories.size());
    for (const auto& [id, members] : trajectories) ids.push_back(id);

    Rng rng(seed);
    for (size_t i = ids.size(); i > 1; --i)
        std::swap(ids[i - 1], ids[rng.uniform_int(i)]);

    const size_t target =
        static_cast<size_t>(std::llround(validation_fraction * ds.samples.size()));
    std::vector<char> validation(ds.samples.size(), 0);
    size_t assigned = 0;
    for (int id : ids) {
        if (assigned >= target) break;
        for (size_t idx : trajectories[id]) validation[idx] = 1;
        assigned += trajectories[id].size();
    }
    apply_split_flags(ds, validation);
}

void apply_pointwise_split(Dataset& ds, double validation_fraction, std::uint64_t seed) {
    if (validation_fraction < 0.0 || validation_fraction >= 1.0)
        throw ConfigError("validation fraction must lie in [0, 1)");
    if (ds.samples.empty()) throw DataError("cannot split an empty dataset");

    std::vector<size_t> order(ds.samples.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_int(i)]);

    const size_t target =
        static_cast<size_t>(std::llround(validation_fraction * ds.samples.size()));
    std::vector<char> validation(ds.samples.size(), 0);
    for (size_t i = 0; i < target && i < order.size(); ++i) validation[order[i]] = 1;
    apply_split_flags(ds, validation);
}

std::uint64_t file_hash(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw DataError("cannot open file for hashing: " + path);
    std::uint64_t h = 14695981039346656037ull;
    unsigned char buf[65536];
    size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0)
        for (size_t i = 0; i < got; ++i) {
            h ^= buf[i];
            h *= 1099511628211ull;
        }
    const bool bad = std::ferror(f) != 0;
    std::fclose(f);
    if (bad) throw DataError("read error while hashing: " + path);
    return h;
}

} // namespace chartlab
