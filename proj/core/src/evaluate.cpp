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

#include "chartlab/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "chartlab/common.hpp"

namespace chartlab {
namespace {

/// ranks(i, j) = position of j (1-based) in the distance ordering around i,
/// self excluded (0 on the diagonal). Ties break on the lower index so the
/// result is deterministic.
Eigen::MatrixXi neighbor_ranks(const Eigen::MatrixXd& pts) {
    const Eigen::Index n = pts.rows();
    Eigen::MatrixXi ranks = Eigen::MatrixXi::Zero(n, n);
    std::vector<int> order(static_cast<size_t>(n));
    std::vector<double> dist(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            dist[static_cast<size_t>(j)] = (pts.row(i) - pts.row(j)).squaredNorm();
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double da = dist[static_cast<size_t>(a)];
            const double db = dist[static_cast<size_t>(b)];
            if (da != db) return da < db;
            return a < b;
        });
        int r = 0;
        for (int j : order) {
            if (j == static_cast<int>(i)) continue;
            ranks(i, j) = ++r;
        }
    }
    return ranks;
}

void check_metric_inputs(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart,
                         int k) {
    const Eigen::Index n = truth.rows();
    if (chart.rows() != n || n < 2)
        throw DataError("metric inputs must have matching rows, N >= 2");
    if (k < 1 || k >= n) throw ConfigError("neighborhood K must lie in [1, N)");
    if (2 * n - 3 * static_cast<Eigen::Index>(k) - 1 <= 0)
        throw ConfigError("neighborhood K too large for the rank normalization");
}

/// Shared kernel of continuity/trustworthiness: penalize points within the
/// K-neighborhood under `kept` ranks but beyond it under `lost` ranks, by
/// their `lost` rank.
double rank_agreement(const Eigen::MatrixXi& kept, const Eigen::MatrixXi& lost, int k) {
    const Eigen::Index n = kept.rows();
    double penalty = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            if (kept(i, j) <= k && lost(i, j) > k) penalty += lost(i, j) - k;
        }
    const double norm = 2.0 / (static_cast<double>(n) * k * (2.0 * n - 3.0 * k - 1.0));
    return 1.0 - norm * penalty;
}

double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double h = q * static_cast<double>(sorted.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(h));
    const size_t hi = static_cast<size_t>(std::ceil(h));
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

} // namespace

int default_neighborhood(int n) {
    return std::max(1, static_cast<int>(std::ceil(0.01 * n)));
}

double continuity(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, int k) {
    check_metric_inputs(truth, chart, k);
    return rank_agreement(neighbor_ranks(truth), neighbor_ranks(chart), k);
}

double trustworthiness(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, int k) {
    check_metric_inputs(truth, chart, k);
    return rank_agreement(neighbor_ranks(chart), neighbor_ranks(truth), k);
}

double kruskal_stress(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart) {
    const Eigen::Index n = truth.rows();
    if (chart.rows() != n || n < 2)
        throw DataError("kruskal_stress inputs must have matching rows, N >= 2");
    double tt = 0.0, tc = 0.0, cc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dt = (truth.row(i) - truth.row(j)).norm();
            const double dc = (chart.row(i) - chart.row(j)).norm();
            tt += dt * dt;
            tc += dt * dc;
            cc += dc * dc;
        }
    if (!(tt > 0.0)) throw NumericalError("kruskal_stress: all truth points coincide");
    const double beta = cc > 0.0 ? tc / cc : 0.0;
    double resid = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dt = (truth.row(i) - truth.row(j)).norm();
            const double dc = (chart.row(i) - chart.row(j)).norm();
            resid += (dt - beta * dc) * (dt - beta * dc);
        }
    return std::sqrt(resid / tt);
}

LocalizationStats localization_stats(const std::vector<double>& errors) {
    LocalizationStats st;
    st.count = static_cast<int>(errors.size());
    if (errors.empty()) return st;
    std::vector<double> sorted = errors;
    std::sort(sorted.begin(), sorted.end());
    st.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
              static_cast<double>(sorted.size());
    st.median = quantile(sorted, 0.5);
    st.p90 = quantile(sorted, 0.9);
    st.max = sorted.back();
    st.ecdf.reserve(sorted.size());
    for (size_t i = 0; i < sorted.size(); ++i)
        st.ecdf.emplace_back(sorted[i],
                             static_cast<double>(i + 1) / static_cast<double>(sorted.size()));
    return st;
}

MetricsReport localization_report(const Eigen::MatrixXd& truth,
                                  const Eigen::MatrixXd& chart,
                                  const Eigen::MatrixXd& estimates,
                                  const std::vector<char>& los, int k) {
    const Eigen::Index n = truth.rows();
    if (n < 1) throw DataError("localization_report requires at least one sample");
    if (estimates.rows() != n || chart.rows() != n ||
        static_cast<Eigen::Index>(los.size()) != n)
        throw DataError("localization_report inputs must have equal lengths");

    MetricsReport rep;
    rep.n = static_cast<int>(n);
    rep.k_neighbors = k;
    if (n >= 2) {
        rep.continuity = continuity(truth, chart, k);
        rep.trustworthiness = trustworthiness(truth, chart, k);
        rep.kruskal_stress = kruskal_stress(truth, chart);
    } else {
        rep.continuity = 1.0;
        rep.trustworthiness = 1.0;
        rep.kruskal_stress = 0.0;
    }

    std::vector<double> all, in_los, in_nlos;
    all.reserve(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = (truth.row(i).head<2>() - estimates.row(i).head<2>()).norm();
        all.push_back(e);
        (los[static_cast<size_t>(i)] ? in_los : in_nlos).push_back(e);
    }
    rep.all = localization_stats(all);
    rep.los = localization_stats(in_los);
    rep.nlos = localization_stats(in_nlos);
    return rep;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsCsvRow>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw DataError("cannot open metrics csv for writing: " + path);
    bool ok = std::fprintf(f,
                           "scenario,supervision_pct,n,k,ct,ks,tw,loc_mean_m,"
                           "loc_median_m,loc_p90_m,los_mean_m,nlos_mean_m,ks_variant\n") > 0;
    for (const MetricsCsvRow& r : rows) {
        if (!ok) break;
        ok = std::fprintf(f, "%s,%.6g,%d,%d,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%s\n",
                          r.scenario.c_str(), r.supervision_pct, r.report.n,
                          r.report.k_neighbors, r.report.continuity,
                          r.report.kruskal_stress, r.report.trustworthiness,
                          r.report.all.mean, r.report.all.median, r.report.all.p90,
                          r.report.los.mean, r.report.nlos.mean, kKruskalVariant) > 0;
    }
    if (std::fclose(f) != 0 || !ok) throw DataError("failed to write metrics csv: " + path);
}

void write_ecdf_csv(const std::string& path,
                    const std::vector<std::pair<double, double>>& ecdf) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw DataError("cannot open ecdf csv for writing: " + path);
    bool ok = std::fprintf(f, "error_m,fraction\n") > 0;
    for (const auto& [e, frac] : ecdf) {
        if (!ok) break;
        ok = std::fprintf(f, "%.9f,%.9f\n", e, frac) > 0;
    }
    if (std::fclose(f) != 0 || !ok) throw DataError("failed to write ecdf csv: " + path);
}

void write_quartiles_csv(const std::string& path,
                         const std::vector<std::pair<std::string, LocalizationStats>>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw DataError("cannot open quartiles csv for writing: " + path);
    bool ok = std::fprintf(f, "subset,count,min_m,q1_m,median_m,q3_m,p90_m,max_m,mean_m\n") > 0;
    for (const auto& [name, st] : rows) {
        if (!ok) break;
        if (st.count == 0) {
            ok = std::fprintf(f, "%s,0,nan,nan,nan,nan,nan,nan,nan\n", name.c_str()) > 0;
            continue;
        }
        std::vector<double> sorted;
        sorted.reserve(st.ecdf.size());
        for (const auto& [e, frac] : st.ecdf) sorted.push_back(e);
        ok = std::fprintf(f, "%s,%d,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f\n", name.c_str(),
                          st.count, sorted.front(), quantile(sorted, 0.25), st.median,
                          quantile(sorted, 0.75), st.p90, st.max, st.mean) > 0;
    }
    if (std::fclose(f) != 0 || !ok) throw DataError("failed to write quartiles csv: " + path);
}

} // namespace chartlab
