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
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace chartlab {

/// Identifier of the Kruskal stress variant emitted in reports; the value is
/// meaningless without it since stress definitions differ across the
/// literature.
inline constexpr const char* kKruskalVariant = "ks-optimal-scale-1";

/// Error statistics of one sample subset.
struct LocalizationStats {
    int count = 0;
    double mean = 0.0;
    double median = 0.0;
    double p90 = 0.0;
    double max = 0.0;
    std::vector<std::pair<double, double>> ecdf;  // sorted (error m, fraction)
};

struct MetricsReport {
    int n = 0;
    int k_neighbors = 0;
    double continuity = 0.0;
    double trustworthiness = 0.0;
    double kruskal_stress = 0.0;
    LocalizationStats all, los, nlos;
};

/// Default CT/TW neighborhood: ceil(0.01 N), at least 1.
int default_neighborhood(int n);

/// Rank-based neighborhood agreement, 1 = perfect. Penalizes true K-neighbors
/// missing from the chart neighborhood by their chart rank.
double continuity(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, int k);

/// Counterpart of continuity with the two spaces exchanged: penalizes chart
/// K-neighbors that are not true K-neighbors by their true-space rank.
double trustworthiness(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, int k);

/// KS = sqrt( sum (d_t - b* d_c)^2 / sum d_t^2 ) over unordered pairs, with
/// the least-squares optimal scale b* = sum(d_t d_c) / sum(d_c^2).
double kruskal_stress(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart);

/// Summary statistics of a raw error list (need not be sorted).
LocalizationStats localization_stats(const std::vector<double>& errors);

/// Full report: CT/TW/KS of the chart against true positions plus 2D
/// localization error statistics split by LoS condition.
MetricsReport localization_report(const Eigen::MatrixXd& truth,
                                  const Eigen::MatrixXd& chart,
                                  const Eigen::MatrixXd& estimates,
                                  const std::vector<char>& los, int k);

/// One CSV row per evaluated configuration, Table-style column order
/// (CT, KS, TW, localization error).
struct MetricsCsvRow {
    std::string scenario;       // "static" or "dynamic"
    double supervision_pct = 0;
    MetricsReport report;
};
void write_metrics_csv(const std::string& path, const std::vector<MetricsCsvRow>& rows);
void write_ecdf_csv(const std::string& path,
                    const std::vector<std::pair<double, double>>& ecdf);
void write_quartiles_csv(const std::string& path,
                         const std::vector<std::pair<std::string, LocalizationStats>>& rows);

} // namespace chartlab
