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

#include <Eigen/Dense>

namespace chartlab {

enum class AnchorMode { hard, penalty };

struct ChartingConfig {
    double perplexity = 400.0;    // t-SNE target neighborhood size k_t
    double momentum = 0.6;
    double learning_rate = 100.0;
    int iterations = 1500;
    AnchorMode anchor_mode = AnchorMode::hard;
    double penalty_weight = 10.0;  // mu, quadratic anchor penalty (penalty mode)
    double norm_scale_m = 0.0;     // meters per chart unit; 0 = labeled bbox diagonal
    double exaggeration = 1.0;     // early-exaggeration factor, 1 disables
    int exaggeration_iters = 0;

    void validate(int n_samples) const;  // throws ConfigError
};

/// Index split into anchored (labeled) and free (unlabeled) samples.
struct LabeledSplit {
    std::vector<int> labeled;
    std::vector<int> unlabeled;
    Eigen::MatrixXd labeled_positions;  // |labeled| x 2, meters, same order

    int total() const { return static_cast<int>(labeled.size() + unlabeled.size()); }
};

/// Low-dimensional embedding plus the affine chart-to-meters transform.
struct Chart {
    Eigen::MatrixXd z;             // N x 2, chart units
    std::vector<char> anchored;    // N flags
    Eigen::MatrixXd anchor_m;      // N x 2, meters; rows valid where anchored
    double scale_m = 1.0;
    Eigen::Vector2d offset_m{0.0, 0.0};
    AnchorMode anchor_mode = AnchorMode::hard;
    std::vector<double> kl_trace;  // kl_trace[t] = KL before update t; last = final

    int size() const { return static_cast<int>(z.rows()); }
};

/// Per-row Gaussian conditionals calibrated to the target perplexity.
struct Conditionals {
    Eigen::MatrixXd p;                  // p(i, j) = p_{j|i}, zero diagonal
    Eigen::VectorXd sigma;              // per-row bandwidth (inf on degenerate rows)
    std::vector<int> degenerate_rows;   // rows with all-equal distances
};

/// Row-wise bisection on the Gaussian bandwidth so every row's perplexity
/// matches `perplexity` within 1e-4 relative (the search itself converges
/// far tighter; 1e-4 is the guaranteed bound). Rows whose off-diagonal
/// distances are all equal get uniform conditionals and are reported instead
/// of failing. Throws NumericalError (with the row index) on non-convergence
/// after 200 steps.
Conditionals calibrate_conditionals(const Eigen::MatrixXd& d, double perplexity);

/// P = (C + C^T) / 2, renormalized to unit total mass, off-diagonal entries
/// floored at 1e-12 (and renormalized once more so the total stays 1).
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& conditionals);

/// Student-t joint distribution of the embedding:
/// q_ij = (1 + ||z_i - z_j||^2)^{-1} / sum_{k != l} (1 + ||z_k - z_l||^2)^{-1}.
Eigen::MatrixXd q_matrix(const Eigen::MatrixXd& z);

/// KL(P || Q) over ordered pairs, skipping zero-P terms and flooring Q.
double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q);

/// Analytic t-SNE gradient: dKL/dz_i = 4 sum_j (P_ij - Q_ij) w_ij (z_i - z_j)
/// with w_ij the unnormalized Student-t kernel. Returned for every point; the
/// optimizer decides what to apply.
Eigen::MatrixXd kl_gradient(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                            const Eigen::MatrixXd& z);

/// Semi-supervised t-SNE: labeled points start at (and in hard mode stay
/// clamped to) their normalized true positions; unlabeled points start from a
/// seeded Gaussian and follow momentum gradient descent.
Chart fit(const Eigen::MatrixXd& d, const LabeledSplit& split,
          const ChartingConfig& cfg, std::uint64_t seed);

/// Chart point in meters. Anchored points in hard mode return their stored
/// anchor exactly.
Eigen::Vector2d localize(const Chart& chart, int index);

void save_chart(const std::string& path, const Chart& chart);
Chart load_chart(const std::string& path);
void save_loss_trace(const std::string& path, const std::vector<double>& trace);

} // namespace chartlab
