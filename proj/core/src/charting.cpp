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

#include "chartlab/charting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "chartlab/common.hpp"

namespace chartlab {
namespace {

constexpr double kProbFloor = 1e-12;

/// Pairwise squared Euclidean distances of the embedding rows.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& z) {
    const Eigen::VectorXd sq = z.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = -2.0 * (z * z.transpose());
    d2.colwise() += sq;
    d2.rowwise() += sq.transpose();
    d2.diagonal().setZero();
    return d2.cwiseMax(0.0);
}

/// Unnormalized Student-t kernel w_ij = (1 + ||z_i - z_j||^2)^{-1}, zero diag.
Eigen::MatrixXd student_kernel(const Eigen::MatrixXd& z) {
    Eigen::MatrixXd w = squared_distances(z);
    w.array() += 1.0;
    w = w.cwiseInverse();
    w.diagonal().setZero();
    return w;
}

} // namespace

void ChartingConfig::validate(int n_samples) const {
    if (!(perplexity > 1.0) || perplexity > static_cast<double>(n_samples - 1))
        throw ConfigError("perplexity must lie in (1, N-1]");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("momentum must lie in [0, 1)");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (penalty_weight < 0.0) throw ConfigError("penalty weight must be >= 0");
    if (norm_scale_m < 0.0) throw ConfigError("normalization scale must be >= 0");
    if (exaggeration < 1.0) throw ConfigError("exaggeration factor must be >= 1");
    if (exaggeration_iters < 0 || exaggeration_iters > iterations)
        throw ConfigError("exaggeration iterations must lie in [0, iterations]");
}

Conditionals calibrate_conditionals(const Eigen::MatrixXd& d, double perplexity) {
    const Eigen::Index n = d.rows();
    if (d.cols() != n || n < 3)
        throw DataError("calibrate_conditionals requires a square matrix, N >= 3");
    if (!(perplexity > 1.0) || perplexity > static_cast<double>(n - 1))
        throw ConfigError("perplexity must lie in (1, N-1]");

    Conditionals out;
    out.p = Eigen::MatrixXd::Zero(n, n);
    out.sigma = Eigen::VectorXd::Zero(n);
    const double log_target = std::log(perplexity);

    Eigen::VectorXd s(n), p(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        // Shifted squared distances keep exp() in range for any bandwidth.
        double mn = std::numeric_limits<double>::infinity();
        double mx = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double v = d(i, j) * d(i, j);
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        if (mx - mn <= 1e-15 * std::max(1.0, mx)) {
            // All neighbors equidistant: p is uniform for every bandwidth and
            // the perplexity is pinned at N-1. Accept and report.
            for (Eigen::Index j = 0; j < n; ++j)
                if (j != i) out.p(i, j) = 1.0 / static_cast<double>(n - 1);
            out.sigma(i) = std::numeric_limits<double>::infinity();
            out.degenerate_rows.push_back(static_cast<int>(i));
            continue;
        }
        for (Eigen::Index j = 0; j < n; ++j) s(j) = d(i, j) * d(i, j) - mn;

        double beta = 1.0, beta_lo = 0.0;
        double beta_hi = std::numeric_limits<double>::infinity();
        double sum = 0.0;
        bool done = false;
        for (int it = 0; it < 200 && !done; ++it) {
            sum = 0.0;
            double weighted = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) {
                    p(j) = 0.0;
                    continue;
                }
                p(j) = std::exp(-beta * s(j));
                sum += p(j);
                weighted += s(j) * p(j);
            }
            const double entropy = std::log(sum) + beta * weighted / sum;  // nats
            const double gap = std::abs(std::exp(entropy) - perplexity);
            // Converge the root itself; the documented 1e-4 relative bound is
            // the contract, not the stopping rule, so independent references
            // land on the same row. The final iteration may still accept
            // anything that honors the contract.
            if (gap <= 1e-10 * perplexity || (it == 199 && gap <= 1e-4 * perplexity)) {
                done = true;
            } else if (entropy > log_target) {
                beta_lo = beta;  // too flat: narrow the kernel
                beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
            } else {
                beta_hi = beta;
                beta = 0.5 * (beta + beta_lo);
            }
        }
        if (!done)
            throw NumericalError("perplexity calibration did not converge on row " +
                                 std::to_string(i));
        p /= sum;
        out.p.row(i) = p.transpose();
        out.sigma(i) = 1.0 / std::sqrt(2.0 * beta);
    }
    return out;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& conditionals) {
    const Eigen::Index n = conditionals.rows();
    if (conditionals.cols() != n || n < 2)
        throw DataError("symmetrize requires a square matrix, N >= 2");
    Eigen::MatrixXd p = 0.5 * (conditionals + conditionals.transpose());
    p.diagonal().setZero();
    const double total = p.sum();
    if (!(total > 0.0)) throw NumericalError("symmetrize got an all-zero matrix");
    p /= total;
    // Floor off-diagonal entries for KL stability, then renormalize so the
    // matrix stays a distribution over ordered pairs.
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && p(i, j) < kProbFloor) p(i, j) = kProbFloor;
    p /= p.sum();
    return p;
}

Eigen::MatrixXd q_matrix(const Eigen::MatrixXd& z) {
    if (z.rows() < 2 || z.cols() != 2)
        throw DataError("q_matrix requires an N x 2 embedding, N >= 2");
    Eigen::MatrixXd w = student_kernel(z);
    return w / w.sum();
}

double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    if (p.rows() != q.rows() || p.cols() != q.cols())
        throw DataError("kl_divergence requires matching shapes");
    double kl = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (i == j) continue;
            const double pij = p(i, j);
            if (pij <= 0.0) continue;
            kl += pij * std::log(pij / std::max(q(i, j), kProbFloor));
        }
    return kl;
}

Eigen::MatrixXd kl_gradient(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                            const Eigen::MatrixXd& z) {
    const Eigen::Index n = z.rows();
    if (p.rows() != n || p.cols() != n || q.rows() != n || q.cols() != n)
        throw DataError("kl_gradient requires matching shapes");
    Eigen::MatrixXd w = student_kernel(z);
    Eigen::MatrixXd m = (p - q).cwiseProduct(w);
    // grad_i = 4 (rowsum(m) z_i - sum_j m_ij z_j)
    const Eigen::VectorXd rs = m.rowwise().sum();
    Eigen::MatrixXd grad = 4.0 * (rs.asDiagonal() * z - m * z);
    return grad;
}

Chart fit(const Eigen::MatrixXd& d, const LabeledSplit& split,
          const ChartingConfig& cfg, std::uint64_t seed) {
    const Eigen::Index n = d.rows();
    if (d.cols() != n || n < 3) throw DataError("fit requires a square matrix, N >= 3");
    if (split.total() != static_cast<int>(n))
        throw DataError("split size does not match dissimilarity matrix");
    if (static_cast<Eigen::Index>(split.labeled.size()) != split.labeled_positions.rows())
        throw DataError("labeled positions do not match labeled index count");
    cfg.validate(static_cast<int>(n));

    const bool hard = cfg.anchor_mode == AnchorMode::hard;
    if (hard && split.labeled.empty())
        throw ConfigError("hard anchor mode needs at least one labeled sample");

    std::vector<char> seen(static_cast<size_t>(n), 0);
    for (int idx : split.labeled) {
        if (idx < 0 || idx >= n || seen[static_cast<size_t>(idx)])
            throw DataError("invalid or duplicate labeled index");
        seen[static_cast<size_t>(idx)] = 1;
    }
    for (int idx : split.unlabeled) {
        if (idx < 0 || idx >= n || seen[static_cast<size_t>(idx)])
            throw DataError("invalid or duplicate unlabeled index");
        seen[static_cast<size_t>(idx)] = 1;
    }

    Chart chart;
    chart.anchor_mode = cfg.anchor_mode;
    chart.z = Eigen::MatrixXd::Zero(n, 2);
    chart.anchored.assign(static_cast<size_t>(n), 0);
    chart.anchor_m = Eigen::MatrixXd::Zero(n, 2);

    // Chart-to-meters transform from the labeled bounding box: the anchors
    // span a unit-diagonal region centered on the chart origin, so the
    // near-zero unlabeled init starts in the middle of the anchor set.
    if (!split.labeled.empty()) {
        const Eigen::Vector2d lo = split.labeled_positions.colwise().minCoeff();
        const Eigen::Vector2d hi = split.labeled_positions.colwise().maxCoeff();
        const double diag = (hi - lo).norm();
        chart.offset_m = 0.5 * (lo + hi);
        chart.scale_m = cfg.norm_scale_m > 0.0 ? cfg.norm_scale_m : diag;
        if (!(chart.scale_m > 0.0))
            throw ConfigError("labeled positions are degenerate; set norm_scale_m");
    } else {
        chart.offset_m = Eigen::Vector2d::Zero();
        chart.scale_m = cfg.norm_scale_m > 0.0 ? cfg.norm_scale_m : 1.0;
    }

    for (size_t li = 0; li < split.labeled.size(); ++li) {
        const int idx = split.labeled[li];
        chart.anchored[static_cast<size_t>(idx)] = 1;
        chart.anchor_m.row(idx) = split.labeled_positions.row(static_cast<Eigen::Index>(li));
        chart.z.row(idx) =
            (split.labeled_positions.row(static_cast<Eigen::Index>(li)) -
             chart.offset_m.transpose()) /
            chart.scale_m;
    }
    Rng rng(seed);
    for (int idx : split.unlabeled) {
        chart.z(idx, 0) = 1e-2 * rng.gauss();
        chart.z(idx, 1) = 1e-2 * rng.gauss();
    }

    const Eigen::MatrixXd anchor_z = chart.z;  // normalized anchors (hard clamp targets)

    Eigen::MatrixXd p = symmetrize(calibrate_conditionals(d, cfg.perplexity).p);

    Eigen::MatrixXd prev = chart.z;  // z_{t-1} for the momentum term
    chart.kl_trace.clear();
    chart.kl_trace.reserve(static_cast<size_t>(cfg.iterations) + 1);

    const double skip_threshold = 2.0 * kProbFloor;
    Eigen::MatrixXd w, m;
    for (int t = 0; t < cfg.iterations; ++t) {
        w = student_kernel(chart.z);
        const double s = w.sum();

        // KL(P||Q) with Q = W/s. Floored P entries contribute O(1e-12) each
        // and are skipped; the trace is for monitoring, not for metrics.
        double kl = std::log(s);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const double pij = p(i, j);
                if (pij <= skip_threshold) continue;
                kl += pij * (std::log(pij) - std::log(w(i, j)));
            }
        chart.kl_trace.push_back(kl);

        // Anchored fits need an attraction-dominant balance: with P and Q both
        // normalized over all pairs, the Student-t repulsion settles the free
        // points at a spread a few times wider than the anchor frame no matter
        // how long the optimizer runs. Damping the repulsive term by 1/N is
        // equivalent to optimizing against the row-form P (which sums to N)
        // with the step rescaled so the learning rate stays dimensionless; it
        // keeps the free points pinned to the frame the anchors define.
        const double exag = (t < cfg.exaggeration_iters) ? cfg.exaggeration : 1.0;
        m = (exag * p - w / (s * static_cast<double>(n))).cwiseProduct(w);
        const Eigen::VectorXd rs = m.rowwise().sum();
        Eigen::MatrixXd grad = 4.0 * (rs.asDiagonal() * chart.z - m * chart.z);

        const Eigen::MatrixXd next =
            chart.z - cfg.learning_rate * grad + cfg.momentum * (chart.z - prev);
        prev = chart.z;
        chart.z = next;
        if (hard) {
            for (int idx : split.labeled) {
                chart.z.row(idx) = anchor_z.row(idx);
                prev.row(idx) = anchor_z.row(idx);
            }
        } else if (cfg.penalty_weight > 0.0) {
            // Implicit (backward-Euler) step on the quadratic anchor penalty.
            // The spring is stiff at usable learning rates (an explicit step
            // is stable only while 2*eta*mu < 1); the implicit form contracts
            // toward the anchor for any weight and tends to hard clamping as
            // mu grows.
            const double pull =
                1.0 / (1.0 + 2.0 * cfg.learning_rate * cfg.penalty_weight);
            for (int idx : split.labeled)
                chart.z.row(idx) = anchor_z.row(idx) +
                                   pull * (chart.z.row(idx) - anchor_z.row(idx));
        }
    }

    // Final KL at the last iterate.
    w = student_kernel(chart.z);
    double kl = std::log(w.sum());
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double pij = p(i, j);
            if (pij <= skip_threshold) continue;
            kl += pij * (std::log(pij) - std::log(w(i, j)));
        }
    chart.kl_trace.push_back(kl);
    return chart;
}

Eigen::Vector2d localize(const Chart& chart, int index) {
    if (index < 0 || index >= chart.size()) throw DataError("localize index out of range");
    if (chart.anchor_mode == AnchorMode::hard && chart.anchored[static_cast<size_t>(index)])
        return chart.anchor_m.row(index);
    return chart.offset_m + chart.scale_m * chart.z.row(index).transpose();
}

void save_chart(const std::string& path, const Chart& chart) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw DataError("cannot open chart file for writing: " + path);
    bool ok = std::fprintf(f, "# chartlab-chart 1\n") > 0;
    ok = ok && std::fprintf(f, "%d %s %.17g %.17g %.17g\n", chart.size(),
                            chart.anchor_mode == AnchorMode::hard ? "hard" : "penalty",
                            chart.scale_m, chart.offset_m.x(), chart.offset_m.y()) > 0;
    for (int i = 0; i < chart.size() && ok; ++i) {
        const Eigen::Vector2d est =
            chart.offset_m + chart.scale_m * chart.z.row(i).transpose();
        ok = std::fprintf(f, "%d %d %.17g %.17g %.17g %.17g %.17g %.17g\n", i,
                          chart.anchored[static_cast<size_t>(i)] ? 1 : 0, chart.z(i, 0),
                          chart.z(i, 1), est.x(), est.y(), chart.anchor_m(i, 0),
                          chart.anchor_m(i, 1)) > 0;
    }
    if (std::fclose(f) != 0 || !ok) throw DataError("failed to write chart: " + path);
}

Chart load_chart(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "r");
    if (!f) throw DataError("cannot open chart file: " + path);
    char header[64];
    if (!std::fgets(header, sizeof(header), f) ||
        std::strncmp(header, "# chartlab-chart 1", 18) != 0) {
        std::fclose(f);
        throw DataError("not a chart file: " + path);
    }
    int n = 0;
    char mode[16];
    double scale = 0, ox = 0, oy = 0;
    if (std::fscanf(f, "%d %15s %lg %lg %lg", &n, mode, &scale, &ox, &oy) != 5 || n < 1) {
        std::fclose(f);
        throw DataError("malformed chart header: " + path);
    }
    Chart chart;
    chart.anchor_mode =
        std::strcmp(mode, "hard") == 0 ? AnchorMode::hard : AnchorMode::penalty;
    chart.scale_m = scale;
    chart.offset_m = Eigen::Vector2d(ox, oy);
    chart.z = Eigen::MatrixXd::Zero(n, 2);
    chart.anchor_m = Eigen::MatrixXd::Zero(n, 2);
    chart.anchored.assign(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        int idx = 0, flag = 0;
        double zx, zy, ex, ey, ax, ay;
        if (std::fscanf(f, "%d %d %lg %lg %lg %lg %lg %lg", &idx, &flag, &zx, &zy, &ex,
                        &ey, &ax, &ay) != 8 ||
            idx != i) {
            std::fclose(f);
            throw DataError("malformed chart row in " + path);
        }
        chart.anchored[static_cast<size_t>(i)] = static_cast<char>(flag != 0);
        chart.z(i, 0) = zx;
        chart.z(i, 1) = zy;
        chart.anchor_m(i, 0) = ax;
        chart.anchor_m(i, 1) = ay;
    }
    std::fclose(f);
    return chart;
}

void save_loss_trace(const std::string& path, const std::vector<double>& trace) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw DataError("cannot open loss trace for writing: " + path);
    bool ok = std::fprintf(f, "iteration,kl\n") > 0;
    for (size_t t = 0; t < trace.size() && ok; ++t)
        ok = std::fprintf(f, "%zu,%.12e\n", t, trace[t]) > 0;
    if (std::fclose(f) != 0 || !ok) throw DataError("failed to write loss trace: " + path);
}

} // namespace chartlab
