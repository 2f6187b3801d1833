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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "chartlab/charting.hpp"
#include "chartlab/common.hpp"
#include "oracles.hpp"

using namespace chartlab;
namespace fs = std::filesystem;

namespace {

Eigen::MatrixXd random_positions(int n, double w, double h, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd p(n, 2);
    for (int i = 0; i < n; ++i) {
        p(i, 0) = rng.uniform(0.0, w);
        p(i, 1) = rng.uniform(0.0, h);
    }
    return p;
}

Eigen::MatrixXd euclidean_d(const Eigen::MatrixXd& p, double scale) {
    const int n = static_cast<int>(p.rows());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            d(i, j) = scale * (p.row(i) - p.row(j)).norm();
            d(j, i) = d(i, j);
        }
    return d;
}

LabeledSplit make_split(const Eigen::MatrixXd& positions, double fraction,
                        std::uint64_t seed) {
    const int n = static_cast<int>(positions.rows());
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    const int l = std::max(1, static_cast<int>(std::lround(fraction * n)));
    LabeledSplit split;
    split.labeled.assign(idx.begin(), idx.begin() + l);
    split.unlabeled.assign(idx.begin() + l, idx.end());
    split.labeled_positions.resize(l, 2);
    for (int k = 0; k < l; ++k)
        split.labeled_positions.row(k) = positions.row(split.labeled[static_cast<std::size_t>(k)]);
    return split;
}

/// Achieved perplexity 2^H of one conditional row.
double row_perplexity(const Eigen::MatrixXd& p, int i) {
    double h = 0.0;
    for (int j = 0; j < p.cols(); ++j)
        if (j != i && p(i, j) > 0.0) h -= p(i, j) * std::log2(p(i, j));
    return std::pow(2.0, h);
}

} // namespace

TEST_CASE("calibrate_conditionals: equidistant rows are degenerate and uniform") {
    const int n = 6;
    Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n, n, 3.5);
    d.diagonal().setZero();
    const Conditionals c = calibrate_conditionals(d, 3.0);

    REQUIRE(static_cast<int>(c.degenerate_rows.size()) == n);
    for (int i = 0; i < n; ++i) {
        CHECK(c.p(i, i) == 0.0);
        for (int j = 0; j < n; ++j)
            if (j != i)
                CHECK(c.p(i, j) == doctest::Approx(1.0 / (n - 1)).epsilon(1e-12));
        // Uniform rows sit at the maximum-entropy perplexity N - 1.
        CHECK(row_perplexity(c.p, i) == doctest::Approx(n - 1.0).epsilon(1e-9));
    }
}

TEST_CASE("calibrate_conditionals: N=3 bisection matches the scalar oracle") {
    Eigen::MatrixXd d(3, 3);
    d << 0, 1, 2,
         1, 0, 1.6,
         2, 1.6, 0;
    const Conditionals c = calibrate_conditionals(d, 1.9);
    REQUIRE(c.degenerate_rows.empty());

    const std::vector<double> row0 = oracle::perplexity_row({1.0, 4.0}, 1.9);
    CHECK(c.p(0, 1) == doctest::Approx(row0[0]).epsilon(1e-6));
    CHECK(c.p(0, 2) == doctest::Approx(row0[1]).epsilon(1e-6));
    CHECK(row_perplexity(c.p, 0) == doctest::Approx(1.9).epsilon(1e-4));
}

TEST_CASE("calibrate_conditionals: row sums and achieved perplexity") {
    const Eigen::MatrixXd pos = random_positions(40, 100, 100, 7);
    const Eigen::MatrixXd d = euclidean_d(pos, 1.0);
    const Conditionals c = calibrate_conditionals(d, 10.0);
    REQUIRE(c.degenerate_rows.empty());
    for (int i = 0; i < 40; ++i) {
        CHECK(c.p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(c.p(i, i) == 0.0);
        CHECK(row_perplexity(c.p, i) == doctest::Approx(10.0).epsilon(1e-4));
        CHECK(std::isfinite(c.sigma(i)));
        CHECK(c.sigma(i) > 0.0);
    }
}

TEST_CASE("symmetrize: proportionality, N=2, symmetry") {
    // Symmetric conditionals stay proportional after normalization.
    const int n = 5;
    Eigen::MatrixXd u = Eigen::MatrixXd::Constant(n, n, 1.0 / (n - 1));
    u.diagonal().setZero();
    const Eigen::MatrixXd p = symmetrize(u);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j)
                CHECK(p(i, j) == doctest::Approx(1.0 / (n * (n - 1))).epsilon(1e-12));

    Eigen::MatrixXd two(2, 2);
    two << 0, 1,
           1, 0;
    const Eigen::MatrixXd p2 = symmetrize(two);
    CHECK(p2(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p2(1, 0) == doctest::Approx(0.5).epsilon(1e-12));

    Rng rng(13);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(8, 8);
    for (int i = 0; i < 8; ++i) {
        double s = 0.0;
        for (int j = 0; j < 8; ++j)
            if (j != i) s += (c(i, j) = rng.uniform(0.01, 1.0));
        c.row(i) /= s;
    }
    const Eigen::MatrixXd ps = symmetrize(c);
    CHECK((ps - ps.transpose()).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(ps.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(ps.minCoeff() >= 0.0);
}

TEST_CASE("q_matrix: coincident, N=2, naive oracle") {
    const Eigen::MatrixXd zc = Eigen::MatrixXd::Zero(5, 2);
    const Eigen::MatrixXd qc = q_matrix(zc);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            CHECK(qc(i, j) == doctest::Approx(i == j ? 0.0 : 1.0 / 20.0).epsilon(1e-12));

    Eigen::MatrixXd z2(2, 2);
    z2 << 0, 0,
          17.5, -3.0;
    const Eigen::MatrixXd q2 = q_matrix(z2);
    CHECK(q2(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(q2(1, 0) == doctest::Approx(0.5).epsilon(1e-12));

    const Eigen::MatrixXd z = random_positions(4, 3, 3, 19);
    const Eigen::MatrixXd q = q_matrix(z);
    const Eigen::MatrixXd want = oracle::student_q(z);
    CHECK((q - want).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(q.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("kl_divergence: identity and scalar oracle") {
    const Eigen::MatrixXd z = random_positions(6, 2, 2, 23);
    const Eigen::MatrixXd q = q_matrix(z);
    CHECK(std::abs(kl_divergence(q, q)) <= 1e-12);

    Eigen::MatrixXd p(3, 3), r(3, 3);
    p << 0, 0.2, 0.1,
         0.2, 0, 0.15,
         0.1, 0.15, 0;
    r << 0, 0.25, 0.05,
         0.25, 0, 0.2,
         0.05, 0.2, 0;
    p /= p.sum();
    r /= r.sum();
    CHECK(kl_divergence(p, r) == doctest::Approx(oracle::kl(p, r)).epsilon(1e-12));
    CHECK(kl_divergence(p, r) >= -1e-12);
}

TEST_CASE("kl_gradient: stationary point and two-point symmetry") {
    const Eigen::MatrixXd z = random_positions(8, 2, 2, 29);
    const Eigen::MatrixXd q = q_matrix(z);
    CHECK(kl_gradient(q, q, z).norm() <= 1e-10);

    Eigen::MatrixXd z2(2, 2);
    z2 << -1, 0,
           1, 0;
    Eigen::MatrixXd p2(2, 2);
    p2 << 0, 0.5,
          0.5, 0;
    const Eigen::MatrixXd g = kl_gradient(p2, q_matrix(z2), z2);
    CHECK((g.row(0) + g.row(1)).norm() <= 1e-12);
}

TEST_CASE("kl_gradient: finite-difference oracle at N=16") {
    const Eigen::MatrixXd pos = random_positions(16, 50, 50, 31);
    const Eigen::MatrixXd d = euclidean_d(pos, 1.0);
    const Eigen::MatrixXd p = symmetrize(calibrate_conditionals(d, 5.0).p);

    Eigen::MatrixXd z = random_positions(16, 2, 2, 37);
    const Eigen::MatrixXd g = kl_gradient(p, q_matrix(z), z);

    const double h = 1e-5;
    for (int i = 0; i < 16; ++i) {
        for (int c = 0; c < 2; ++c) {
            Eigen::MatrixXd zp = z, zm = z;
            zp(i, c) += h;
            zm(i, c) -= h;
            const double fd = (kl_divergence(p, q_matrix(zp)) -
                               kl_divergence(p, q_matrix(zm))) /
                              (2.0 * h);
            const double denom = std::max(std::abs(fd), 1e-6);
            CHECK(std::abs(g(i, c) - fd) / denom <= 1e-5);
        }
    }
}

TEST_CASE("fit: full supervision reproduces ground truth exactly") {
    const int n = 60;
    const Eigen::MatrixXd pos = random_positions(n, 200, 150, 41);
    const Eigen::MatrixXd d = euclidean_d(pos, 1.0);

    LabeledSplit split;
    split.labeled.resize(static_cast<std::size_t>(n));
    std::iota(split.labeled.begin(), split.labeled.end(), 0);
    split.labeled_positions = pos;

    ChartingConfig cfg;
    cfg.perplexity = 12.0;
    cfg.iterations = 120;
    const Chart chart = fit(d, split, cfg, 3);

    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d est = localize(chart, i);
        CHECK(est.x() == pos(i, 0));
        CHECK(est.y() == pos(i, 1));
    }
    CHECK(chart.kl_trace.size() == static_cast<std::size_t>(cfg.iterations) + 1);
}

TEST_CASE("fit: anchors are immutable and bitwise deterministic") {
    const int n = 80;
    const Eigen::MatrixXd pos = random_positions(n, 120, 120, 47);
    const Eigen::MatrixXd d = euclidean_d(pos, 1.0);
    const LabeledSplit split = make_split(pos, 0.3, 5);

    ChartingConfig cfg;
    cfg.perplexity = 10.0;
    cfg.learning_rate = 20.0;
    cfg.iterations = 200;

    const Chart a = fit(d, split, cfg, 11);
    const Chart b = fit(d, split, cfg, 11);
    CHECK(a.z == b.z);
    REQUIRE(a.kl_trace.size() == b.kl_trace.size());
    for (std::size_t t = 0; t < a.kl_trace.size(); ++t)
        CHECK(a.kl_trace[t] == b.kl_trace[t]);

    // Different seed moves the unlabeled init, so the chart differs.
    const Chart c = fit(d, split, cfg, 12);
    CHECK((a.z - c.z).norm() > 0.0);

    // Hard-mode anchors return their positions exactly.
    for (std::size_t k = 0; k < split.labeled.size(); ++k) {
        const int i = split.labeled[k];
        REQUIRE(a.anchored[static_cast<std::size_t>(i)] != 0);
        const Eigen::Vector2d est = localize(a, i);
        CHECK(est.x() == split.labeled_positions(static_cast<int>(k), 0));
        CHECK(est.y() == split.labeled_positions(static_cast<int>(k), 1));
    }

    // Optimization progress: final KL strictly below the initial KL.
    CHECK(a.kl_trace.back() < a.kl_trace.front());
}

TEST_CASE("fit: self-consistent geometry localizes unlabeled points") {
    const int n = 500;
    const double w = 550.0, h = 670.0;
    const double diag = std::sqrt(w * w + h * h);

    ChartingConfig cfg;
    cfg.perplexity = 25.0; // about 5% of N; the paper-scale default needs N >> 500
    cfg.iterations = 1500;

    for (std::uint64_t seed : {1u, 2u}) {
        const Eigen::MatrixXd pos = random_positions(n, w, h, 100 + seed);
        // Scaled Euclidean dissimilarities: calibration absorbs the scale.
        const Eigen::MatrixXd d = euclidean_d(pos, seed == 1 ? 1.0 : 0.05);
        const LabeledSplit split = make_split(pos, 0.25, 200 + seed);

        const Chart chart = fit(d, split, cfg, seed);

        double err_sum = 0.0;
        int inside = 0;
        for (const int i : split.unlabeled) {
            const Eigen::Vector2d est = localize(chart, i);
            err_sum += (est - Eigen::Vector2d(pos(i, 0), pos(i, 1))).norm();
            if (est.x() >= -0.1 * w && est.x() <= 1.1 * w && est.y() >= -0.1 * h &&
                est.y() <= 1.1 * h)
                ++inside;
        }
        const double mean_err = err_sum / static_cast<double>(split.unlabeled.size());
        CHECK(mean_err < 0.05 * diag);
        // Sanity envelope: nearly all estimates stay near the scene.
        CHECK(inside >= static_cast<int>(0.99 * static_cast<double>(split.unlabeled.size())));
        CHECK(chart.kl_trace.back() < chart.kl_trace.front());
    }
}

TEST_CASE("fit: penalty mode optimizes without clamping") {
    const int n = 80;
    const Eigen::MatrixXd pos = random_positions(n, 120, 120, 53);
    const Eigen::MatrixXd d = euclidean_d(pos, 1.0);
    const LabeledSplit split = make_split(pos, 0.3, 7);

    ChartingConfig cfg;
    cfg.perplexity = 10.0;
    cfg.learning_rate = 20.0;
    cfg.iterations = 150;
    cfg.anchor_mode = AnchorMode::penalty;

    const Chart chart = fit(d, split, cfg, 11);
    CHECK(chart.kl_trace.back() < chart.kl_trace.front());

    // Labeled points are pulled toward, not pinned to, their anchors.
    double moved = 0.0;
    for (std::size_t k = 0; k < split.labeled.size(); ++k) {
        const Eigen::Vector2d est = localize(chart, split.labeled[k]);
        moved += (est - Eigen::Vector2d(split.labeled_positions(static_cast<int>(k), 0),
                                        split.labeled_positions(static_cast<int>(k), 1)))
                     .norm();
    }
    CHECK(moved > 0.0);
}

TEST_CASE("fit: configuration errors") {
    const int n = 30;
    const Eigen::MatrixXd pos = random_positions(n, 50, 50, 59);
    const Eigen::MatrixXd d = euclidean_d(pos, 1.0);

    // No anchors in hard mode cannot produce a chart in meters.
    LabeledSplit none;
    none.unlabeled.resize(static_cast<std::size_t>(n));
    std::iota(none.unlabeled.begin(), none.unlabeled.end(), 0);
    none.labeled_positions.resize(0, 2);
    ChartingConfig cfg;
    cfg.perplexity = 8.0;
    cfg.iterations = 50;
    CHECK_THROWS_AS(fit(d, none, cfg, 1), ConfigError);

    const LabeledSplit split = make_split(pos, 0.3, 9);
    ChartingConfig wide = cfg;
    wide.perplexity = static_cast<double>(n); // must stay below N
    CHECK_THROWS_AS(fit(d, split, wide, 1), ConfigError);

    ChartingConfig it0 = cfg;
    it0.iterations = 0;
    CHECK_THROWS_AS(fit(d, split, it0, 1), ConfigError);

    ChartingConfig mom = cfg;
    mom.momentum = 1.0;
    CHECK_THROWS_AS(fit(d, split, mom, 1), ConfigError);
}

TEST_CASE("chart persistence round-trips") {
    const int n = 40;
    const Eigen::MatrixXd pos = random_positions(n, 90, 90, 61);
    const Eigen::MatrixXd d = euclidean_d(pos, 1.0);
    const LabeledSplit split = make_split(pos, 0.25, 3);

    ChartingConfig cfg;
    cfg.perplexity = 8.0;
    cfg.learning_rate = 15.0;
    cfg.iterations = 80;
    const Chart chart = fit(d, split, cfg, 17);

    const fs::path dir = fs::temp_directory_path() / "chartlab_chart_io";
    fs::create_directories(dir);
    save_chart((dir / "a.txt").string(), chart);
    const Chart back = load_chart((dir / "a.txt").string());
    save_chart((dir / "b.txt").string(), back);

    std::ifstream fa(dir / "a.txt", std::ios::binary), fb(dir / "b.txt", std::ios::binary);
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());

    REQUIRE(back.size() == chart.size());
    for (int i = 0; i < chart.size(); ++i) {
        const Eigen::Vector2d e0 = localize(chart, i);
        const Eigen::Vector2d e1 = localize(back, i);
        CHECK((e0 - e1).norm() <= 1e-9);
    }

    save_loss_trace((dir / "trace.csv").string(), chart.kl_trace);
    std::ifstream tr(dir / "trace.csv");
    std::string line;
    int rows = 0;
    while (std::getline(tr, line))
        if (!line.empty()) ++rows;
    CHECK(rows >= static_cast<int>(chart.kl_trace.size()));
    fs::remove_all(dir);
}
