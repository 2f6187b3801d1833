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

#include <benchmark/benchmark.h>

#include "chartlab/charting.hpp"
#include "chartlab/common.hpp"

using namespace chartlab;

namespace {

Eigen::MatrixXd random_dissimilarity(int n, Rng& rng) {
    Eigen::MatrixXd pts(n, 2);
    for (int i = 0; i < n; ++i) {
        pts(i, 0) = rng.uniform(0, 500);
        pts(i, 1) = rng.uniform(0, 500);
    }
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(i, j) = (pts.row(i) - pts.row(j)).norm();
    return d;
}

Eigen::MatrixXd random_embedding(int n, Rng& rng) {
    Eigen::MatrixXd z(n, 2);
    for (int i = 0; i < n; ++i) {
        z(i, 0) = rng.gauss();
        z(i, 1) = rng.gauss();
    }
    return z;
}

} // namespace

static void BM_CalibrateConditionals(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(1);
    const Eigen::MatrixXd d = random_dissimilarity(n, rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(calibrate_conditionals(d, 0.05 * n));
    state.SetComplexityN(n);
}
BENCHMARK(BM_CalibrateConditionals)->Arg(256)->Arg(512)->Arg(1024)->Complexity();

// One gradient-descent step worth of work (Q plus the analytic gradient).
static void BM_GradientStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(2);
    const Eigen::MatrixXd d = random_dissimilarity(n, rng);
    const Eigen::MatrixXd p = symmetrize(calibrate_conditionals(d, 0.05 * n).p);
    const Eigen::MatrixXd z = random_embedding(n, rng);
    for (auto _ : state) {
        const Eigen::MatrixXd q = q_matrix(z);
        benchmark::DoNotOptimize(kl_gradient(p, q, z));
    }
    state.SetComplexityN(n);
}
BENCHMARK(BM_GradientStep)->Arg(256)->Arg(512)->Arg(1024)->Complexity();

static void BM_FitSmall(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(3);
    const Eigen::MatrixXd d = random_dissimilarity(n, rng);
    Eigen::MatrixXd pts(n, 2);
    for (int i = 0; i < n; ++i) {
        pts(i, 0) = rng.uniform(0, 500);
        pts(i, 1) = rng.uniform(0, 500);
    }
    LabeledSplit split;
    for (int i = 0; i < n; ++i)
        (i % 4 == 0 ? split.labeled : split.unlabeled).push_back(i);
    split.labeled_positions.resize(split.labeled.size(), 2);
    for (std::size_t r = 0; r < split.labeled.size(); ++r)
        split.labeled_positions.row(static_cast<Eigen::Index>(r)) =
            pts.row(split.labeled[r]);

    ChartingConfig cfg;
    cfg.perplexity = 0.05 * n;
    cfg.learning_rate = n / 5.0;
    cfg.iterations = 100;
    for (auto _ : state) benchmark::DoNotOptimize(fit(d, split, cfg, 9));
}
BENCHMARK(BM_FitSmall)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
