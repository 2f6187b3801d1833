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

#include <vector>

#include <benchmark/benchmark.h>

#include "chartlab/common.hpp"
#include "chartlab/features.hpp"

using namespace chartlab;

namespace {

Eigen::MatrixXcd random_cov(int n, Rng& rng) {
    Eigen::MatrixXcd a(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a(r, c) = rng.cgauss();
    return a * a.adjoint() / static_cast<double>(n) +
           0.01 * Eigen::MatrixXcd::Identity(n, n);
}

} // namespace

static void BM_HermitianLog(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(1);
    const Eigen::MatrixXcd c = random_cov(n, rng);
    for (auto _ : state) benchmark::DoNotOptimize(hermitian_log(c));
    state.SetComplexityN(n);
}
BENCHMARK(BM_HermitianLog)->Arg(8)->Arg(16)->Arg(32)->Complexity();

static void BM_LogEuclideanDistance(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(2);
    const Eigen::MatrixXcd a = random_cov(n, rng);
    const Eigen::MatrixXcd b = random_cov(n, rng);
    for (auto _ : state) benchmark::DoNotOptimize(log_euclidean_distance(a, b));
}
BENCHMARK(BM_LogEuclideanDistance)->Arg(16)->Arg(32);

// The dataset-level cost that dominates the chart stage before t-SNE: N
// matrix logs plus N(N-1)/2 Frobenius distances.
static void BM_DissimilarityMatrix(benchmark::State& state) {
    const int samples = static_cast<int>(state.range(0));
    Rng rng(3);
    std::vector<Eigen::MatrixXcd> covs;
    covs.reserve(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) covs.push_back(random_cov(16, rng));
    for (auto _ : state) benchmark::DoNotOptimize(dissimilarity_matrix(covs));
    state.SetComplexityN(samples);
}
BENCHMARK(BM_DissimilarityMatrix)->Arg(64)->Arg(128)->Arg(256)->Complexity();

BENCHMARK_MAIN();
