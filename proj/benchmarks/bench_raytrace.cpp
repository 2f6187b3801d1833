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

#include "chartlab/raytrace.hpp"
#include "chartlab/scene.hpp"

using namespace chartlab;

namespace {

struct Fixture {
    Scene scene;
    std::vector<Snapshot> snaps;
    std::vector<Blocker> blockers;

    explicit Fixture(double extent) {
        ScenarioParams params;
        params.width_m = extent;
        params.height_m = extent;
        scene = generate_city(4, params);
        snaps = simulate_traffic(scene, 5, 10, 0.5, 20);
        for (const VehicleState& v : snaps.back().vehicles)
            blockers.push_back(blocker_from_vehicle(v));
    }
};

} // namespace

static void BM_TraceStatic(benchmark::State& state) {
    const Fixture fx(static_cast<double>(state.range(0)));
    const VehicleState& ve = fx.snaps.back().vehicles.front();
    const Eigen::Vector3d tx = ve_antenna_position(ve);
    TraceConfig cfg;
    for (auto _ : state)
        benchmark::DoNotOptimize(trace_paths(fx.scene, tx, Eigen::Vector3d::Zero(),
                                             fx.scene.bs.position, {}, cfg));
    state.SetLabel(std::to_string(fx.scene.buildings.size()) + " buildings");
}
BENCHMARK(BM_TraceStatic)->Arg(200)->Arg(300)->Arg(450)
    ->Unit(benchmark::kMillisecond);

static void BM_TraceDynamic(benchmark::State& state) {
    const Fixture fx(static_cast<double>(state.range(0)));
    const VehicleState& ve = fx.snaps.back().vehicles.front();
    const Eigen::Vector3d tx = ve_antenna_position(ve);
    TraceConfig cfg;
    cfg.mode = TwinMode::dynamic_scene;
    for (auto _ : state)
        benchmark::DoNotOptimize(trace_paths(fx.scene, tx, Eigen::Vector3d::Zero(),
                                             fx.scene.bs.position, fx.blockers, cfg));
    state.SetLabel(std::to_string(fx.scene.buildings.size()) + " buildings, " +
                   std::to_string(fx.blockers.size()) + " blockers");
}
BENCHMARK(BM_TraceDynamic)->Arg(200)->Arg(300)->Arg(450)
    ->Unit(benchmark::kMillisecond);

static void BM_LosBlocked(benchmark::State& state) {
    const Fixture fx(300.0);
    const VehicleState& ve = fx.snaps.back().vehicles.front();
    const Eigen::Vector3d tx = ve_antenna_position(ve);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            los_blocked(fx.scene, tx, fx.scene.bs.position, fx.blockers));
}
BENCHMARK(BM_LosBlocked);

BENCHMARK_MAIN();
