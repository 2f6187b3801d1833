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
//
// Command line front end. All the actual work lives in the core library;
// this file only parses flags, loads the config, applies overrides and maps
// exceptions onto the documented exit codes:
//   0 ok, 2 configuration error, 3 data error, 4 numerical error.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chartlab/common.hpp"
#include "chartlab/config.hpp"
#include "chartlab/pipeline.hpp"

namespace {

struct Flags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::vector<double> supervision;
    std::optional<std::string> out_dir;
};

/// The five subcommands share one flag set, so each gets its own copy.
void add_common_flags(CLI::App* sub, Flags& fl) {
    sub->add_option("--config", fl.config_path, "experiment config file")
        ->required();
    sub->add_option("--seed", fl.seed, "override the experiment seed");
    sub->add_option("--mode", fl.mode, "override the twin mode (static|dynamic)");
    sub->add_option("--supervision", fl.supervision,
                    "override the supervision percentages")
        ->expected(-1);
    sub->add_option("--out", fl.out_dir, "override the output directory");
}

chartlab::ExperimentConfig effective_config(const Flags& fl) {
    chartlab::ExperimentConfig cfg = chartlab::load_config(fl.config_path);
    chartlab::CliOverrides ov;
    ov.seed = fl.seed;
    ov.mode = fl.mode;
    if (!fl.supervision.empty()) ov.supervision = fl.supervision;
    ov.out_dir = fl.out_dir;
    chartlab::apply_overrides(cfg, ov);
    cfg.validate();
    return cfg;
}

void print_row(const chartlab::MetricsCsvRow& row) {
    std::printf("%s s=%g%%: ct=%.4f tw=%.4f ks=%.4f loc mean=%.2f m "
                "median=%.2f m p90=%.2f m (n=%d validation=%d)\n",
                row.scenario.c_str(), row.supervision_pct, row.report.continuity,
                row.report.trustworthiness, row.report.kruskal_stress,
                row.report.all.mean, row.report.all.median, row.report.all.p90,
                row.report.n, row.report.all.count);
}

int run(const std::string& sub, const Flags& fl) {
    const chartlab::ExperimentConfig cfg = effective_config(fl);

    if (sub == "generate") {
        const chartlab::DatasetManifest m = chartlab::cmd_generate(cfg);
        std::printf("generated %d records (n_rx=%d, los %.3f, %d labeled / %d "
                    "validation) -> %s/%s\n",
                    m.records, m.n_rx, m.los_fraction, m.labeled, m.validation,
                    cfg.out_dir.c_str(), m.dataset_file.c_str());
    } else if (sub == "chart") {
        for (double pct : cfg.supervision_pct) {
            const std::string path = chartlab::cmd_chart(cfg, pct);
            std::printf("chart s=%g%% -> %s\n", pct, path.c_str());
        }
    } else if (sub == "evaluate") {
        for (double pct : cfg.supervision_pct)
            print_row(chartlab::cmd_evaluate(cfg, pct));
    } else if (sub == "baseline") {
        chartlab::cmd_baseline(cfg);
        std::printf("baselines -> %s/results/baseline_%s.csv\n", cfg.out_dir.c_str(),
                    chartlab::mode_name(cfg.mode));
    } else if (sub == "sweep") {
        chartlab::cmd_sweep(cfg);
        std::printf("sweep -> %s/results/sweep_metrics.csv\n", cfg.out_dir.c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chartlab: channel charting on a procedural urban twin"};
    app.require_subcommand(1);

    Flags fl;
    const char* names[] = {"generate", "chart", "evaluate", "baseline", "sweep"};
    const char* briefs[] = {
        "simulate scene, traffic and channels into a CSI dataset",
        "fit semi-supervised charts per supervision level",
        "emit metrics, ECDF and quartile CSVs for fitted charts",
        "run the RSSI fingerprint and MUSIC baselines",
        "full study: generate + chart + evaluate + baseline, both modes",
    };
    for (int i = 0; i < 5; ++i) add_common_flags(app.add_subcommand(names[i], briefs[i]), fl);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // bad flags are configuration errors
    }

    try {
        return run(app.get_subcommands().front()->get_name(), fl);
    } catch (const chartlab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const chartlab::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const chartlab::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
