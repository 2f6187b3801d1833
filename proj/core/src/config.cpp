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

#include "chartlab/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace chartlab {
namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& v) {
    if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("key '" + key + "': cannot parse number from '" + v + "'");
    return x;
}

long long parse_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("key '" + key + "': cannot parse integer from '" + v + "'");
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "': cannot parse boolean from '" + v + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty())
            throw ConfigError("key '" + key + "': empty element in list '" + v + "'");
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("key '" + key + "': empty list");
    return out;
}

AnchorMode anchor_mode_from_name(const std::string& v) {
    if (v == "hard") return AnchorMode::hard;
    if (v == "penalty") return AnchorMode::penalty;
    throw ConfigError("anchor_mode must be 'hard' or 'penalty', got '" + v + "'");
}

void assign(ExperimentConfig& c, const std::string& sec, const std::string& key,
            const std::string& v) {
    const std::string full = "[" + sec + "] " + key;
    if (sec == "experiment") {
        if (key == "n_samples") c.n_samples = static_cast<int>(parse_int(full, v));
        else if (key == "mode") c.mode = mode_from_name(v);
        else if (key == "supervision") c.supervision_pct = parse_list(full, v);
        else if (key == "validation_fraction") c.validation_fraction = parse_double(full, v);
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_int(full, v));
        else if (key == "per_point_split") c.per_point_split = parse_bool(full, v);
        else if (key == "out_dir") c.out_dir = v;
        else throw ConfigError("unknown key '" + key + "' in section [experiment]");
    } else if (sec == "scene") {
        if (key == "width_m") c.scene.width_m = parse_double(full, v);
        else if (key == "height_m") c.scene.height_m = parse_double(full, v);
        else if (key == "block_m") c.scene.block_m = parse_double(full, v);
        else if (key == "street_m") c.scene.street_m = parse_double(full, v);
        else if (key == "min_height_m") c.scene.min_height_m = parse_double(full, v);
        else if (key == "max_height_m") c.scene.max_height_m = parse_double(full, v);
        else if (key == "glass_fraction") c.scene.glass_fraction = parse_double(full, v);
        else if (key == "bs_height_m") c.scene.bs_height_m = parse_double(full, v);
        else throw ConfigError("unknown key '" + key + "' in section [scene]");
    } else if (sec == "traffic") {
        if (key == "n_vehicles") c.n_vehicles = static_cast<int>(parse_int(full, v));
        else if (key == "n_steps") c.n_steps = static_cast<int>(parse_int(full, v));
        else if (key == "dt_s") c.dt_s = parse_double(full, v);
        else throw ConfigError("unknown key '" + key + "' in section [traffic]");
    } else if (sec == "raytrace") {
        if (key == "max_order") c.trace.max_order = static_cast<int>(parse_int(full, v));
        else if (key == "ground_reflection") c.trace.ground_reflection = parse_bool(full, v);
        else if (key == "vehicle_reflections") c.trace.vehicle_reflections = parse_bool(full, v);
        else if (key == "max_path_length_m") c.trace.max_path_length_m = parse_double(full, v);
        else if (key == "concrete_loss_db") c.trace.concrete_loss_db = parse_double(full, v);
        else if (key == "glass_loss_db") c.trace.glass_loss_db = parse_double(full, v);
        else if (key == "vehicle_loss_db") c.trace.vehicle_loss_db = parse_double(full, v);
        else throw ConfigError("unknown key '" + key + "' in section [raytrace]");
    } else if (sec == "channel") {
        if (key == "f0_hz") c.channel.f0_hz = parse_double(full, v);
        else if (key == "bandwidth_hz") c.channel.bandwidth_hz = parse_double(full, v);
        else if (key == "tau_max_s") c.channel.tau_max_s = parse_double(full, v);
        else if (key == "n_subcarriers") c.channel.n_subcarriers = static_cast<int>(parse_int(full, v));
        else if (key == "rolloff") c.channel.rolloff = parse_double(full, v);
        else if (key == "pulse_half_taps") c.channel.pulse_half_taps = static_cast<int>(parse_int(full, v));
        else if (key == "bs_rows") c.bs_array.rows = static_cast<int>(parse_int(full, v));
        else if (key == "bs_cols") c.bs_array.cols = static_cast<int>(parse_int(full, v));
        else if (key == "ue_rows") c.ue_array.rows = static_cast<int>(parse_int(full, v));
        else if (key == "ue_cols") c.ue_array.cols = static_cast<int>(parse_int(full, v));
        else if (key == "spacing_wavelengths") {
            c.bs_array.spacing_wavelengths = parse_double(full, v);
            c.ue_array.spacing_wavelengths = c.bs_array.spacing_wavelengths;
        } else if (key == "estimate") c.estimate = parse_bool(full, v);
        else if (key == "wssus") c.wssus = parse_bool(full, v);
        else if (key == "pilot_length") c.pilot.length = static_cast<int>(parse_int(full, v));
        else if (key == "pilot_power") c.pilot.tx_power = parse_double(full, v);
        else if (key == "pilot_seed") c.pilot.seed = static_cast<std::uint64_t>(parse_int(full, v));
        else if (key == "snr_db") c.noise.snr_db = parse_double(full, v);
        else if (key == "noise_power") c.noise.noise_power = parse_double(full, v);
        else if (key == "interferer") c.noise.interferer = parse_bool(full, v);
        else if (key == "interferer_az") c.noise.interferer_az = parse_double(full, v);
        else if (key == "interferer_el") c.noise.interferer_el = parse_double(full, v);
        else if (key == "interferer_power_db") c.noise.interferer_power_db = parse_double(full, v);
        else throw ConfigError("unknown key '" + key + "' in section [channel]");
    } else if (sec == "features") {
        if (key == "eig_floor") c.eig_floor = parse_double(full, v);
        else throw ConfigError("unknown key '" + key + "' in section [features]");
    } else if (sec == "charting") {
        if (key == "perplexity") c.charting.perplexity = parse_double(full, v);
        else if (key == "momentum") c.charting.momentum = parse_double(full, v);
        else if (key == "learning_rate") c.charting.learning_rate = parse_double(full, v);
        else if (key == "iterations") c.charting.iterations = static_cast<int>(parse_int(full, v));
        else if (key == "anchor_mode") c.charting.anchor_mode = anchor_mode_from_name(v);
        else if (key == "penalty_weight") c.charting.penalty_weight = parse_double(full, v);
        else if (key == "norm_scale_m") c.charting.norm_scale_m = parse_double(full, v);
        else if (key == "exaggeration") c.charting.exaggeration = parse_double(full, v);
        else if (key == "exaggeration_iters") c.charting.exaggeration_iters = static_cast<int>(parse_int(full, v));
        else throw ConfigError("unknown key '" + key + "' in section [charting]");
    } else if (sec == "evaluate") {
        if (key == "k_neighbors") c.k_neighbors = static_cast<int>(parse_int(full, v));
        else throw ConfigError("unknown key '" + key + "' in section [evaluate]");
    } else if (sec == "baselines") {
        if (key == "cell_size_m") c.fingerprint.cell_size_m = parse_double(full, v);
        else if (key == "k_f") c.fingerprint.k_f = static_cast<int>(parse_int(full, v));
        else if (key == "music_sources") c.music.assumed_sources = static_cast<int>(parse_int(full, v));
        else if (key == "music_az_step_rad") c.music.az_step_rad = parse_double(full, v);
        else if (key == "music_delay_step_s") c.music.delay_step_s = parse_double(full, v);
        else throw ConfigError("unknown key '" + key + "' in section [baselines]");
    } else {
        throw ConfigError("unknown config section [" + sec + "]");
    }
}

} // namespace

TwinMode mode_from_name(const std::string& name) {
    if (name == "static") return TwinMode::static_scene;
    if (name == "dynamic") return TwinMode::dynamic_scene;
    throw ConfigError("mode must be 'static' or 'dynamic', got '" + name + "'");
}

const char* mode_name(TwinMode mode) {
    return mode == TwinMode::static_scene ? "static" : "dynamic";
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": malformed section header '" + line + "'");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected key = value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw ConfigError("line " + std::to_string(line_no) +
                              ": key '" + key + "' outside any section");
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");
        assign(cfg, section, key, value);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& ov) {
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.mode) cfg.mode = mode_from_name(*ov.mode);
    if (ov.supervision) cfg.supervision_pct = *ov.supervision;
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
    cfg.validate();
}

void ExperimentConfig::validate() const {
    if (n_samples < 3) throw ConfigError("n_samples must be >= 3");
    if (supervision_pct.empty()) throw ConfigError("supervision list must not be empty");
    for (double s : supervision_pct)
        if (!(s > 0.0) || !(s < 100.0))
            throw ConfigError("supervision percentages must lie in (0, 100)");
    if (validation_fraction < 0.0 || validation_fraction >= 1.0)
        throw ConfigError("validation_fraction must lie in [0, 1)");
    if (n_vehicles < 1) throw ConfigError("n_vehicles must be >= 1");
    if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (!(dt_s > 0.0)) throw ConfigError("dt_s must be positive");
    if (static_cast<long long>(n_vehicles) * n_steps < n_samples)
        throw ConfigError("traffic pool (n_vehicles * n_steps) smaller than n_samples");
    channel.validate();
    if (bs_array.rows < 1 || bs_array.cols < 1 || ue_array.rows < 1 || ue_array.cols < 1)
        throw ConfigError("array dimensions must be positive");
    if (!(eig_floor > 0.0)) throw ConfigError("eig_floor must be positive");
    if (!(fingerprint.cell_size_m > 0.0)) throw ConfigError("cell_size_m must be positive");
    if (fingerprint.k_f < 1) throw ConfigError("k_f must be >= 1");
    if (music.assumed_sources < 1 || music.assumed_sources >= bs_array.size())
        throw ConfigError("music_sources must lie in [1, N_R)");
    if (!(music.az_step_rad > 0.0) || !(music.delay_step_s > 0.0))
        throw ConfigError("music grid steps must be positive");
    if (k_neighbors < 0) throw ConfigError("k_neighbors must be >= 0");
    // Charting bounds that do not depend on N; the N-dependent part runs in fit.
    if (charting.iterations < 1) throw ConfigError("iterations must be >= 1");
    if (charting.momentum < 0.0 || charting.momentum >= 1.0)
        throw ConfigError("momentum must lie in [0, 1)");
    if (!(charting.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

std::string canonical_config_text(const ExperimentConfig& c) {
    char buf[25600];
    int n = std::snprintf(
        buf, sizeof(buf),
        "[experiment]\n"
        "n_samples = %d\nmode = %s\nsupervision = ",
        c.n_samples, mode_name(c.mode));
    std::string out(buf, static_cast<size_t>(n));
    for (size_t i = 0; i < c.supervision_pct.size(); ++i) {
        n = std::snprintf(buf, sizeof(buf), "%s%.17g", i ? "," : "", c.supervision_pct[i]);
        out.append(buf, static_cast<size_t>(n));
    }
    n = std::snprintf(
        buf, sizeof(buf),
        "\nvalidation_fraction = %.17g\nseed = %llu\nper_point_split = %d\n"
        "[scene]\n"
        "width_m = %.17g\nheight_m = %.17g\nblock_m = %.17g\nstreet_m = %.17g\n"
        "min_height_m = %.17g\nmax_height_m = %.17g\nglass_fraction = %.17g\n"
        "bs_height_m = %.17g\n"
        "[traffic]\n"
        "n_vehicles = %d\nn_steps = %d\ndt_s = %.17g\n"
        "[raytrace]\n"
        "max_order = %d\nground_reflection = %d\nvehicle_reflections = %d\n"
        "max_path_length_m = %.17g\nconcrete_loss_db = %.17g\nglass_loss_db = %.17g\n"
        "vehicle_loss_db = %.17g\n"
        "[channel]\n"
        "f0_hz = %.17g\nbandwidth_hz = %.17g\ntau_max_s = %.17g\nn_subcarriers = %d\n"
        "rolloff = %.17g\npulse_half_taps = %d\nbs_rows = %d\nbs_cols = %d\n"
        "ue_rows = %d\nue_cols = %d\nspacing_wavelengths = %.17g\nestimate = %d\n"
        "wssus = %d\npilot_length = %d\npilot_power = %.17g\npilot_seed = %llu\n"
        "snr_db = %.17g\nnoise_power = %.17g\ninterferer = %d\ninterferer_az = %.17g\n"
        "interferer_el = %.17g\ninterferer_power_db = %.17g\n"
        "[features]\n"
        "eig_floor = %.17g\n"
        "[charting]\n"
        "perplexity = %.17g\nmomentum = %.17g\nlearning_rate = %.17g\niterations = %d\n"
        "anchor_mode = %s\npenalty_weight = %.17g\nnorm_scale_m = %.17g\n"
        "exaggeration = %.17g\nexaggeration_iters = %d\n"
        "[evaluate]\n"
        "k_neighbors = %d\n"
        "[baselines]\n"
        "cell_size_m = %.17g\nk_f = %d\nmusic_sources = %d\nmusic_az_step_rad = %.17g\n"
        "music_delay_step_s = %.17g\n",
        c.validation_fraction, static_cast<unsigned long long>(c.seed),
        c.per_point_split ? 1 : 0, c.scene.width_m, c.scene.height_m, c.scene.block_m,
        c.scene.street_m, c.scene.min_height_m, c.scene.max_height_m,
        c.scene.glass_fraction, c.scene.bs_height_m, c.n_vehicles, c.n_steps, c.dt_s,
        c.trace.max_order, c.trace.ground_reflection ? 1 : 0,
        c.trace.vehicle_reflections ? 1 : 0, c.trace.max_path_length_m,
        c.trace.concrete_loss_db, c.trace.glass_loss_db, c.trace.vehicle_loss_db,
        c.channel.f0_hz, c.channel.bandwidth_hz, c.channel.tau_max_s,
        c.channel.n_subcarriers, c.channel.rolloff, c.channel.pulse_half_taps,
        c.bs_array.rows, c.bs_array.cols, c.ue_array.rows, c.ue_array.cols,
        c.bs_array.spacing_wavelengths, c.estimate ? 1 : 0, c.wssus ? 1 : 0,
        c.pilot.length, c.pilot.tx_power, static_cast<unsigned long long>(c.pilot.seed),
        c.noise.snr_db, c.noise.noise_power, c.noise.interferer ? 1 : 0,
        c.noise.interferer_az, c.noise.interferer_el, c.noise.interferer_power_db,
        c.eig_floor, c.charting.perplexity, c.charting.momentum,
        c.charting.learning_rate, c.charting.iterations,
        c.charting.anchor_mode == AnchorMode::hard ? "hard" : "penalty",
        c.charting.penalty_weight, c.charting.norm_scale_m, c.charting.exaggeration,
        c.charting.exaggeration_iters, c.k_neighbors, c.fingerprint.cell_size_m,
        c.fingerprint.k_f, c.music.assumed_sources, c.music.az_step_rad,
        c.music.delay_step_s);
    out.append(buf, static_cast<size_t>(n));
    return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    return fnv1a64(canonical_config_text(cfg));
}

} // namespace chartlab
