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

#include "chartlab/channel.hpp"

#include <cmath>

namespace chartlab {

int ChannelConfig::n_taps() const {
    // Tiny negative slack so an exact integer tau_max * B does not round up
    // through floating-point noise.
    return static_cast<int>(std::ceil(tau_max_s * bandwidth_hz - 1e-9));
}

void ChannelConfig::validate() const {
    if (bandwidth_hz <= 0.0) throw ConfigError("bandwidth must be positive");
    if (f0_hz <= 0.0) throw ConfigError("carrier frequency must be positive");
    if (tau_max_s <= 0.0) throw ConfigError("tau_max must be positive");
    if (rolloff < 0.0 || rolloff > 1.0) throw ConfigError("roll-off must lie in [0, 1]");
    if (pulse_half_taps < 1) throw ConfigError("pulse support must cover >= 1 tap");
    const int w = n_taps();
    if (w < 1) throw ConfigError("tap window W must be >= 1");
    if (n_subcarriers < w)
        throw ConfigError("n_subcarriers must be >= W so all taps are resolved");
}

Eigen::VectorXcd steering_vector(const ArrayConfig& array, double az, double el) {
    if (array.rows < 1 || array.cols < 1)
        throw ConfigError("steering_vector requires a nonempty array");
    const double local_az = az - array.boresight_az;
    const double kd = 2.0 * kPi * array.spacing_wavelengths;
    const double ph_row = kd * std::sin(el);
    const double ph_col = kd * std::sin(local_az) * std::cos(el);
    Eigen::VectorXcd a(array.size());
    for (int m = 0; m < array.rows; ++m)
        for (int n = 0; n < array.cols; ++n) {
            const double phase = m * ph_row + n * ph_col;
            a(m * array.cols + n) = cplx(std::cos(phase), std::sin(phase));
        }
    return a;
}

double pulse(double t_s, const ChannelConfig& cfg) {
    const double b = cfg.rolloff;
    const double t = t_s * cfg.bandwidth_hz;  // in sample periods
    if (std::abs(t) > cfg.pulse_half_taps) return 0.0;
    if (std::abs(t) < 1e-10) return 1.0 - b + 4.0 * b / kPi;
    if (b > 0.0) {
        // Removable singularity at |t| = 1/(4b).
        const double s = 4.0 * b * std::abs(t);
        if (std::abs(s - 1.0) < 1e-7) {
            const double x = kPi / (4.0 * b);
            return b / std::sqrt(2.0) *
                   ((1.0 + 2.0 / kPi) * std::sin(x) + (1.0 - 2.0 / kPi) * std::cos(x));
        }
    }
    const double num =
        std::sin(kPi * t * (1.0 - b)) + 4.0 * b * t * std::cos(kPi * t * (1.0 + b));
    const double den = kPi * t * (1.0 - 16.0 * b * b * t * t);
    return num / den;
}

ChannelTaps synthesize_taps(const std::vector<PathTuple>& paths,
                            const ArrayConfig& tx_array, const ArrayConfig& rx_array,
                            double t_s, const ChannelConfig& cfg,
                            std::optional<std::uint64_t> wssus_seed) {
    cfg.validate();
    if (tx_array.rows < 1 || tx_array.cols < 1 || rx_array.rows < 1 || rx_array.cols < 1)
        throw ConfigError("synthesize_taps requires nonempty arrays");

    const int w_taps = cfg.n_taps();
    const double period = cfg.sample_period_s();
    ChannelTaps h(static_cast<size_t>(w_taps),
                  Eigen::MatrixXcd::Zero(rx_array.size(), tx_array.size()));

    std::optional<Rng> rng;
    if (wssus_seed) rng.emplace(*wssus_seed);

    for (const PathTuple& p : paths) {
        const Eigen::VectorXcd a_r = steering_vector(rx_array, p.doa_az, p.doa_el);
        const Eigen::VectorXcd a_t = steering_vector(tx_array, p.dod_az, p.dod_el);
        cplx alpha;
        if (rng) {
            alpha = std::sqrt(p.power) * rng->cgauss();
        } else {
            const double phase = 2.0 * kPi * (p.doppler_hz * t_s - cfg.f0_hz * p.delay_s);
            alpha = std::sqrt(p.power) * cplx(std::cos(phase), std::sin(phase));
        }
        const Eigen::MatrixXcd outer = alpha * (a_r * a_t.transpose());

        // Pulse support limits the touched taps to a window around tau * B.
        const double center = p.delay_s * cfg.bandwidth_hz;
        const int w_lo = std::max(0, static_cast<int>(std::floor(center)) - cfg.pulse_half_taps);
        const int w_hi = std::min(w_taps - 1,
                                  static_cast<int>(std::ceil(center)) + cfg.pulse_half_taps);
        for (int w = w_lo; w <= w_hi; ++w) {
            const double g = pulse(w * period - p.delay_s, cfg);
            if (g != 0.0) h[static_cast<size_t>(w)] += g * outer;
        }
    }
    return h;
}

double taps_energy(const ChannelTaps& taps) {
    double e = 0.0;
    for (const Eigen::MatrixXcd& h : taps) e += h.squaredNorm();
    return e;
}

std::vector<Eigen::MatrixXcd> taps_to_frequency(const ChannelTaps& taps,
                                                const ChannelConfig& cfg) {
    const int n_c = cfg.n_subcarriers;
    if (static_cast<int>(taps.size()) > n_c)
        throw ConfigError("taps_to_frequency requires N_c >= W");
    if (taps.empty()) throw DataError("taps_to_frequency requires at least one tap");

    std::vector<Eigen::MatrixXcd> freq(
        static_cast<size_t>(n_c),
        Eigen::MatrixXcd::Zero(taps[0].rows(), taps[0].cols()));
    for (int n = 0; n < n_c; ++n) {
        Eigen::MatrixXcd& acc = freq[static_cast<size_t>(n)];
        for (size_t w = 0; w < taps.size(); ++w) {
            const double phase = -2.0 * kPi * static_cast<double>(n) *
                                 static_cast<double>(w) / static_cast<double>(n_c);
            acc += cplx(std::cos(phase), std::sin(phase)) * taps[w];
        }
    }
    return freq;
}

namespace {

double resolve_noise_power(const NoiseModel& noise, const ChannelTaps& truth,
                           double tx_power, int n_rx) {
    if (noise.noise_power >= 0.0) return noise.noise_power;
    if (std::isinf(noise.snr_db)) return 0.0;
    // Signal power per receive antenna under an iid pilot of variance tx_power.
    const double sig = tx_power * taps_energy(truth) / n_rx;
    return sig * std::pow(10.0, -noise.snr_db / 10.0);
}

} // namespace

ChannelEstimator::ChannelEstimator(int n_tx, int n_taps, const PilotConfig& pilot,
                                   const ArrayConfig& rx_array)
    : n_tx_(n_tx), n_taps_(n_taps), tx_power_(pilot.tx_power), rx_array_(rx_array) {
    if (n_tx < 1 || n_taps < 1)
        throw ConfigError("estimator requires positive dimensions");
    if (pilot.tx_power <= 0.0) throw ConfigError("pilot power must be positive");
    const int min_len = n_taps * n_tx;
    const int m = pilot.length > 0 ? pilot.length : min_len;
    if (m < min_len)
        throw ConfigError("pilot too short for identifiability: need length >= W * N_T");

    // Pilot symbols x[s] in C^{n_tx}, iid CN(0, tx_power).
    Rng rng(pilot.seed);
    Eigen::MatrixXcd sym(n_tx, m);
    const double scale = std::sqrt(pilot.tx_power);
    for (int s = 0; s < m; ++s)
        for (int j = 0; j < n_tx; ++j) sym(j, s) = scale * rng.cgauss();

    // Block-Toeplitz convolution operator: row block l holds the pilot
    // delayed by l samples, so Y = [h[0] ... h[W-1]] X is the full linear
    // convolution sum_l h[l] x[s - l].
    const int cols = m + n_taps - 1;
    x_ = Eigen::MatrixXcd::Zero(n_taps * n_tx, cols);
    for (int l = 0; l < n_taps; ++l)
        x_.block(l * n_tx, l, n_tx, m) = sym;

    gram_.compute(Eigen::MatrixXcd(x_ * x_.adjoint()));
    if (gram_.info() != Eigen::Success)
        throw NumericalError("pilot Gram matrix factorization failed");
}

ChannelTaps ChannelEstimator::estimate(const ChannelTaps& truth, const NoiseModel& noise,
                                       std::uint64_t noise_seed) const {
    if (static_cast<int>(truth.size()) != n_taps_)
        throw ConfigError("tap count does not match estimator");
    const int n_rx = static_cast<int>(truth[0].rows());
    if (static_cast<int>(truth[0].cols()) != n_tx_)
        throw ConfigError("tx antenna count does not match estimator");

    Eigen::MatrixXcd stacked(n_rx, n_taps_ * n_tx_);
    for (int l = 0; l < n_taps_; ++l) stacked.middleCols(l * n_tx_, n_tx_) = truth[static_cast<size_t>(l)];

    Eigen::MatrixXcd y = stacked * x_;

    const double sigma2 = resolve_noise_power(noise, truth, tx_power_, n_rx);
    if (sigma2 > 0.0) {
        Rng rng(noise_seed);
        Eigen::MatrixXcd n(n_rx, y.cols());
        const double s = std::sqrt(sigma2);
        for (Eigen::Index c = 0; c < n.cols(); ++c)
            for (Eigen::Index r = 0; r < n.rows(); ++r) n(r, c) = s * rng.cgauss();
        if (noise.interferer) {
            // Q = sigma^2 (I + p u u^H) has square root I + (sqrt(1+p)-1) u u^H.
            Eigen::VectorXcd u =
                steering_vector(rx_array_, noise.interferer_az, noise.interferer_el);
            u /= u.norm();
            const double p = std::pow(10.0, noise.interferer_power_db / 10.0);
            n += (std::sqrt(1.0 + p) - 1.0) * u * (u.adjoint() * n);
        }
        y += n;
    }

    // LS: H_hat = Y X^H (X X^H)^{-1}, solved through the cached factorization.
    Eigen::MatrixXcd est = gram_.solve(x_ * y.adjoint()).adjoint();

    ChannelTaps out(static_cast<size_t>(n_taps_));
    for (int l = 0; l < n_taps_; ++l) out[static_cast<size_t>(l)] = est.middleCols(l * n_tx_, n_tx_);
    return out;
}

ChannelTaps estimate_channel(const ChannelTaps& truth, const PilotConfig& pilot,
                             const NoiseModel& noise, std::uint64_t noise_seed,
                             const ArrayConfig& rx_array) {
    if (truth.empty()) throw DataError("estimate_channel requires at least one tap");
    ChannelEstimator est(static_cast<int>(truth[0].cols()),
                         static_cast<int>(truth.size()), pilot, rx_array);
    return est.estimate(truth, noise, noise_seed);
}

Eigen::MatrixXcd csi_covariance(const std::vector<Eigen::MatrixXcd>& freq_response) {
    if (freq_response.empty())
        throw DataError("csi_covariance requires at least one subcarrier");
    const Eigen::Index n_rx = freq_response[0].rows();
    const Eigen::Index n_tx = freq_response[0].cols();
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(n_rx, n_rx);
    for (const Eigen::MatrixXcd& h : freq_response) {
        if (h.rows() != n_rx || h.cols() != n_tx)
            throw DataError("inconsistent subcarrier dimensions");
        c.selfadjointView<Eigen::Lower>().rankUpdate(h, 1.0);
    }
    c = c.selfadjointView<Eigen::Lower>();  // mirror for exact Hermitian symmetry
    c /= static_cast<double>(freq_response.size()) * static_cast<double>(n_tx);
    return c;
}

} // namespace chartlab
