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
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "chartlab/common.hpp"
#include "chartlab/raytrace.hpp"

namespace chartlab {

/// Discrete-time channel parameters. The tap grid spans the excess-delay
/// window [0, tau_max] at sample period T = 1/B.
struct ChannelConfig {
    double f0_hz = 28e9;
    double bandwidth_hz = 200e6;
    double tau_max_s = 480e-9;
    int n_subcarriers = 128;
    double rolloff = 0.25;     // root-raised-cosine excess bandwidth
    int pulse_half_taps = 8;   // pulse truncated to |t| <= this many samples

    double sample_period_s() const { return 1.0 / bandwidth_hz; }
    int n_taps() const;        // W = ceil(tau_max / T)
    void validate() const;     // throws ConfigError on violated invariants
};

/// Known pilot block: length symbols of iid CN(0, tx_power) across the
/// transmit antennas, generated from `seed` alone.
struct PilotConfig {
    double tx_power = 1.0;
    int length = 0;            // 0 = auto: W * n_tx (minimum identifiable)
    std::uint64_t seed = 0x9d2c5680u;
};

/// Receiver noise n ~ CN(0, Q). Q = sigma^2 * I by default; with
/// `interferer` set, Q = sigma^2 * (I + p * u u^H) for a unit-norm steering
/// vector u toward the interferer and p = 10^(power_db/10).
/// sigma^2 comes from `noise_power` when nonnegative, otherwise from snr_db
/// against the per-receive-antenna signal energy of the true channel.
struct NoiseModel {
    double snr_db = std::numeric_limits<double>::infinity();
    double noise_power = -1.0;
    bool interferer = false;
    double interferer_az = 0.0;
    double interferer_el = 0.0;
    double interferer_power_db = 10.0;
};

/// h[w], w = 0..W-1, each N_R x N_T.
using ChannelTaps = std::vector<Eigen::MatrixXcd>;

/// Narrowband array response for a planar array: entry (m, n), flattened as
/// m * cols + n, has phase 2*pi*spacing*(m*sin(el) + n*sin(az') cos(el)) with
/// az' = az - boresight.
Eigen::VectorXcd steering_vector(const ArrayConfig& array, double az, double el);

/// Root-raised-cosine pulse evaluated at t seconds (normalized internally by
/// the sample period), truncated to +/- pulse_half_taps samples.
double pulse(double t_s, const ChannelConfig& cfg);

/// Sum-over-paths tap synthesis:
///   h[w] = sum_p alpha_p a_R(doa_p) a_T(dod_p)^T g(w T - tau_p).
/// Deterministic mode: alpha_p = sqrt(power_p) exp(j(2 pi nu_p t - 2 pi f0 tau_p)).
/// With wssus_seed set, alpha_p ~ CN(0, power_p) drawn per call instead.
ChannelTaps synthesize_taps(const std::vector<PathTuple>& paths,
                            const ArrayConfig& tx_array, const ArrayConfig& rx_array,
                            double t_s, const ChannelConfig& cfg,
                            std::optional<std::uint64_t> wssus_seed = std::nullopt);

double taps_energy(const ChannelTaps& taps);  // sum_w |h[w]|_F^2

/// Per-subcarrier response H[n] = sum_w h[w] exp(-j 2 pi n w / N_c),
/// n = 0..N_c-1. Requires N_c >= W.
std::vector<Eigen::MatrixXcd> taps_to_frequency(const ChannelTaps& taps,
                                                const ChannelConfig& cfg);

/// Least-squares channel estimation from a block-Toeplitz pilot convolution.
/// The pilot matrix and its Gram factorization depend only on the dimensions
/// and PilotConfig, so one instance serves a whole dataset.
class ChannelEstimator {
public:
    ChannelEstimator(int n_tx, int n_taps, const PilotConfig& pilot,
                     const ArrayConfig& rx_array);

    /// Simulates Y = H X + N and returns the LS estimate of the taps.
    ChannelTaps estimate(const ChannelTaps& truth, const NoiseModel& noise,
                         std::uint64_t noise_seed) const;

    const Eigen::MatrixXcd& pilot_matrix() const { return x_; }
    int n_tx() const { return n_tx_; }
    int n_taps() const { return n_taps_; }

private:
    int n_tx_ = 0;
    int n_taps_ = 0;
    double tx_power_ = 1.0;
    ArrayConfig rx_array_;
    Eigen::MatrixXcd x_;                    // (W n_tx) x (M + W - 1)
    Eigen::LDLT<Eigen::MatrixXcd> gram_;    // factorization of X X^H
};

/// One-shot convenience wrapper around ChannelEstimator.
ChannelTaps estimate_channel(const ChannelTaps& truth, const PilotConfig& pilot,
                             const NoiseModel& noise, std::uint64_t noise_seed,
                             const ArrayConfig& rx_array);

/// Receive-side spatial covariance averaged over subcarriers and Tx columns:
///   C = (1 / (N_c N_T)) sum_n H[n] H[n]^H.
Eigen::MatrixXcd csi_covariance(const std::vector<Eigen::MatrixXcd>& freq_response);

} // namespace chartlab
