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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "chartlab/common.hpp"

namespace chartlab::oracle {

void jacobi_eigen(Eigen::MatrixXd a, Eigen::VectorXd* evals, Eigen::MatrixXd* evecs) {
    const int n = static_cast<int>(a.rows());
    if (a.cols() != n) throw std::invalid_argument("jacobi_eigen: square input required");
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double scale = std::max(1.0, a.norm());
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) < 1e-15 * scale) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (tau >= 0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }
    *evals = a.diagonal();
    *evecs = v;
}

Eigen::MatrixXcd hermitian_fn(const Eigen::MatrixXcd& c, SpectralFn fn,
                              double eig_clamp) {
    const int n = static_cast<int>(c.rows());
    Eigen::MatrixXd m(2 * n, 2 * n);
    m.topLeftCorner(n, n) = c.real();
    m.topRightCorner(n, n) = -c.imag();
    m.bottomLeftCorner(n, n) = c.imag();
    m.bottomRightCorner(n, n) = c.real();
    m = 0.5 * (m + m.transpose().eval());  // kill roundoff asymmetry

    Eigen::VectorXd lam;
    Eigen::MatrixXd v;
    jacobi_eigen(m, &lam, &v);
    for (int i = 0; i < lam.size(); ++i) {
        // The clamp keeps log() off nonpositive values; exp() is entire and
        // must see the eigenvalue as-is (log matrices are indefinite).
        lam(i) = fn == SpectralFn::log ? std::log(std::max(lam(i), eig_clamp))
                                       : std::exp(lam(i));
    }
    const Eigen::MatrixXd f = v * lam.asDiagonal() * v.transpose();
    Eigen::MatrixXcd out(n, n);
    out.real() = f.topLeftCorner(n, n);
    out.imag() = f.bottomLeftCorner(n, n);
    return out;
}

double log_euclidean(const Eigen::MatrixXcd& cm, const Eigen::MatrixXcd& cn,
                     double eig_floor) {
    const int n = static_cast<int>(cm.rows());
    const Eigen::MatrixXcd lm =
        hermitian_fn(cm, SpectralFn::log, eig_floor * cm.trace().real() / n);
    const Eigen::MatrixXcd ln =
        hermitian_fn(cn, SpectralFn::log, eig_floor * cn.trace().real() / n);
    return (lm - ln).norm();
}

namespace {

/// ranks(i, j) = position (1-based) of j in ascending distance from i,
/// excluding i itself.
Eigen::MatrixXi rank_matrix(const Eigen::MatrixXd& pts) {
    const int n = static_cast<int>(pts.rows());
    Eigen::MatrixXi ranks = Eigen::MatrixXi::Zero(n, n);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double da = (pts.row(a) - pts.row(i)).squaredNorm();
            const double db = (pts.row(b) - pts.row(i)).squaredNorm();
            if (da != db) return da < db;
            return a < b;
        });
        int r = 0;
        for (int j : order) {
            if (j == i) continue;
            ranks(i, j) = ++r;
        }
    }
    return ranks;
}

double neighborhood_metric(const Eigen::MatrixXd& from, const Eigen::MatrixXd& to,
                           int k) {
    // Penalize `from`-space K-neighbors whose `to`-space rank exceeds K.
    const int n = static_cast<int>(from.rows());
    const Eigen::MatrixXi rf = rank_matrix(from);
    const Eigen::MatrixXi rt = rank_matrix(to);
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            if (rf(i, j) <= k && rt(i, j) > k) acc += rt(i, j) - k;
        }
    const double norm = 2.0 / (static_cast<double>(n) * k * (2.0 * n - 3.0 * k - 1.0));
    return 1.0 - norm * acc;
}

} // namespace

double continuity(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart, int k) {
    return neighborhood_metric(truth, chart, k);
}

double trustworthiness(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart,
                       int k) {
    return neighborhood_metric(chart, truth, k);
}

double kruskal_stress(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& chart) {
    const int n = static_cast<int>(truth.rows());
    double num_beta = 0.0, den_beta = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double dt = (truth.row(i) - truth.row(j)).norm();
            const double dc = (chart.row(i) - chart.row(j)).norm();
            num_beta += dt * dc;
            den_beta += dc * dc;
        }
    const double beta = den_beta > 0.0 ? num_beta / den_beta : 0.0;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double dt = (truth.row(i) - truth.row(j)).norm();
            const double dc = (chart.row(i) - chart.row(j)).norm();
            num += (dt - beta * dc) * (dt - beta * dc);
            den += dt * dt;
        }
    return std::sqrt(num / den);
}

double kl(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        for (Eigen::Index j = 0; j < p.cols(); ++j) {
            if (i == j || p(i, j) <= 0.0) continue;
            acc += p(i, j) * std::log(p(i, j) / std::max(q(i, j), 1e-12));
        }
    return acc;
}

Eigen::MatrixXd student_q(const Eigen::MatrixXd& z) {
    const int n = static_cast<int>(z.rows());
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    double total = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            q(i, j) = 1.0 / (1.0 + (z.row(i) - z.row(j)).squaredNorm());
            total += q(i, j);
        }
    return q / total;
}

std::vector<double> perplexity_row(const std::vector<double>& sq_dist, double target) {
    auto eval = [&](double beta, std::vector<double>* out) {
        double sum = 0.0;
        std::vector<double> p(sq_dist.size());
        for (size_t j = 0; j < sq_dist.size(); ++j) {
            p[j] = std::exp(-beta * sq_dist[j]);
            sum += p[j];
        }
        double h = 0.0;
        for (double& pj : p) {
            pj /= sum;
            if (pj > 0.0) h -= pj * std::log(pj);
        }
        if (out) *out = p;
        return std::exp(h);
    };
    double lo = 0.0, hi = 1.0;
    while (eval(hi, nullptr) > target) hi *= 2.0;  // larger beta -> lower perplexity
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (eval(mid, nullptr) > target)
            lo = mid;
        else
            hi = mid;
    }
    std::vector<double> p;
    eval(0.5 * (lo + hi), &p);
    return p;
}

Eigen::Vector3d reflect_across_plane(const Eigen::Vector3d& p,
                                     const Eigen::Vector3d& q0,
                                     const Eigen::Vector3d& n) {
    return p - 2.0 * (p - q0).dot(n) * n;
}

double free_space_gain(double d_m, double f0_hz) {
    const double x = kSpeedOfLight / (4.0 * kPi * d_m * f0_hz);
    return x * x;
}

Eigen::MatrixXcd random_psd(int n, std::uint64_t seed, double ridge) {
    Rng rng(seed);
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.cgauss();
    Eigen::MatrixXcd c = a * a.adjoint() / static_cast<double>(n);
    c += ridge * Eigen::MatrixXcd::Identity(n, n);
    return 0.5 * (c + c.adjoint().eval());
}

} // namespace chartlab::oracle
