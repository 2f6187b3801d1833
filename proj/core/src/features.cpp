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

#include "chartlab/features.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "chartlab/common.hpp"

namespace chartlab {
namespace {

constexpr char kDissimilarityMagic[8] = {'C', 'L', 'D', 'M', '0', '0', '0', '1'};

} // namespace

Eigen::MatrixXcd hermitian_log(const Eigen::MatrixXcd& c, double eig_floor) {
    if (c.rows() != c.cols() || c.rows() < 1)
        throw NumericalError("hermitian_log requires a square matrix");
    const double scale = c.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) throw NumericalError("hermitian_log of a zero matrix");
    if ((c - c.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw NumericalError("hermitian_log input is not Hermitian within tolerance");
    const double tr = c.real().trace();
    if (!(tr > 0.0)) throw NumericalError("hermitian_log requires positive trace");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(c);
    if (eig.info() != Eigen::Success)
        throw NumericalError("hermitian_log eigendecomposition failed");

    const double floor = eig_floor * tr / static_cast<double>(c.rows());
    Eigen::VectorXd lam = eig.eigenvalues();
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        lam(i) = std::log(std::max(lam(i), floor));

    Eigen::MatrixXcd out =
        eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().adjoint();
    out = (out + out.adjoint().eval()) / 2.0;  // exact Hermitian symmetry
    return out;
}

double log_euclidean_distance(const Eigen::MatrixXcd& cm, const Eigen::MatrixXcd& cn,
                              double eig_floor) {
    if (cm.rows() != cn.rows() || cm.cols() != cn.cols())
        throw NumericalError("log_euclidean_distance requires matching shapes");
    return (hermitian_log(cm, eig_floor) - hermitian_log(cn, eig_floor)).norm();
}

Eigen::MatrixXd dissimilarity_matrix(const std::vector<Eigen::MatrixXcd>& covariances,
                                     double eig_floor) {
    const size_t n = covariances.size();
    if (n < 2) throw DataError("dissimilarity_matrix requires at least two samples");

    std::vector<Eigen::MatrixXcd> logs;
    logs.reserve(n);
    for (const Eigen::MatrixXcd& c : covariances) logs.push_back(hermitian_log(c, eig_floor));

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) {
            const double v = (logs[i] - logs[j]).norm();
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    return d;
}

void save_dissimilarity(const std::string& path, const Eigen::MatrixXd& d) {
    if (d.rows() != d.cols() || d.rows() < 1)
        throw DataError("dissimilarity matrix must be square");
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw DataError("cannot open dissimilarity file for writing: " + path);
    const std::uint64_t n = static_cast<std::uint64_t>(d.rows());
    bool ok = std::fwrite(kDissimilarityMagic, 1, 8, f) == 8 &&
              std::fwrite(&n, sizeof(n), 1, f) == 1;
    for (Eigen::Index i = 0; ok && i < d.rows(); ++i)
        for (Eigen::Index j = i + 1; ok && j < d.cols(); ++j) {
            const double v = d(i, j);
            ok = std::fwrite(&v, sizeof(v), 1, f) == 1;
        }
    if (std::fclose(f) != 0 || !ok)
        throw DataError("failed to write dissimilarity file: " + path);
}

Eigen::MatrixXd load_dissimilarity(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw DataError("cannot open dissimilarity file: " + path);
    char magic[8];
    std::uint64_t n = 0;
    if (std::fread(magic, 1, 8, f) != 8 || std::memcmp(magic, kDissimilarityMagic, 8) != 0 ||
        std::fread(&n, sizeof(n), 1, f) != 1 || n < 1 || n > (1u << 20)) {
        std::fclose(f);
        throw DataError("not a dissimilarity file: " + path);
    }
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = i + 1; j < d.cols(); ++j) {
            double v = 0;
            if (std::fread(&v, sizeof(v), 1, f) != 1) {
                std::fclose(f);
                throw DataError("truncated dissimilarity file: " + path);
            }
            d(i, j) = v;
            d(j, i) = v;
        }
    std::fclose(f);
    return d;
}

} // namespace chartlab
