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

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace chartlab {

/// Default relative eigenvalue floor for matrix logarithms. Covariances are
/// rank-deficient whenever the effective path count is below N_R, so small
/// eigenvalues are clamped to eig_floor * trace(C) / N before the log.
inline constexpr double kDefaultEigFloor = 1e-10;

/// Principal matrix logarithm of a Hermitian PSD matrix with eigenvalue
/// clamping. Throws NumericalError when C is non-Hermitian beyond
/// 1e-10 * max|C_ij| or has nonpositive trace.
Eigen::MatrixXcd hermitian_log(const Eigen::MatrixXcd& c,
                               double eig_floor = kDefaultEigFloor);

/// Log-Euclidean dissimilarity || log Cm - log Cn ||_F.
double log_euclidean_distance(const Eigen::MatrixXcd& cm, const Eigen::MatrixXcd& cn,
                              double eig_floor = kDefaultEigFloor);

/// Full pairwise dissimilarity matrix. Computes the N logarithms once, then
/// fills the upper triangle and mirrors it, so D is exactly symmetric with a
/// zero diagonal.
Eigen::MatrixXd dissimilarity_matrix(const std::vector<Eigen::MatrixXcd>& covariances,
                                     double eig_floor = kDefaultEigFloor);

/// Binary persistence: magic, N, then the strict upper triangle row by row.
void save_dissimilarity(const std::string& path, const Eigen::MatrixXd& d);
Eigen::MatrixXd load_dissimilarity(const std::string& path);

} // namespace chartlab
