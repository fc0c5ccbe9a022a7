/*
 * Copyright 2026 The rramfda Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RRAMFDA_FPCA_HPP_
#define RRAMFDA_FPCA_HPP_

#include <vector>

#include <Eigen/Dense>

#include "rramfda/bspline.hpp"
#include "rramfda/psmooth.hpp"

namespace rramfda {

/// Sample Karhunen-Loeve decomposition of curves expanded in a common
/// basis. Components are indexed from 0 (component 0 is the first PC).
///
/// Weight function j is f_j(u) = sum_k weight_coefs(j, k) phi_k(u); the
/// rows of weight_coefs are orthonormal in the Gram metric, eigenvalues are
/// non-increasing, and scores(i, j) = int (I_i - mean) f_j.
struct FpcaModel {
  BasisSpec spec;
  GramMatrix gram;
  Eigen::VectorXd mean_coefs;
  Eigen::VectorXd eigenvalues;      // length q_max
  Eigen::MatrixXd weight_coefs;     // q_max x p
  Eigen::MatrixXd scores;           // n x q_max
  Eigen::MatrixXd coef_covariance;  // p x p sample covariance of the coefficients
  double total_variance = 0.0;      // sum of all p eigenvalues

  int q_max() const { return static_cast<int>(eigenvalues.size()); }
};

struct VarianceTable {
  std::vector<double> percent;     // 100 * lambda_j / total variance
  std::vector<double> cumulative;  // running sums of percent
};

/// Centers the coefficients, eigendecomposes the covariance of
/// A_c Psi^{1/2} (divisor n-1) and maps eigenvectors back through
/// Psi^{-1/2}. Each weight function is signed so that its integral is
/// non-negative (ties: non-negative value at the left end, then a positive
/// largest coefficient).
FpcaModel fit_fpca(const CoefMatrix& coefs, const GramMatrix& gram, int q_max);

VarianceTable explained_variance(const FpcaModel& model, int q);

/// mean + sum_{j<q} scores[j] * b_j. `scores` must have exactly q entries.
Eigen::VectorXd reconstruct(const FpcaModel& model, const Eigen::Ref<const Eigen::VectorXd>& scores,
                            int q);

/// Row-wise reconstruction of an n x q score matrix.
Eigen::MatrixXd reconstruct_all(const FpcaModel& model, const Eigen::Ref<const Eigen::MatrixXd>& scores,
                                int q);

/// Scores of new curves: (a - mean)' Psi b_j for the first q components.
Eigen::MatrixXd project_scores(const FpcaModel& model, const Eigen::Ref<const Eigen::MatrixXd>& coefs,
                               int q);

double eval_mean(const FpcaModel& model, double u);
double eval_weight(const FpcaModel& model, int component, double u);

/// Sample covariance function C(u, v) = phi(u)' S_A phi(v).
double eval_covariance(const FpcaModel& model, double u, double v);

}  // namespace rramfda

#endif  // RRAMFDA_FPCA_HPP_
