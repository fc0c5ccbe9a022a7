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

#ifndef RRAMFDA_BANDED_HPP_
#define RRAMFDA_BANDED_HPP_

#include <Eigen/Dense>

namespace rramfda {

/// Cholesky factor of a symmetric positive-definite band matrix with
/// `bandwidth` sub-diagonals. Factor storage is (bandwidth+1) x n.
class BandedCholesky {
 public:
  /// Factors the band of `m` (entries outside the band are ignored).
  /// Returns false if a pivot is not positive.
  bool compute(const Eigen::MatrixXd& m, int bandwidth);

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  /// Full inverse, one banded solve per column.
  Eigen::MatrixXd inverse() const;

  int size() const { return static_cast<int>(band_.cols()); }

 private:
  double& at(int i, int j) { return band_(i - j, j); }
  double at(int i, int j) const { return band_(i - j, j); }

  Eigen::MatrixXd band_;
  int bandwidth_ = 0;
};

}  // namespace rramfda

#endif  // RRAMFDA_BANDED_HPP_
