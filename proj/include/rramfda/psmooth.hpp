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

#ifndef RRAMFDA_PSMOOTH_HPP_
#define RRAMFDA_PSMOOTH_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rramfda/bspline.hpp"
#include "rramfda/curves.hpp"

namespace rramfda {

enum class Criterion { kCv, kGcv };

std::string to_string(Criterion c);
Criterion parse_criterion(std::string_view name);

/// P-spline fit of one curve for a fixed smoothing parameter.
struct PsplineFit {
  Eigen::VectorXd coefficients;
  double lambda = 0.0;
  int penalty_order = 0;
  Eigen::VectorXd hat_diag;  // leverages H_jj; empty unless requested
  double rss = 0.0;
  double edf = 0.0;  // trace of the hat matrix
};

struct LambdaSelection {
  std::vector<double> grid;
  std::vector<double> scores;  // mean criterion over curves, per grid point
  double chosen = 0.0;
  Criterion criterion = Criterion::kCv;
};

/// Per-curve basis coefficients, one row per curve.
struct CoefMatrix {
  BasisSpec spec;
  Eigen::MatrixXd values;
  std::vector<CycleId> cycle_ids;
};

enum class SolverPath {
  kAuto,    // dense for p <= 50, banded above
  kDense,
  kBanded,
};

/// Lambda-independent pieces of one curve's penalized normal equations.
class CurveSystem {
 public:
  CurveSystem(const RegisteredCurve& curve, const BasisSpec& spec);

  /// Solves (Phi'Phi + lambda P) a = Phi'y. Leverages are filled only when
  /// `with_hat` is set; edf and rss are always computed.
  PsplineFit solve(double lambda, const PenaltyMatrix& penalty, bool with_hat,
                   SolverPath path = SolverPath::kAuto) const;

  const DesignRows& design() const { return design_; }
  const Eigen::MatrixXd& cross_product() const { return gram_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }
  const Eigen::VectorXd& observations() const { return y_; }
  int points() const { return design_.rows(); }
  CycleId cycle_id() const { return cycle_id_; }

 private:
  CycleId cycle_id_;
  int degree_;
  DesignRows design_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd gram_;  // Phi'Phi
  Eigen::VectorXd rhs_;   // Phi'y
};

PsplineFit fit_pspline(const RegisteredCurve& curve, const BasisSpec& spec, double lambda,
                       int penalty_order);

/// CV_i: root mean square of leave-one-out residuals, via the hat-matrix
/// identity e_j / (1 - H_jj). Throws NumericError if some H_jj >= 1.
double loo_cv_curve(const RegisteredCurve& curve, const BasisSpec& spec, double lambda,
                    int penalty_order);

/// GCV_i = k * MSE / (k - edf)^2 with MSE = rss / k.
double gcv_curve(const RegisteredCurve& curve, const BasisSpec& spec, double lambda,
                 int penalty_order);

/// Criterion value of one curve system; shared by the per-curve entry
/// points and select_lambda.
double criterion_value(const CurveSystem& system, const PenaltyMatrix& penalty, double lambda,
                       Criterion criterion);

/// Log-spaced grid of `count` values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int count);

/// Throws DataError naming the first curve with fewer than p + degree points.
void require_min_points(std::span<const RegisteredCurve> curves, const BasisSpec& spec);

/// Common lambda for all curves: argmin over the grid of the mean
/// per-curve criterion, ties broken toward the larger lambda. Grid points
/// where the criterion is not finite for some curve are skipped.
LambdaSelection select_lambda(std::span<const RegisteredCurve> curves, const BasisSpec& spec,
                              std::span<const double> grid, int penalty_order,
                              Criterion criterion);

/// Fits every curve with the same lambda; rows follow the input order.
CoefMatrix fit_all(std::span<const RegisteredCurve> curves, const BasisSpec& spec,
                   double lambda, int penalty_order);

}  // namespace rramfda

#endif  // RRAMFDA_PSMOOTH_HPP_
