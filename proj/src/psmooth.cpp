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

#include "rramfda/psmooth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "rramfda/banded.hpp"
#include "rramfda/error.hpp"
#include "rramfda/parallel.hpp"

namespace rramfda {

namespace {

constexpr int kDenseLimit = 50;
constexpr double kLeverageSlack = 1e-10;

std::string cycle_prefix(CycleId id) { return "cycle " + std::to_string(id) + ": "; }

}  // namespace

bool BandedCholesky::compute(const Eigen::MatrixXd& m, int bandwidth) {
  const int n = static_cast<int>(m.rows());
  bandwidth_ = std::min(bandwidth, std::max(n - 1, 0));
  band_ = Eigen::MatrixXd::Zero(bandwidth_ + 1, n);
  for (int j = 0; j < n; ++j) {
    const int k0 = std::max(0, j - bandwidth_);
    double s = m(j, j);
    for (int k = k0; k < j; ++k) s -= at(j, k) * at(j, k);
    if (!(s > 0.0) || !std::isfinite(s)) return false;
    const double ljj = std::sqrt(s);
    at(j, j) = ljj;
    const int imax = std::min(n - 1, j + bandwidth_);
    for (int i = j + 1; i <= imax; ++i) {
      double v = m(i, j);
      for (int k = std::max(0, i - bandwidth_); k < j; ++k) v -= at(i, k) * at(j, k);
      at(i, j) = v / ljj;
    }
  }
  return true;
}

Eigen::VectorXd BandedCholesky::solve(const Eigen::VectorXd& b) const {
  const int n = size();
  Eigen::VectorXd x = b;
  for (int i = 0; i < n; ++i) {
    double v = x(i);
    for (int k = std::max(0, i - bandwidth_); k < i; ++k) v -= at(i, k) * x(k);
    x(i) = v / at(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double v = x(i);
    const int kmax = std::min(n - 1, i + bandwidth_);
    for (int k = i + 1; k <= kmax; ++k) v -= at(k, i) * x(k);
    x(i) = v / at(i, i);
  }
  return x;
}

Eigen::MatrixXd BandedCholesky::inverse() const {
  const int n = size();
  Eigen::MatrixXd inv(n, n);
  for (int j = 0; j < n; ++j) inv.col(j) = solve(Eigen::VectorXd::Unit(n, j));
  return 0.5 * (inv + inv.transpose());
}

std::string to_string(Criterion c) { return c == Criterion::kCv ? "cv" : "gcv"; }

Criterion parse_criterion(std::string_view name) {
  if (name == "cv") return Criterion::kCv;
  if (name == "gcv") return Criterion::kGcv;
  throw InvalidArgument("unknown criterion '" + std::string(name) + "' (expected cv or gcv)");
}

CurveSystem::CurveSystem(const RegisteredCurve& curve, const BasisSpec& spec)
    : cycle_id_(curve.cycle_id), degree_(spec.degree()) {
  if (curve.args.size() != curve.currents.size()) {
    throw DataError(cycle_prefix(curve.cycle_id) + "argument/current length mismatch");
  }
  if (curve.args.empty()) throw DataError(cycle_prefix(curve.cycle_id) + "no samples");
  for (double v : curve.currents) {
    if (!std::isfinite(v)) throw DataError(cycle_prefix(curve.cycle_id) + "non-finite current");
  }
  try {
    design_ = design_rows(spec, curve.args);
  } catch (const Error& e) {
    throw Error(ErrorKind::kData, cycle_prefix(curve.cycle_id) + e.what());
  }
  const int p = spec.dimension();
  const int w = design_.width;
  y_ = Eigen::Map<const Eigen::VectorXd>(curve.currents.data(),
                                         static_cast<Eigen::Index>(curve.currents.size()));
  gram_ = Eigen::MatrixXd::Zero(p, p);
  rhs_ = Eigen::VectorXd::Zero(p);
  for (int r = 0; r < design_.rows(); ++r) {
    const auto row = design_.row(r);
    const int f = design_.first[r];
    for (int a = 0; a < w; ++a) {
      rhs_(f + a) += row[a] * y_(r);
      for (int b = 0; b < w; ++b) gram_(f + a, f + b) += row[a] * row[b];
    }
  }
}

PsplineFit CurveSystem::solve(double lambda, const PenaltyMatrix& penalty, bool with_hat,
                              SolverPath path) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("smoothing parameter must be finite and non-negative");
  }
  const int p = static_cast<int>(gram_.rows());
  if (penalty.matrix.rows() != p) {
    throw InvalidArgument("penalty dimension does not match basis dimension");
  }
  const Eigen::MatrixXd m = gram_ + lambda * penalty.matrix;
  if (path == SolverPath::kAuto) path = p <= kDenseLimit ? SolverPath::kDense : SolverPath::kBanded;

  PsplineFit fit;
  fit.lambda = lambda;
  fit.penalty_order = penalty.order;
  Eigen::MatrixXd inv;
  if (path == SolverPath::kDense) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
      throw NumericError(cycle_prefix(cycle_id_) + "penalized normal matrix is singular");
    }
    fit.coefficients = llt.solve(rhs_);
    inv = llt.solve(Eigen::MatrixXd::Identity(p, p));
    inv = 0.5 * (inv + inv.transpose()).eval();
  } else {
    BandedCholesky chol;
    if (!chol.compute(m, std::max(degree_, penalty.order))) {
      throw NumericError(cycle_prefix(cycle_id_) + "penalized normal matrix is singular");
    }
    fit.coefficients = chol.solve(rhs_);
    inv = chol.inverse();
  }
  // A non-positive-definite system can slip past the factorization as a
  // vanishing pivot; catch it through the solution instead.
  if (!fit.coefficients.allFinite()) {
    throw NumericError(cycle_prefix(cycle_id_) + "penalized normal matrix is singular");
  }

  const int w = design_.width;
  fit.rss = 0.0;
  if (with_hat) fit.hat_diag.resize(design_.rows());
  for (int r = 0; r < design_.rows(); ++r) {
    const auto row = design_.row(r);
    const int f = design_.first[r];
    double yhat = 0.0;
    for (int a = 0; a < w; ++a) yhat += row[a] * fit.coefficients(f + a);
    const double e = y_(r) - yhat;
    fit.rss += e * e;
    if (with_hat) {
      double h = 0.0;
      for (int a = 0; a < w; ++a) {
        for (int b = 0; b < w; ++b) h += row[a] * inv(f + a, f + b) * row[b];
      }
      fit.hat_diag(r) = h;
    }
  }
  fit.edf = inv.cwiseProduct(gram_).sum();
  return fit;
}

PsplineFit fit_pspline(const RegisteredCurve& curve, const BasisSpec& spec, double lambda,
                       int penalty_order) {
  const CurveSystem system(curve, spec);
  return system.solve(lambda, diff_penalty(spec.dimension(), penalty_order), true);
}

double criterion_value(const CurveSystem& system, const PenaltyMatrix& penalty, double lambda,
                       Criterion criterion) {
  const double k = system.points();
  if (criterion == Criterion::kGcv) {
    const PsplineFit fit = system.solve(lambda, penalty, false);
    const double denom = k - fit.edf;
    if (!(denom > 1e-12 * k)) {
      throw NumericError(cycle_prefix(system.cycle_id()) +
                         "GCV denominator vanishes (edf equals the number of points)");
    }
    const double mse = fit.rss / k;
    return k * mse / (denom * denom);
  }
  const PsplineFit fit = system.solve(lambda, penalty, true);
  const auto& design = system.design();
  const Eigen::VectorXd& y = system.observations();
  double acc = 0.0;
  for (int r = 0; r < design.rows(); ++r) {
    const double one_minus_h = 1.0 - fit.hat_diag(r);
    if (!(one_minus_h > kLeverageSlack)) {
      throw NumericError(cycle_prefix(system.cycle_id()) +
                         "leave-one-out undefined: leverage reaches 1");
    }
    const auto row = design.row(r);
    const int f = design.first[r];
    double yhat = 0.0;
    for (int a = 0; a < design.width; ++a) yhat += row[a] * fit.coefficients(f + a);
    const double loo = (y(r) - yhat) / one_minus_h;
    acc += loo * loo;
  }
  return std::sqrt(acc / k);
}

double loo_cv_curve(const RegisteredCurve& curve, const BasisSpec& spec, double lambda,
                    int penalty_order) {
  const CurveSystem system(curve, spec);
  return criterion_value(system, diff_penalty(spec.dimension(), penalty_order), lambda,
                         Criterion::kCv);
}

double gcv_curve(const RegisteredCurve& curve, const BasisSpec& spec, double lambda,
                 int penalty_order) {
  const CurveSystem system(curve, spec);
  return criterion_value(system, diff_penalty(spec.dimension(), penalty_order), lambda,
                         Criterion::kGcv);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1) {
    throw InvalidArgument("log grid needs 0 < lo <= hi and count >= 1");
  }
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < count; ++i) {
    grid[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (count - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

void require_min_points(std::span<const RegisteredCurve> curves, const BasisSpec& spec) {
  const int need = spec.dimension() + spec.degree();
  for (const RegisteredCurve& c : curves) {
    if (c.size() < need) {
      throw DataError(cycle_prefix(c.cycle_id) + "has " + std::to_string(c.size()) +
                      " points; the basis needs at least " + std::to_string(need));
    }
  }
}

namespace {

std::vector<CurveSystem> build_systems(std::span<const RegisteredCurve> curves,
                                       const BasisSpec& spec) {
  std::vector<std::optional<CurveSystem>> slots(curves.size());
  parallel_for(curves.size(), [&](std::size_t i) { slots[i].emplace(curves[i], spec); });
  std::vector<CurveSystem> systems;
  systems.reserve(curves.size());
  for (auto& s : slots) systems.push_back(std::move(*s));
  return systems;
}

}  // namespace

LambdaSelection select_lambda(std::span<const RegisteredCurve> curves, const BasisSpec& spec,
                              std::span<const double> grid, int penalty_order,
                              Criterion criterion) {
  if (grid.empty()) throw InvalidArgument("lambda grid is empty");
  for (double l : grid) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw InvalidArgument("lambda grid values must be positive and finite");
    }
  }
  if (curves.empty()) throw InvalidArgument("no curves to select lambda on");
  require_min_points(curves, spec);
  const PenaltyMatrix penalty = diff_penalty(spec.dimension(), penalty_order);
  const std::vector<CurveSystem> systems = build_systems(curves, spec);

  const std::size_t g = grid.size();
  Eigen::MatrixXd values(static_cast<Eigen::Index>(systems.size()), static_cast<Eigen::Index>(g));
  parallel_for(systems.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < g; ++j) {
      double v = std::numeric_limits<double>::quiet_NaN();
      try {
        v = criterion_value(systems[i], penalty, grid[j], criterion);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kNumeric) throw;
      }
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  });

  LambdaSelection sel;
  sel.grid.assign(grid.begin(), grid.end());
  sel.criterion = criterion;
  sel.scores.resize(g);
  const double n = static_cast<double>(systems.size());
  for (std::size_t j = 0; j < g; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < values.rows(); ++i) acc += values(i, static_cast<Eigen::Index>(j));
    sel.scores[j] = acc / n;
  }
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < g; ++j) {
    if (!std::isfinite(sel.scores[j])) continue;
    if (!best || sel.scores[j] < sel.scores[*best] ||
        (sel.scores[j] == sel.scores[*best] && grid[j] > grid[*best])) {
      best = j;
    }
  }
  if (!best) throw NumericError("smoothing criterion is not finite at any grid point");
  sel.chosen = grid[*best];
  return sel;
}

CoefMatrix fit_all(std::span<const RegisteredCurve> curves, const BasisSpec& spec,
                   double lambda, int penalty_order) {
  if (curves.empty()) throw InvalidArgument("no curves to fit");
  require_min_points(curves, spec);
  const PenaltyMatrix penalty = diff_penalty(spec.dimension(), penalty_order);
  CoefMatrix out{spec, Eigen::MatrixXd(static_cast<Eigen::Index>(curves.size()), spec.dimension()),
                 {}};
  out.cycle_ids.reserve(curves.size());
  for (const RegisteredCurve& c : curves) out.cycle_ids.push_back(c.cycle_id);
  parallel_for(curves.size(), [&](std::size_t i) {
    const CurveSystem system(curves[i], spec);
    const PsplineFit fit = system.solve(lambda, penalty, false);
    out.values.row(static_cast<Eigen::Index>(i)) = fit.coefficients.transpose();
  });
  return out;
}

}  // namespace rramfda
