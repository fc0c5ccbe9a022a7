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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rramfda/error.hpp"
#include "rramfda/psmooth.hpp"
#include "rramfda/rng.hpp"

using namespace rramfda;

namespace {

RegisteredCurve sample(CycleId id, int k, const std::function<double(double)>& f,
                       double sigma = 0.0, std::uint64_t seed = 1) {
  Rng rng(seed);
  RegisteredCurve c{id, {}, {}, k * 1e-3};
  for (int j = 1; j <= k; ++j) {
    const double u = static_cast<double>(j) / k;
    c.args.push_back(u);
    c.currents.push_back(f(u) + sigma * rng.normal());
  }
  return c;
}

double smooth_truth(double u) { return std::sin(3.0 * u) + 0.5 * u * u; }

}  // namespace

TEST_CASE("square unpenalized system interpolates") {
  const BasisSpec b = make_basis({0.0, 1.0}, 6, 3);  // p = 8
  const RegisteredCurve c = sample(1, b.dimension(), smooth_truth, 0.1);
  const PsplineFit fit = fit_pspline(c, b, 0.0, 2);
  double yy = 0.0;
  for (double y : c.currents) yy += y * y;
  CHECK(fit.rss <= 1e-16 * yy);
  CHECK(fit.edf == doctest::Approx(b.dimension()).epsilon(1e-10));
  CHECK_THROWS_AS(loo_cv_curve(c, b, 0.0, 2), Error);
}

TEST_CASE("exact spline data is recovered") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  Eigen::VectorXd truth(b.dimension());
  for (int j = 0; j < truth.size(); ++j) truth(j) = std::cos(0.7 * j) + 0.1 * j;
  const RegisteredCurve c = sample(1, 300, [&](double u) { return eval_expansion(b, truth, u); });
  const PsplineFit fit = fit_pspline(c, b, 0.0, 2);
  CHECK((fit.coefficients - truth).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("lambda zero equals ordinary least squares") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  const RegisteredCurve c = sample(1, 450, smooth_truth, 0.05, 3);
  const PsplineFit fit = fit_pspline(c, b, 0.0, 2);
  const Eigen::MatrixXd phi = design_matrix(b, c.args);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(c.currents.data(), c.size());
  const Eigen::VectorXd ols = phi.colPivHouseholderQr().solve(y);
  CHECK((fit.coefficients - ols).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("large lambda approaches the straight-line fit") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  const RegisteredCurve c = sample(1, 500, smooth_truth, 0.05, 5);
  const oracle::Line line = oracle::simple_linear_regression(c.args, c.currents);
  for (auto [lambda, tol] : {std::pair{1e8, 1e-3}, std::pair{1e10, 1e-4}}) {
    const PsplineFit fit = fit_pspline(c, b, lambda, 2);
    double sup = 0.0;
    for (double u : c.args) sup = std::max(sup, std::abs(eval_expansion(b, fit.coefficients, u) - line(u)));
    CHECK(sup <= tol);
  }
}

TEST_CASE("leave-one-out identity against explicit refits") {
  const BasisSpec b = make_basis({0.0, 1.0}, 5, 3);  // p = 7
  for (int k : {10, 17, 25}) {
    const RegisteredCurve c = sample(1, k, smooth_truth, 0.1, static_cast<std::uint64_t>(k));
    const Eigen::MatrixXd phi = design_matrix(b, c.args);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(c.currents.data(), k);
    for (int d : {1, 2, 3}) {
      const Eigen::MatrixXd pen = diff_penalty(b.dimension(), d).matrix;
      for (double lambda : {1e-3, 0.1, 10.0}) {
        const double fast = loo_cv_curve(c, b, lambda, d);
        const double slow = oracle::refit_loo_cv(phi, y, pen, lambda);
        CHECK(std::abs(fast - slow) <= 1e-10 * std::max(1.0, slow));
      }
    }
  }
}

TEST_CASE("cross-validation on flat noise estimates the noise level") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  const double sigma = 0.3;
  const RegisteredCurve c = sample(1, 500, [](double) { return 2.0; }, sigma, 11);
  const double cv = loo_cv_curve(c, b, 1e8, 2);
  CHECK(cv == doctest::Approx(sigma).epsilon(0.10));
}

TEST_CASE("GCV against a dense hat matrix") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  const RegisteredCurve c = sample(1, 120, smooth_truth, 0.05, 2);
  const CurveSystem system(c, b);
  const Eigen::MatrixXd phi = design_matrix(b, c.args);
  const Eigen::VectorXd y = system.observations();
  for (int d : {1, 2}) {
    const PenaltyMatrix pen = diff_penalty(b.dimension(), d);
    for (double lambda : {1e-4, 1e-1, 1e2}) {
      const double want = oracle::dense_gcv(phi, y, pen.matrix, lambda);
      for (SolverPath path : {SolverPath::kDense, SolverPath::kBanded}) {
        const PsplineFit fit = system.solve(lambda, pen, true, path);
        const double k = static_cast<double>(c.size());
        const double got = k * (fit.rss / k) / ((k - fit.edf) * (k - fit.edf));
        CHECK(std::abs(got - want) <= 1e-12 * want);
        const Eigen::VectorXd hd = oracle::dense_hat(phi, pen.matrix, lambda).diagonal();
        CHECK((fit.hat_diag - hd).cwiseAbs().maxCoeff() <= 1e-12);
      }
      CHECK(std::abs(gcv_curve(c, b, lambda, d) - want) <= 1e-12 * want);
    }
  }
}

TEST_CASE("GCV limit for a very smooth fit") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  const RegisteredCurve c = sample(1, 200, smooth_truth, 0.05, 4);
  const PsplineFit fit = fit_pspline(c, b, 1e10, 2);
  CHECK(fit.edf == doctest::Approx(2.0).epsilon(1e-4));
  const oracle::Line line = oracle::simple_linear_regression(c.args, c.currents);
  double rss = 0.0;
  for (int j = 0; j < c.size(); ++j) rss += std::pow(c.currents[j] - line(c.args[j]), 2);
  const double k = 200.0;
  CHECK(gcv_curve(c, b, 1e10, 2) == doctest::Approx(k * (rss / k) / ((k - 2) * (k - 2))).epsilon(1e-4));
}

TEST_CASE("banded and dense solvers agree") {
  const BasisSpec b = make_basis({0.0, 1.0}, 60, 3);  // p = 62 selects the banded path
  const RegisteredCurve c = sample(1, 700, smooth_truth, 0.02, 8);
  const CurveSystem system(c, b);
  const PenaltyMatrix pen = diff_penalty(b.dimension(), 2);
  const PsplineFit banded = system.solve(0.5, pen, true, SolverPath::kBanded);
  const PsplineFit dense = system.solve(0.5, pen, true, SolverPath::kDense);
  const PsplineFit automatic = system.solve(0.5, pen, true);
  CHECK((banded.coefficients - dense.coefficients).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((banded.hat_diag - dense.hat_diag).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(banded.edf == doctest::Approx(dense.edf).epsilon(1e-12));
  CHECK((automatic.coefficients - banded.coefficients).norm() == 0.0);
}

TEST_CASE("shrinkage is monotone in lambda") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  const RegisteredCurve c = sample(1, 300, smooth_truth, 0.1, 6);
  double last_rss = -1.0;
  double last_edf = std::numeric_limits<double>::infinity();
  for (double lambda : log_grid(1e-6, 1e6, 41)) {
    const PsplineFit fit = fit_pspline(c, b, lambda, 2);
    CHECK(fit.rss >= last_rss * (1.0 - 1e-12));
    CHECK(fit.edf <= last_edf * (1.0 + 1e-12));
    CHECK(fit.edf > 0.0);
    CHECK(fit.edf <= b.dimension() + 1e-9);
    last_rss = fit.rss;
    last_edf = fit.edf;
  }
}

TEST_CASE("fits do not depend on the order of observations") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  RegisteredCurve c = sample(1, 200, smooth_truth, 0.1, 9);
  const PsplineFit a = fit_pspline(c, b, 0.01, 2);
  std::reverse(c.args.begin(), c.args.end());
  std::reverse(c.currents.begin(), c.currents.end());
  std::rotate(c.args.begin(), c.args.begin() + 37, c.args.end());
  std::rotate(c.currents.begin(), c.currents.begin() + 37, c.currents.end());
  const PsplineFit r = fit_pspline(c, b, 0.01, 2);
  CHECK((a.coefficients - r.coefficients).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("log grid") {
  const std::vector<double> g = log_grid(1e-6, 1e6, 41);
  REQUIRE(g.size() == 41);
  CHECK(g.front() == doctest::Approx(1e-6).epsilon(1e-14));
  CHECK(g.back() == doctest::Approx(1e6).epsilon(1e-14));
  CHECK(g[20] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(log_grid(3.0, 3.0, 1) == std::vector<double>{3.0});
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 5), Error);
}

TEST_CASE("lambda selection") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  std::vector<RegisteredCurve> curves;
  for (int i = 0; i < 6; ++i) {
    curves.push_back(sample(i + 1, 250 + 20 * i,
                            [i](double u) { return smooth_truth(u) * (1.0 + 0.1 * i); }, 0.05,
                            static_cast<std::uint64_t>(100 + i)));
  }

  SUBCASE("single grid point") {
    const std::vector<double> grid{0.3};
    const LambdaSelection s = select_lambda(curves, b, grid, 2, Criterion::kGcv);
    CHECK(s.chosen == 0.3);
  }

  SUBCASE("ties go to the larger lambda") {
    std::vector<RegisteredCurve> flat{sample(1, 100, [](double) { return 0.0; })};
    const std::vector<double> grid{1e-2, 1.0, 1e2};
    const LambdaSelection s = select_lambda(flat, b, grid, 2, Criterion::kCv);
    CHECK(s.scores[0] == s.scores[2]);
    CHECK(s.chosen == 1e2);
  }

  SUBCASE("criterion is the mean over curves") {
    const std::vector<double> grid = log_grid(1e-4, 1e4, 9);
    for (Criterion crit : {Criterion::kCv, Criterion::kGcv}) {
      const LambdaSelection s = select_lambda(curves, b, grid, 2, crit);
      REQUIRE(s.scores.size() == grid.size());
      for (std::size_t g = 0; g < grid.size(); ++g) {
        double mean = 0.0;
        for (const auto& c : curves) {
          mean += crit == Criterion::kCv ? loo_cv_curve(c, b, grid[g], 2) : gcv_curve(c, b, grid[g], 2);
        }
        mean /= static_cast<double>(curves.size());
        CHECK(s.scores[g] == doctest::Approx(mean).epsilon(1e-13));
      }
      const auto best = std::min_element(s.scores.begin(), s.scores.end());
      CHECK(s.chosen == grid[static_cast<std::size_t>(best - s.scores.begin())]);
    }
  }

  SUBCASE("chosen lambda is closer to the truth than the grid ends") {
    const std::vector<double> grid = log_grid(1e-4, 1e4, 17);
    const LambdaSelection s = select_lambda(curves, b, grid, 2, Criterion::kCv);
    auto mse = [&](double lambda) {
      double acc = 0.0;
      int count = 0;
      for (int i = 0; i < static_cast<int>(curves.size()); ++i) {
        const PsplineFit fit = fit_pspline(curves[i], b, lambda, 2);
        for (double u : curves[i].args) {
          acc += std::pow(eval_expansion(b, fit.coefficients, u) - smooth_truth(u) * (1.0 + 0.1 * i), 2);
          ++count;
        }
      }
      return acc / count;
    };
    CHECK(mse(s.chosen) <= mse(grid.front()));
    CHECK(mse(s.chosen) <= mse(grid.back()));
  }

  SUBCASE("noise-free spline data prefers the smallest lambda") {
    Eigen::VectorXd truth(b.dimension());
    for (int j = 0; j < truth.size(); ++j) truth(j) = std::sin(1.3 * j);
    std::vector<RegisteredCurve> exact{
        sample(1, 400, [&](double u) { return eval_expansion(b, truth, u); })};
    const std::vector<double> grid = log_grid(1e-6, 1e2, 9);
    const LambdaSelection s = select_lambda(exact, b, grid, 2, Criterion::kGcv);
    CHECK(s.chosen == grid.front());
  }

  SUBCASE("results do not depend on the worker count") {
    const std::vector<double> grid = log_grid(1e-4, 1e4, 9);
    setenv("RRAMFDA_THREADS", "1", 1);
    const LambdaSelection one = select_lambda(curves, b, grid, 2, Criterion::kGcv);
    const CoefMatrix c1 = fit_all(curves, b, 0.1, 2);
    setenv("RRAMFDA_THREADS", "4", 1);
    const LambdaSelection four = select_lambda(curves, b, grid, 2, Criterion::kGcv);
    const CoefMatrix c4 = fit_all(curves, b, 0.1, 2);
    unsetenv("RRAMFDA_THREADS");
    CHECK(one.scores == four.scores);
    CHECK((c1.values - c4.values).norm() == 0.0);
  }

  SUBCASE("grid validation") {
    const std::vector<double> empty;
    CHECK_THROWS_AS(select_lambda(curves, b, empty, 2, Criterion::kCv), Error);
    const std::vector<double> negative{-1.0};
    CHECK_THROWS_AS(select_lambda(curves, b, negative, 2, Criterion::kCv), Error);
  }
}

TEST_CASE("fit_all") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  const RegisteredCurve c = sample(4, 300, smooth_truth, 0.05, 12);
  const std::vector<RegisteredCurve> one{c};
  const CoefMatrix m1 = fit_all(one, b, 0.1, 2);
  REQUIRE(m1.values.rows() == 1);
  CHECK((m1.values.row(0).transpose() - fit_pspline(c, b, 0.1, 2).coefficients).norm() == 0.0);
  CHECK(m1.cycle_ids == std::vector<CycleId>{4});

  const std::vector<RegisteredCurve> two{c, c};
  const CoefMatrix m2 = fit_all(two, b, 0.1, 2);
  CHECK((m2.values.row(0) - m2.values.row(1)).norm() == 0.0);
  CHECK(m2.values.cols() == 19);
}

TEST_CASE("short curves are rejected with their cycle id") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  const std::vector<RegisteredCurve> curves{sample(1, 300, smooth_truth), sample(77, 21, smooth_truth)};
  try {
    require_min_points(curves, b);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
    CHECK(std::string(e.what()).find("77") != std::string::npos);
  }
  const std::vector<RegisteredCurve> ok{sample(1, 22, smooth_truth)};
  CHECK_NOTHROW(require_min_points(ok, b));
}
