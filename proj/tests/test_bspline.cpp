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

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "rramfda/bspline.hpp"
#include "rramfda/error.hpp"
#include "rramfda/rng.hpp"

using namespace rramfda;

TEST_CASE("make_knots spacing and dimension") {
  const KnotVector k = make_knots({0.0, 1.0}, 17, 3);
  REQUIRE(k.breakpoints().size() == 17);
  for (int j = 0; j <= 16; ++j) CHECK(k.breakpoints()[j] == doctest::Approx(j / 16.0).epsilon(1e-15));
  CHECK(k.dimension() == 19);

  const KnotVector k0 = make_knots({0.0, 1.0}, 2, 0);
  CHECK(k0.breakpoints() == std::vector<double>{0.0, 1.0});
  CHECK(k0.dimension() == 1);

  const KnotVector k2 = make_knots({0.0, 2.0}, 5, 3);
  const std::vector<double> expect{0.0, 0.5, 1.0, 1.5, 2.0};
  for (int j = 0; j < 5; ++j) CHECK(k2.breakpoints()[j] == doctest::Approx(expect[j]));

  CHECK_THROWS_AS(make_knots({0.0, 1.0}, 1, 3), Error);
  CHECK_THROWS_AS(make_knots({1.0, 1.0}, 5, 3), Error);
  CHECK_THROWS_AS(make_knots({0.0, 1.0}, 5, -1), Error);
}

TEST_CASE("degree zero indicator") {
  const BasisSpec b = make_basis({0.0, 1.0}, 2, 0);
  const Eigen::VectorXd v = eval_basis(b, 0.5);
  REQUIRE(v.size() == 1);
  CHECK(v(0) == 1.0);
}

TEST_CASE("basis values agree with the recursive definition") {
  for (KnotExtension ext : {KnotExtension::kUniform, KnotExtension::kClamped}) {
    const bool clamped = ext == KnotExtension::kClamped;
    for (int degree = 0; degree <= 5; ++degree) {
      const BasisSpec b = make_basis({0.0, 1.0}, 9, degree, ext);
      const std::vector<double>& br = b.knots().breakpoints();
      CHECK(b.knots().extended() == oracle::extended_knots(br, degree, clamped));
      for (int i = 0; i <= 400; ++i) {
        const double u = i / 400.0;
        const Eigen::VectorXd got = eval_basis(b, u);
        const Eigen::VectorXd want = oracle::basis_values(br, degree, u, clamped);
        CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-13);
      }
    }
  }
}

TEST_CASE("clamped basis interpolates the end coefficients") {
  const BasisSpec b = make_basis({0.0, 1.0}, 9, 3, KnotExtension::kClamped);
  CHECK(eval_basis(b, 0.0)(0) == 1.0);
  CHECK(eval_basis(b, 1.0)(b.dimension() - 1) == 1.0);
}

TEST_CASE("linear coefficient sequences give straight lines under uniform extension") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  Eigen::VectorXd c(b.dimension());
  for (int j = 0; j < c.size(); ++j) c(j) = 0.25 + 0.5 * j;
  const double h = 1.0 / 16.0;
  for (int i = 0; i <= 200; ++i) {
    const double u = i / 200.0;
    // Greville abscissae are (j - 1) h, so the line is 0.25 + 0.5 (u / h + 1).
    CHECK(std::abs(eval_expansion(b, c, u) - (0.75 + 0.5 * u / h)) <= 1e-12);
  }
  CHECK(parse_knot_extension("clamped") == KnotExtension::kClamped);
  CHECK(to_string(KnotExtension::kUniform) == "uniform");
  CHECK_THROWS_AS(parse_knot_extension("periodic"), Error);
}

TEST_CASE("non-uniform breakpoints agree with the recursive definition") {
  const std::vector<double> br{0.0, 0.05, 0.3, 0.31, 0.7, 1.0};
  const BasisSpec b(KnotVector(br, 3));
  for (int i = 0; i <= 257; ++i) {
    const double u = i / 257.0;
    CHECK((eval_basis(b, u) - oracle::basis_values(br, 3, u)).cwiseAbs().maxCoeff() <= 1e-13);
  }
}

TEST_CASE("partition of unity") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  for (int i = 0; i <= 1000; ++i) {
    const double u = i / 1000.0;
    CHECK(std::abs(eval_basis(b, u).sum() - 1.0) <= 1e-12);
  }
}

TEST_CASE("cubic values at an interior uniform knot") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  const Eigen::VectorXd v = eval_basis(b, 8.0 / 16.0);
  std::vector<double> nz;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (std::abs(v(j)) > 1e-15) nz.push_back(v(j));
  }
  REQUIRE(nz.size() == 3);
  CHECK(nz[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK(nz[1] == doctest::Approx(4.0 / 6.0).epsilon(1e-14));
  CHECK(nz[2] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("arguments outside the domain") {
  const BasisSpec b = make_basis({0.0, 1.0}, 5, 3);
  CHECK_THROWS_AS(eval_basis(b, 1.1), Error);
  CHECK_THROWS_AS(eval_basis(b, -0.01), Error);
  CHECK_NOTHROW(eval_basis(b, 1.0 + 1e-14));
  CHECK_THROWS_AS(eval_basis(b, std::nan("")), Error);
}

TEST_CASE("design matrix") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  const std::vector<double> one{0.37};
  const Eigen::MatrixXd m1 = design_matrix(b, one);
  REQUIRE(m1.rows() == 1);
  CHECK((m1.row(0).transpose() - eval_basis(b, 0.37)).norm() == 0.0);

  const int k = 601;  // V_reset = 0.601 V at 1 mV
  std::vector<double> u(k);
  for (int j = 1; j <= k; ++j) u[j - 1] = static_cast<double>(j) / k;
  const Eigen::MatrixXd m = design_matrix(b, u);
  CHECK(m.rows() == 601);
  CHECK(m.cols() == 19);
  CHECK((m.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);

  const DesignRows rows = design_rows(b, u);
  CHECK((rows.dense() - m).norm() == 0.0);
  CHECK(rows.width == 4);
}

TEST_CASE("expansion evaluation") {
  const BasisSpec b = make_basis({0.0, 1.0}, 7, 3);
  Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(b.dimension(), -1.0, 2.0);
  for (double u : {0.0, 0.13, 0.5, 0.99, 1.0}) {
    CHECK(eval_expansion(b, c, u) == doctest::Approx(eval_basis(b, u).dot(c)).epsilon(1e-14));
  }
}

TEST_CASE("Gram matrix of disjoint indicators") {
  const BasisSpec b(KnotVector({0.0, 0.5, 1.0}, 0));
  const GramMatrix g = gram_matrix(b);
  CHECK(g.matrix(0, 0) == doctest::Approx(0.5));
  CHECK(g.matrix(1, 1) == doctest::Approx(0.5));
  CHECK(g.matrix(0, 1) == 0.0);
}

TEST_CASE("Gram matrix properties and brute-force quadrature") {
  const BasisSpec b = make_basis({0.0, 1.0}, 17, 3);
  const GramMatrix g = gram_matrix(b);
  CHECK((g.matrix - g.matrix.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.matrix);
  CHECK(es.eigenvalues().minCoeff() > 0.0);

  const Eigen::MatrixXd brute = oracle::simpson_gram(b.knots().breakpoints(), 3, 6250);
  CHECK((g.matrix - brute).cwiseAbs().maxCoeff() <= 1e-10);
  const BasisSpec bc = make_basis({0.0, 1.0}, 17, 3, KnotExtension::kClamped);
  const Eigen::MatrixXd brute_c = oracle::simpson_gram(bc.knots().breakpoints(), 3, 6250, true);
  CHECK((gram_matrix(bc).matrix - brute_c).cwiseAbs().maxCoeff() <= 1e-10);

  // Random expansions: a' Psi b against the quadrature of the product.
  Rng rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd x(19), y(19);
    for (int j = 0; j < 19; ++j) {
      x(j) = rng.normal();
      y(j) = rng.normal();
    }
    CHECK(std::abs(x.dot(g.matrix * y) - x.dot(brute * y)) <= 1e-8);
  }

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(19, 19);
  CHECK((g.sqrt * g.sqrt - g.matrix).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((g.inv_sqrt * g.sqrt - id).cwiseAbs().maxCoeff() <= 1e-9);

  // Rows of the Gram matrix sum to the basis integrals (partition of unity).
  const Eigen::VectorXd ints = basis_integrals(b);
  CHECK((g.matrix.rowwise().sum() - ints).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK(ints.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("difference penalties") {
  const PenaltyMatrix p1 = diff_penalty(3, 1);
  Eigen::Matrix3d want;
  want << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK((p1.matrix - want).norm() == 0.0);
  CHECK(p1.order == 1);

  const Eigen::MatrixXd d2 = difference_operator(4, 2);
  REQUIRE(d2.rows() == 2);
  Eigen::RowVector4d r0(1, -2, 1, 0), r1(0, 1, -2, 1);
  CHECK((d2.row(0) - r0).norm() == 0.0);
  CHECK((d2.row(1) - r1).norm() == 0.0);

  for (int d = 1; d <= 4; ++d) {
    const int p = 19;
    const PenaltyMatrix pd = diff_penalty(p, d);
    for (int deg = 0; deg < d; ++deg) {
      Eigen::VectorXd c(p);
      for (int j = 0; j < p; ++j) c(j) = std::pow(static_cast<double>(j) - 4.5, deg);
      CHECK((pd.matrix * c).cwiseAbs().maxCoeff() <= 1e-8 * c.cwiseAbs().maxCoeff());
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(pd.matrix);
    lu.setThreshold(1e-10);
    CHECK(p - lu.rank() == d);
  }
  CHECK_THROWS_AS(diff_penalty(3, 3), Error);
  CHECK_THROWS_AS(diff_penalty(3, 0), Error);
}

TEST_CASE("Gauss-Legendre exactness") {
  for (int n = 1; n <= 8; ++n) {
    const GaussRule r = gauss_legendre(n);
    REQUIRE(r.nodes.size() == static_cast<std::size_t>(n));
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-14).scale(1.0));
    }
  }
}
