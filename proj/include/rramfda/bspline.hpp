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

#ifndef RRAMFDA_BSPLINE_HPP_
#define RRAMFDA_BSPLINE_HPP_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace rramfda {

/// Closed real interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

/// Breakpoints t_0 < ... < t_m plus the clamped extension (each end
/// repeated `degree` extra times).
/// How the breakpoints are extended by `degree` knots on each side.
/// kUniform continues the end spacing outward, so coefficient sequences that
/// are polynomial in the index give polynomials in u; kClamped repeats the
/// end breakpoints.
enum class KnotExtension { kUniform, kClamped };

std::string to_string(KnotExtension e);
KnotExtension parse_knot_extension(std::string_view name);

class KnotVector {
 public:
  KnotVector(std::vector<double> breakpoints, int degree,
             KnotExtension extension = KnotExtension::kUniform);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& extended() const { return extended_; }
  int degree() const { return degree_; }
  KnotExtension extension() const { return extension_; }
  int num_spans() const { return static_cast<int>(breakpoints_.size()) - 1; }
  int dimension() const { return num_spans() + degree_; }
  Interval domain() const { return {breakpoints_.front(), breakpoints_.back()}; }

  /// Index s of the breakpoint span [t_s, t_{s+1}) holding u. The last span
  /// is closed on the right.
  int find_span(double u) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> extended_;
  int degree_;
  KnotExtension extension_;
};

class BasisSpec {
 public:
  explicit BasisSpec(KnotVector knots) : knots_(std::move(knots)) {}

  const KnotVector& knots() const { return knots_; }
  int degree() const { return knots_.degree(); }
  int dimension() const { return knots_.dimension(); }
  Interval domain() const { return knots_.domain(); }

  /// Maps u onto the domain, tolerating roundoff of 1e-12 relative to the
  /// domain width. Throws InvalidArgument if u is farther outside.
  double checked_argument(double u) const;

 private:
  KnotVector knots_;
};

/// `n_interior` equally spaced breakpoints spanning `domain` (endpoints
/// included).
KnotVector make_knots(Interval domain, int n_interior, int degree,
                      KnotExtension extension = KnotExtension::kUniform);

inline BasisSpec make_basis(Interval domain, int n_interior, int degree,
                            KnotExtension extension = KnotExtension::kUniform) {
  return BasisSpec(make_knots(domain, n_interior, degree, extension));
}

/// Values of the degree+1 basis functions that may be nonzero at u.
/// Entry r of `out` is basis function `first + r`; returns `first`.
int eval_basis_local(const BasisSpec& spec, double u, std::span<double> out);

/// All p basis functions at u.
Eigen::VectorXd eval_basis(const BasisSpec& spec, double u);

/// Row-compressed design matrix: row r holds `width` consecutive values
/// starting at column first[r].
struct DesignRows {
  int width = 0;
  int cols = 0;
  std::vector<int> first;
  std::vector<double> values;

  int rows() const { return static_cast<int>(first.size()); }
  std::span<const double> row(int r) const {
    return {values.data() + static_cast<std::size_t>(r) * width,
            static_cast<std::size_t>(width)};
  }
  Eigen::MatrixXd dense() const;
};

DesignRows design_rows(const BasisSpec& spec, std::span<const double> points);
Eigen::MatrixXd design_matrix(const BasisSpec& spec, std::span<const double> points);

/// Evaluates sum_j coefs[j] * phi_j(u).
double eval_expansion(const BasisSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& coefs,
                      double u);

struct GramMatrix {
  Eigen::MatrixXd matrix;    // Psi_ij = int phi_i phi_j
  Eigen::MatrixXd sqrt;      // symmetric Psi^{1/2}
  Eigen::MatrixXd inv_sqrt;  // symmetric Psi^{-1/2}
};

/// Exact Gram matrix by per-span Gauss-Legendre quadrature of order
/// degree+1. Throws NumericError when an eigenvalue of Psi falls below
/// 1e-12 times the largest.
GramMatrix gram_matrix(const BasisSpec& spec);

/// Symmetric square root (and inverse square root) of an SPD matrix, with
/// the same eigenvalue floor as gram_matrix.
GramMatrix gram_from_matrix(Eigen::MatrixXd psi);

/// int phi_j(u) du over the domain.
Eigen::VectorXd basis_integrals(const BasisSpec& spec);

struct PenaltyMatrix {
  int order = 0;
  Eigen::MatrixXd matrix;
};

/// (p-d) x p matrix of d-th order differences.
Eigen::MatrixXd difference_operator(int p, int d);

/// (Delta^d)' Delta^d.
PenaltyMatrix diff_penalty(int p, int d);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

}  // namespace rramfda

#endif  // RRAMFDA_BSPLINE_HPP_
