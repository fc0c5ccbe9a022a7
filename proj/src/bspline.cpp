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

#include "rramfda/bspline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rramfda/error.hpp"

namespace rramfda {

namespace {

constexpr int kMaxDegree = 15;
constexpr double kDomainSlack = 1e-12;
constexpr double kGramEigenFloor = 1e-12;

}  // namespace

std::string to_string(KnotExtension e) {
  return e == KnotExtension::kUniform ? "uniform" : "clamped";
}

KnotExtension parse_knot_extension(std::string_view name) {
  if (name == "uniform") return KnotExtension::kUniform;
  if (name == "clamped") return KnotExtension::kClamped;
  throw InvalidArgument("unknown knot extension '" + std::string(name) +
                        "' (expected uniform or clamped)");
}

KnotVector::KnotVector(std::vector<double> breakpoints, int degree, KnotExtension extension)
    : breakpoints_(std::move(breakpoints)), degree_(degree), extension_(extension) {
  if (degree_ < 0 || degree_ > kMaxDegree) {
    throw InvalidArgument("spline degree must lie in [0, " + std::to_string(kMaxDegree) + "]");
  }
  if (breakpoints_.size() < 2) {
    throw InvalidArgument("a knot vector needs at least two breakpoints");
  }
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (!std::isfinite(breakpoints_[i])) throw InvalidArgument("non-finite breakpoint");
    if (i > 0 && !(breakpoints_[i] > breakpoints_[i - 1])) {
      throw InvalidArgument("breakpoints must be strictly increasing");
    }
  }
  extended_.reserve(breakpoints_.size() + 2 * static_cast<std::size_t>(degree_));
  const double lo = breakpoints_.front();
  const double hi = breakpoints_.back();
  const bool uniform = extension_ == KnotExtension::kUniform;
  const double h_lo = uniform ? breakpoints_[1] - lo : 0.0;
  const double h_hi = uniform ? hi - breakpoints_[breakpoints_.size() - 2] : 0.0;
  for (int k = degree_; k >= 1; --k) extended_.push_back(lo - k * h_lo);
  extended_.insert(extended_.end(), breakpoints_.begin(), breakpoints_.end());
  for (int k = 1; k <= degree_; ++k) extended_.push_back(hi + k * h_hi);
}

int KnotVector::find_span(double u) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), u);
  int s = static_cast<int>(it - breakpoints_.begin()) - 1;
  return std::clamp(s, 0, num_spans() - 1);
}

double BasisSpec::checked_argument(double u) const {
  const Interval d = domain();
  const double slack = kDomainSlack * d.length();
  if (!(u >= d.lo - slack && u <= d.hi + slack)) {
    std::ostringstream msg;
    msg << "argument " << u << " outside basis domain [" << d.lo << ", " << d.hi << "]";
    throw InvalidArgument(msg.str());
  }
  return std::clamp(u, d.lo, d.hi);
}

KnotVector make_knots(Interval domain, int n_interior, int degree, KnotExtension extension) {
  if (!(domain.length() > 0.0) || !std::isfinite(domain.length())) {
    throw InvalidArgument("knot domain must have positive length");
  }
  if (n_interior < 2) throw InvalidArgument("need at least 2 breakpoints");
  if (degree < 0) throw InvalidArgument("degree must be non-negative");
  std::vector<double> bp(static_cast<std::size_t>(n_interior));
  const int m = n_interior - 1;
  for (int j = 0; j <= m; ++j) {
    // Interpolate from both ends so the endpoints are exact.
    const double t = static_cast<double>(j) / m;
    bp[static_cast<std::size_t>(j)] = domain.lo * (1.0 - t) + domain.hi * t;
  }
  bp.front() = domain.lo;
  bp.back() = domain.hi;
  return KnotVector(std::move(bp), degree, extension);
}

int eval_basis_local(const BasisSpec& spec, double u, std::span<double> out) {
  const KnotVector& kv = spec.knots();
  const int p = kv.degree();
  if (static_cast<int>(out.size()) < p + 1) {
    throw InvalidArgument("eval_basis_local: output span too small");
  }
  u = spec.checked_argument(u);
  const int s = kv.find_span(u);
  const int i = s + p;  // index into the extended knot sequence
  const auto& t = kv.extended();

  // Cox-de Boor recursion in triangular form.
  std::array<double, kMaxDegree + 2> left{};
  std::array<double, kMaxDegree + 2> right{};
  out[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - t[i + 1 - j];
    right[j] = t[i + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
  return s;
}

Eigen::VectorXd eval_basis(const BasisSpec& spec, double u) {
  std::array<double, kMaxDegree + 1> local{};
  const int w = spec.degree() + 1;
  const int first = eval_basis_local(spec, u, std::span<double>(local.data(), w));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(spec.dimension());
  for (int r = 0; r < w; ++r) out(first + r) = local[r];
  return out;
}

Eigen::MatrixXd DesignRows::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows(), cols);
  for (int r = 0; r < rows(); ++r) {
    auto vals = row(r);
    for (int c = 0; c < width; ++c) m(r, first[r] + c) = vals[c];
  }
  return m;
}

DesignRows design_rows(const BasisSpec& spec, std::span<const double> points) {
  DesignRows d;
  d.width = spec.degree() + 1;
  d.cols = spec.dimension();
  d.first.resize(points.size());
  d.values.resize(points.size() * static_cast<std::size_t>(d.width));
  for (std::size_t r = 0; r < points.size(); ++r) {
    std::span<double> out(d.values.data() + r * d.width, static_cast<std::size_t>(d.width));
    d.first[r] = eval_basis_local(spec, points[r], out);
  }
  return d;
}

Eigen::MatrixXd design_matrix(const BasisSpec& spec, std::span<const double> points) {
  return design_rows(spec, points).dense();
}

double eval_expansion(const BasisSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& coefs,
                      double u) {
  if (coefs.size() != spec.dimension()) {
    throw InvalidArgument("coefficient vector length does not match basis dimension");
  }
  std::array<double, kMaxDegree + 1> local{};
  const int w = spec.degree() + 1;
  const int first = eval_basis_local(spec, u, std::span<double>(local.data(), w));
  double acc = 0.0;
  for (int r = 0; r < w; ++r) acc += coefs(first + r) * local[r];
  return acc;
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("Gauss-Legendre order must be positive");
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // p1 = P_n(x), p0 = P_{n-1}(x)
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

GramMatrix gram_from_matrix(Eigen::MatrixXd psi) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(psi);
  if (eig.info() != Eigen::Success) throw NumericError("Gram eigendecomposition failed");
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double max_ev = ev.maxCoeff();
  if (!(max_ev > 0.0) || ev.minCoeff() < kGramEigenFloor * max_ev) {
    std::ostringstream msg;
    msg << "Gram matrix numerically singular (eigenvalue range " << ev.minCoeff() << " .. "
        << max_ev << ")";
    throw NumericError(msg.str());
  }
  const Eigen::MatrixXd& v = eig.eigenvectors();
  GramMatrix g;
  g.sqrt = v * ev.cwiseSqrt().asDiagonal() * v.transpose();
  g.inv_sqrt = v * ev.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  g.matrix = std::move(psi);
  return g;
}

GramMatrix gram_matrix(const BasisSpec& spec) {
  const int p = spec.dimension();
  const int w = spec.degree() + 1;
  const GaussRule rule = gauss_legendre(w);
  const auto& bp = spec.knots().breakpoints();
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(p, p);
  std::array<double, kMaxDegree + 1> local{};
  for (int s = 0; s + 1 < static_cast<int>(bp.size()); ++s) {
    const double a = bp[static_cast<std::size_t>(s)];
    const double b = bp[static_cast<std::size_t>(s) + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double u = mid + half * rule.nodes[q];
      const int first = eval_basis_local(spec, u, std::span<double>(local.data(), w));
      const double wq = half * rule.weights[q];
      for (int r = 0; r < w; ++r) {
        for (int c = 0; c < w; ++c) psi(first + r, first + c) += wq * local[r] * local[c];
      }
    }
  }
  psi = 0.5 * (psi + psi.transpose()).eval();
  return gram_from_matrix(std::move(psi));
}

Eigen::VectorXd basis_integrals(const BasisSpec& spec) {
  const int w = spec.degree() + 1;
  const GaussRule rule = gauss_legendre(w);
  const auto& bp = spec.knots().breakpoints();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(spec.dimension());
  std::array<double, kMaxDegree + 1> local{};
  for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
    const double half = 0.5 * (bp[s + 1] - bp[s]);
    const double mid = 0.5 * (bp[s + 1] + bp[s]);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const int first =
          eval_basis_local(spec, mid + half * rule.nodes[q], std::span<double>(local.data(), w));
      for (int r = 0; r < w; ++r) out(first + r) += half * rule.weights[q] * local[r];
    }
  }
  return out;
}

Eigen::MatrixXd difference_operator(int p, int d) {
  if (d <= 0 || d >= p) {
    throw InvalidArgument("difference order must satisfy 0 < d < p (d=" + std::to_string(d) +
                          ", p=" + std::to_string(p) + ")");
  }
  Eigen::MatrixXd delta = Eigen::MatrixXd::Identity(p, p);
  for (int k = 0; k < d; ++k) {
    const Eigen::Index r = delta.rows();
    delta = (delta.bottomRows(r - 1) - delta.topRows(r - 1)).eval();
  }
  return delta;
}

PenaltyMatrix diff_penalty(int p, int d) {
  const Eigen::MatrixXd delta = difference_operator(p, d);
  return PenaltyMatrix{d, delta.transpose() * delta};
}

}  // namespace rramfda
