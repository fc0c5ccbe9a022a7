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

#include "rramfda/distfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "rramfda/error.hpp"

namespace rramfda {

namespace {

constexpr int kMaxNewton = 100;
constexpr double kNewtonTol = 1e-12;

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(std::span<const double> y) {
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

// Profile score g(b) = b - mean(z) + sum(z w) / sum(w), w = exp(-(z - zmin)/b),
// and g'(b) = 1 + var_w(z) / b^2, for a standardized sample (mean(z) = 0).
struct Profile {
  double g;
  double dg;
};

Profile profile(std::span<const double> z, double zmin, double b) {
  double sw = 0.0;
  double szw = 0.0;
  double szzw = 0.0;
  for (double v : z) {
    const double w = std::exp(-(v - zmin) / b);
    sw += w;
    szw += v * w;
    szzw += v * v * w;
  }
  const double wmean = szw / sw;
  const double wvar = std::max(szzw / sw - wmean * wmean, 0.0);
  return {b + wmean, 1.0 + wvar / (b * b)};
}

}  // namespace

std::vector<double> transform_scores(std::span<const double> xi) {
  std::vector<double> y(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (xi[i] == -1.0) {
      throw DataError("score " + std::to_string(i) + " equals -1 (pole of 1/(xi+1))");
    }
    y[i] = 1.0 / (xi[i] + 1.0);
  }
  return y;
}

std::vector<double> inverse_transform_scores(std::span<const double> y) {
  std::vector<double> xi(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 0.0) throw DataError("transformed score " + std::to_string(i) + " is zero");
    xi[i] = 1.0 / y[i] - 1.0;
  }
  return xi;
}

GumbelParams gumbel_mle(std::span<const double> y) {
  if (y.size() < 2) throw DataError("Gumbel fit needs at least 2 observations");
  for (double v : y) {
    if (!std::isfinite(v)) throw DataError("Gumbel fit: non-finite observation");
  }
  const Moments m = moments(y);
  const double scale = std::max(std::abs(m.mean), std::numeric_limits<double>::min());
  if (!(m.sd > 1e-14 * scale)) throw DataError("Gumbel fit: sample is constant");

  // Work on z = (y - mean) / sd so the exponentials stay well scaled.
  std::vector<double> z(y.size());
  std::transform(y.begin(), y.end(), z.begin(), [&](double v) { return (v - m.mean) / m.sd; });
  const double zmin = *std::min_element(z.begin(), z.end());

  double b = std::sqrt(6.0) / std::numbers::pi;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int iter = 0; iter < kMaxNewton; ++iter) {
    const Profile pr = profile(z, zmin, b);
    if (pr.g > 0.0) {
      hi = std::min(hi, b);
    } else {
      lo = std::max(lo, b);
    }
    double next = b - pr.g / pr.dg;
    if (!(next > lo && next < hi) || !std::isfinite(next)) {
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * b;
    }
    const double step = std::abs(next - b);
    b = next;
    if (step <= kNewtonTol * b) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericError("Gumbel MLE: Newton iteration did not converge");

  double sw = 0.0;
  for (double v : z) sw += std::exp(-(v - zmin) / b);
  const double mu_z = zmin - b * std::log(sw / static_cast<double>(z.size()));
  return {m.mean + m.sd * mu_z, m.sd * b};
}

double gumbel_cdf(double x, double mu, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("Gumbel scale must be positive");
  return std::exp(-std::exp(-(x - mu) / beta));
}

double gumbel_pdf(double x, double mu, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("Gumbel scale must be positive");
  const double t = (x - mu) / beta;
  return std::exp(-t - std::exp(-t)) / beta;
}

double gumbel_quantile(double p, double mu, double beta) {
  if (!(beta > 0.0)) throw InvalidArgument("Gumbel scale must be positive");
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("Gumbel quantile needs p in (0, 1)");
  return mu - beta * std::log(-std::log(p));
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  constexpr double kTermTol = 1e-12;
  if (lambda < 1.18) {
    // Dual (Jacobi theta) form of the same function; converges fast here.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k < 1000; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
      cdf += term;
      if (term < kTermTol * cdf || term == 0.0) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < kTermTol) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::span<const double> y, const std::function<double(double)>& cdf) {
  if (y.empty()) throw DataError("KS test needs at least one observation");
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  d = std::clamp(d, 0.0, 1.0);
  return {d, kolmogorov_survival(std::sqrt(n) * d)};
}

double ks_bootstrap_pvalue(std::span<const double> y, int resamples, std::uint64_t seed) {
  if (resamples < 1) throw InvalidArgument("bootstrap needs at least one resample");
  const GumbelParams fit = gumbel_mle(y);
  const double d0 =
      ks_test(y, [&](double x) { return gumbel_cdf(x, fit.mu, fit.beta); }).statistic;
  int exceed = 0;
  std::vector<double> draw(y.size());
  for (int b = 0; b < resamples; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    for (double& v : draw) v = gumbel_quantile(rng.uniform(), fit.mu, fit.beta);
    const GumbelParams refit = gumbel_mle(draw);
    const double d =
        ks_test(draw, [&](double x) { return gumbel_cdf(x, refit.mu, refit.beta); }).statistic;
    if (d >= d0) ++exceed;
  }
  return (exceed + 1.0) / (resamples + 1.0);
}

ScoreDistribution fit_score_distribution(std::span<const double> xi,
                                         const ScoreFitOptions& options) {
  const std::vector<double> y = transform_scores(xi);
  const GumbelParams g = gumbel_mle(y);
  const KsResult ks = ks_test(y, [&](double x) { return gumbel_cdf(x, g.mu, g.beta); });
  ScoreDistribution dist;
  dist.mu = g.mu;
  dist.beta = g.beta;
  dist.ks_statistic = ks.statistic;
  dist.ks_pvalue = ks.pvalue;
  dist.n = static_cast<int>(y.size());
  if (options.bootstrap_resamples > 0) {
    dist.bootstrap_pvalue = ks_bootstrap_pvalue(y, options.bootstrap_resamples, options.seed);
  }
  return dist;
}

std::vector<double> sample_scores(const ScoreDistribution& dist, int n, Rng& rng) {
  if (n < 0) throw InvalidArgument("sample size must be non-negative");
  std::vector<double> xi;
  xi.reserve(static_cast<std::size_t>(n));
  while (static_cast<int>(xi.size()) < n) {
    const double y = gumbel_quantile(rng.uniform(), dist.mu, dist.beta);
    if (y == 0.0) continue;
    xi.push_back(1.0 / y - 1.0);
  }
  return xi;
}

std::vector<double> sample_scores(const ScoreDistribution& dist, int n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_scores(dist, n, rng);
}

std::optional<ComparatorFit> fit_gamma(std::span<const double> y) {
  if (y.size() < 2) return std::nullopt;
  double mean = 0.0;
  double mean_log = 0.0;
  for (double v : y) {
    if (!(v > 0.0)) return std::nullopt;
    mean += v;
    mean_log += std::log(v);
  }
  mean /= static_cast<double>(y.size());
  mean_log /= static_cast<double>(y.size());
  const double s = std::log(mean) - mean_log;
  if (!(s > 0.0)) return std::nullopt;
  double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  for (int iter = 0; iter < kMaxNewton; ++iter) {
    const double f = std::log(k) - boost::math::digamma(k) - s;
    const double df = 1.0 / k - boost::math::trigamma(k);
    double next = k - f / df;
    if (!(next > 0.0)) next = 0.5 * k;
    const double step = std::abs(next - k);
    k = next;
    if (step <= 1e-10 * k) break;
  }
  const double theta = mean / k;
  ComparatorFit fit;
  fit.family = "gamma";
  fit.params = {{"shape", k}, {"scale", theta}};
  fit.ks = ks_test(y, [&](double x) { return x <= 0.0 ? 0.0 : boost::math::gamma_p(k, x / theta); });
  return fit;
}

std::optional<ComparatorFit> fit_lognormal(std::span<const double> y) {
  if (y.size() < 2) return std::nullopt;
  std::vector<double> logs(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) return std::nullopt;
    logs[i] = std::log(y[i]);
  }
  const double n = static_cast<double>(logs.size());
  const double m = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : logs) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / n);
  if (!(sd > 0.0)) return std::nullopt;
  ComparatorFit fit;
  fit.family = "lognormal";
  fit.params = {{"meanlog", m}, {"sdlog", sd}};
  fit.ks = ks_test(y, [&](double x) {
    return x <= 0.0 ? 0.0 : 0.5 * std::erfc(-(std::log(x) - m) / (sd * std::numbers::sqrt2));
  });
  return fit;
}

}  // namespace rramfda
