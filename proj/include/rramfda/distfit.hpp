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

#ifndef RRAMFDA_DISTFIT_HPP_
#define RRAMFDA_DISTFIT_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rramfda/rng.hpp"

namespace rramfda {

/// Name of the score transform y = 1 / (xi + 1) in model files.
inline constexpr const char* kReciprocalShift = "reciprocal_shift";

struct GumbelParams {
  double mu = 0.0;
  double beta = 1.0;
};

/// Gumbel (maximum type) model of the transformed first-component scores,
/// with its goodness-of-fit diagnostics.
struct ScoreDistribution {
  double mu = 0.0;
  double beta = 1.0;
  std::string transform = kReciprocalShift;
  double ks_statistic = 0.0;
  double ks_pvalue = 1.0;
  std::optional<double> bootstrap_pvalue;
  int n = 0;

  GumbelParams params() const { return {mu, beta}; }
};

struct KsResult {
  double statistic = 0.0;
  double pvalue = 1.0;
};

/// y = 1 / (xi + 1), element-wise. Throws DataError naming the first index
/// with xi == -1.
std::vector<double> transform_scores(std::span<const double> xi);

/// xi = 1 / y - 1.
std::vector<double> inverse_transform_scores(std::span<const double> y);

/// Maximum-likelihood Gumbel fit. The scale solves the profile equation
/// beta = mean(y) - sum(y e^{-y/beta}) / sum(e^{-y/beta}) by safeguarded
/// Newton from the moment estimate; the location follows in closed form.
/// Throws DataError for fewer than 2 points or a constant sample and
/// NumericError if Newton does not converge in 100 iterations.
GumbelParams gumbel_mle(std::span<const double> y);

double gumbel_cdf(double x, double mu, double beta);
double gumbel_pdf(double x, double mu, double beta);
/// Exact inverse of gumbel_cdf for p in (0, 1).
double gumbel_quantile(double p, double mu, double beta);

/// Kolmogorov limiting survival function Q(lambda) = P(K > lambda).
double kolmogorov_survival(double lambda);

/// One-sample KS statistic against `cdf` with the asymptotic p-value
/// Q(sqrt(n) D).
KsResult ks_test(std::span<const double> y, const std::function<double(double)>& cdf);

/// Accept the null at level alpha when p >= alpha.
inline bool ks_accept(double pvalue, double alpha = 0.05) { return pvalue >= alpha; }

/// Parametric-bootstrap KS p-value for a Gumbel fitted to y, accounting
/// for the parameters being estimated from the same sample.
double ks_bootstrap_pvalue(std::span<const double> y, int resamples, std::uint64_t seed);

struct ScoreFitOptions {
  int bootstrap_resamples = 0;  // 0 disables the bootstrap p-value
  std::uint64_t seed = 0;
};

/// Transforms first-component scores, fits the Gumbel and runs KS.
ScoreDistribution fit_score_distribution(std::span<const double> xi,
                                         const ScoreFitOptions& options = {});

/// Draws y ~ Gumbel(mu, beta) by inverse transform and returns
/// xi = 1/y - 1. Draws with y == 0 are redrawn.
std::vector<double> sample_scores(const ScoreDistribution& dist, int n, Rng& rng);
std::vector<double> sample_scores(const ScoreDistribution& dist, int n, std::uint64_t seed);

/// Alternative families for the transformed scores, reported by their KS
/// fit only.
struct ComparatorFit {
  std::string family;
  std::vector<std::pair<std::string, double>> params;
  KsResult ks;
};

/// Gamma MLE (shape by Newton on log k - digamma(k)). Empty if any y <= 0.
std::optional<ComparatorFit> fit_gamma(std::span<const double> y);
/// Log-normal MLE. Empty if any y <= 0.
std::optional<ComparatorFit> fit_lognormal(std::span<const double> y);

}  // namespace rramfda

#endif  // RRAMFDA_DISTFIT_HPP_
