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

#ifndef RRAMFDA_SIMGEN_HPP_
#define RRAMFDA_SIMGEN_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rramfda/bspline.hpp"
#include "rramfda/curves.hpp"
#include "rramfda/rng.hpp"

namespace rramfda {

/// A closed-form function on [0,1], described by a spec string so that
/// generator configurations can be written to and read from text:
///
///   saturating:A:r          A * (1 - exp(-r u))
///   polynomial:c0:c1:...    sum_k c_k u^k
///   legendre:k              sqrt(2k+1) P_k(2u - 1)
///   brownian:k              sqrt(2) sin((k - 1/2) pi u), k >= 1
///   cosine:k                1 for k = 0, else sqrt(2) cos(k pi u)
///   spline                  a B-spline expansion (built in code only)
class CurveFunction {
 public:
  static CurveFunction parse(std::string_view spec);
  static CurveFunction spline(BasisSpec basis, Eigen::VectorXd coefs);

  double operator()(double u) const { return eval_(u); }
  const std::string& spec() const { return spec_; }

 private:
  CurveFunction(std::string spec, std::function<double(double)> eval)
      : spec_(std::move(spec)), eval_(std::move(eval)) {}

  std::string spec_;
  std::function<double(double)> eval_;
};

/// Distribution of a mode's score:
///   normal:sd               N(0, sd^2)
///   recip_gumbel:mu:beta    xi = 1/y - 1 with y ~ Gumbel(mu, beta)
///   fixed:v0:v1:...         v[index mod count]
class ScoreLaw {
 public:
  static ScoreLaw parse(std::string_view spec);

  double draw(Rng& rng, std::size_t index) const;
  const std::string& spec() const { return spec_; }

 private:
  enum class Kind { kNormal, kReciprocalGumbel, kFixed };
  Kind kind_ = Kind::kNormal;
  std::vector<double> params_;
  std::string spec_;
};

/// Law of the reset voltage:
///   fixed:v
///   uniform:a:b
///   quantiles:q0:...:qm     inverse empirical CDF, q_i at probability i/m,
///                           linear in between
class VresetLaw {
 public:
  static VresetLaw parse(std::string_view spec);
  static VresetLaw from_quantiles(std::vector<double> quantiles);

  double draw(Rng& rng) const;
  double lower_bound() const;
  const std::string& spec() const { return spec_; }

 private:
  enum class Kind { kFixed, kUniform, kQuantiles };
  Kind kind_ = Kind::kFixed;
  std::vector<double> params_;
  std::string spec_;
};

struct GeneratorMode {
  CurveFunction weight;
  ScoreLaw scores;
};

/// Truncated Karhunen-Loeve generator I*(u) = mean(u) + sum_j xi_j f_j(u)
/// observed at u = j/k, j = 1..k, k = round(v_reset / step), plus Gaussian
/// noise.
struct GeneratorConfig {
  int n_curves = 100;
  CurveFunction mean = CurveFunction::parse("saturating:0.005:2.5");
  std::vector<GeneratorMode> modes;
  double noise_sigma = 0.0;  // amperes
  VresetLaw vreset = VresetLaw::parse("uniform:0.45:0.75");
  double step = 1e-3;  // volts
  std::uint64_t seed = 1;
  int min_points = 5;
  /// Shift of v_reset per unit of the first mode's score; 0 keeps v_reset
  /// independent of the scores.
  double vreset_coupling = 0.0;
  /// Emit exp(I*) instead of I* (for models fitted on log current).
  bool exponentiate = false;
};

/// Checks the config invariants, including orthonormality of the mode
/// weight functions on [0,1] within 1e-6. Throws InvalidArgument.
void validate_config(const GeneratorConfig& config, bool require_min_curves = true);

struct GeneratedCurve {
  RawCurve curve;
  std::vector<double> scores;  // one per mode
};

/// Curve `index` drawn from `rng`. Throws DataError if the drawn reset
/// voltage yields fewer than min_points samples.
GeneratedCurve generate_curve(const GeneratorConfig& config, std::size_t index, Rng& rng);

struct GeneratedDataset {
  RawDataset data;
  Eigen::MatrixXd scores;  // n_curves x modes, ground truth
};

/// n_curves curves; curve i uses the substream derive_seed(seed, i), so the
/// output does not depend on thread scheduling. Cycle ids are 1..n.
GeneratedDataset generate_dataset_with_truth(const GeneratorConfig& config);
RawDataset generate_dataset(const GeneratorConfig& config);

/// Same as generate_dataset_with_truth but for an explicit count, which may
/// be 0 or 1.
GeneratedDataset generate_curves(const GeneratorConfig& config, int count);

/// Declarative key/value form (`key = value`, '#' comments, `mode` may
/// repeat as `mode = <weight> <law>`).
GeneratorConfig parse_generator_config(std::string_view text);
GeneratorConfig load_generator_config(const std::filesystem::path& path);
std::string format_generator_config(const GeneratorConfig& config);

}  // namespace rramfda

#endif  // RRAMFDA_SIMGEN_HPP_
