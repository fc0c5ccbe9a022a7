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

#include "rramfda/simgen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>

#include "rramfda/distfit.hpp"
#include "rramfda/error.hpp"
#include "rramfda/parallel.hpp"

namespace rramfda {

namespace {

constexpr double kOrthoTol = 1e-6;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view field, std::string_view context) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw InvalidArgument("bad number '" + std::string(field) + "' in '" + std::string(context) +
                          "'");
  }
  return v;
}

long long to_integer(std::string_view field, std::string_view context) {
  field = trim(field);
  long long v = 0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw InvalidArgument("bad integer '" + std::string(field) + "' in '" + std::string(context) +
                          "'");
  }
  return v;
}

std::vector<double> numeric_args(const std::vector<std::string_view>& parts,
                                 std::string_view context) {
  std::vector<double> out;
  for (std::size_t i = 1; i < parts.size(); ++i) out.push_back(to_double(parts[i], context));
  return out;
}

void expect_args(const std::vector<double>& args, std::size_t count, std::string_view context) {
  if (args.size() != count) {
    throw InvalidArgument("'" + std::string(context) + "' expects " + std::to_string(count) +
                          " parameter(s)");
  }
}

double legendre(int k, double x) {
  if (k == 0) return 1.0;
  double p0 = 1.0;
  double p1 = x;
  for (int n = 2; n <= k; ++n) {
    const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

CurveFunction CurveFunction::parse(std::string_view spec) {
  spec = trim(spec);
  const auto parts = split(spec, ':');
  const std::string_view kind = parts[0];
  const std::vector<double> args = numeric_args(parts, spec);
  const std::string text(spec);
  if (kind == "saturating") {
    expect_args(args, 2, spec);
    const double a = args[0];
    const double r = args[1];
    return CurveFunction(text, [a, r](double u) { return a * -std::expm1(-r * u); });
  }
  if (kind == "polynomial") {
    if (args.empty()) throw InvalidArgument("polynomial needs at least one coefficient");
    return CurveFunction(text, [args](double u) {
      double acc = 0.0;
      for (auto it = args.rbegin(); it != args.rend(); ++it) acc = acc * u + *it;
      return acc;
    });
  }
  if (kind == "legendre" || kind == "brownian" || kind == "cosine") {
    expect_args(args, 1, spec);
    const int k = static_cast<int>(args[0]);
    if (k != args[0] || k < 0) throw InvalidArgument("'" + text + "' needs a non-negative integer");
    if (kind == "legendre") {
      const double norm = std::sqrt(2.0 * k + 1.0);
      return CurveFunction(text, [k, norm](double u) { return norm * legendre(k, 2.0 * u - 1.0); });
    }
    if (kind == "brownian") {
      if (k < 1) throw InvalidArgument("brownian index starts at 1");
      const double freq = (k - 0.5) * std::numbers::pi;
      return CurveFunction(text,
                           [freq](double u) { return std::numbers::sqrt2 * std::sin(freq * u); });
    }
    if (k == 0) return CurveFunction(text, [](double) { return 1.0; });
    const double freq = k * std::numbers::pi;
    return CurveFunction(text,
                         [freq](double u) { return std::numbers::sqrt2 * std::cos(freq * u); });
  }
  throw InvalidArgument("unknown function kind '" + std::string(kind) + "'");
}

CurveFunction CurveFunction::spline(BasisSpec basis, Eigen::VectorXd coefs) {
  if (coefs.size() != basis.dimension()) {
    throw InvalidArgument("spline coefficients do not match the basis dimension");
  }
  return CurveFunction("spline", [basis = std::move(basis), coefs = std::move(coefs)](double u) {
    return eval_expansion(basis, coefs, u);
  });
}

ScoreLaw ScoreLaw::parse(std::string_view spec) {
  spec = trim(spec);
  const auto parts = split(spec, ':');
  ScoreLaw law;
  law.spec_ = std::string(spec);
  law.params_ = numeric_args(parts, spec);
  if (parts[0] == "normal") {
    expect_args(law.params_, 1, spec);
    if (law.params_[0] < 0.0) throw InvalidArgument("normal sd must be non-negative");
    law.kind_ = Kind::kNormal;
  } else if (parts[0] == "recip_gumbel") {
    expect_args(law.params_, 2, spec);
    if (!(law.params_[1] > 0.0)) throw InvalidArgument("Gumbel scale must be positive");
    law.kind_ = Kind::kReciprocalGumbel;
  } else if (parts[0] == "fixed") {
    if (law.params_.empty()) throw InvalidArgument("fixed score law needs values");
    law.kind_ = Kind::kFixed;
  } else {
    throw InvalidArgument("unknown score law '" + std::string(parts[0]) + "'");
  }
  return law;
}

double ScoreLaw::draw(Rng& rng, std::size_t index) const {
  switch (kind_) {
    case Kind::kNormal:
      return params_[0] * rng.normal();
    case Kind::kReciprocalGumbel:
      for (;;) {
        const double y = gumbel_quantile(rng.uniform(), params_[0], params_[1]);
        if (y != 0.0) return 1.0 / y - 1.0;
      }
    case Kind::kFixed:
      return params_[index % params_.size()];
  }
  return 0.0;
}

VresetLaw VresetLaw::parse(std::string_view spec) {
  spec = trim(spec);
  const auto parts = split(spec, ':');
  VresetLaw law;
  law.spec_ = std::string(spec);
  law.params_ = numeric_args(parts, spec);
  if (parts[0] == "fixed") {
    expect_args(law.params_, 1, spec);
    law.kind_ = Kind::kFixed;
  } else if (parts[0] == "uniform") {
    expect_args(law.params_, 2, spec);
    if (!(law.params_[1] >= law.params_[0])) throw InvalidArgument("uniform needs a <= b");
    law.kind_ = Kind::kUniform;
  } else if (parts[0] == "quantiles") {
    if (law.params_.size() < 2) throw InvalidArgument("quantile law needs at least 2 values");
    if (!std::is_sorted(law.params_.begin(), law.params_.end())) {
      throw InvalidArgument("quantile law values must be non-decreasing");
    }
    law.kind_ = Kind::kQuantiles;
  } else {
    throw InvalidArgument("unknown reset-voltage law '" + std::string(parts[0]) + "'");
  }
  if (!(law.lower_bound() > 0.0)) throw InvalidArgument("reset-voltage law support must be positive");
  return law;
}

VresetLaw VresetLaw::from_quantiles(std::vector<double> quantiles) {
  std::string spec = "quantiles";
  for (double q : quantiles) spec += ":" + format_number(q);
  return parse(spec);
}

double VresetLaw::draw(Rng& rng) const {
  switch (kind_) {
    case Kind::kFixed:
      return params_[0];
    case Kind::kUniform:
      return params_[0] + (params_[1] - params_[0]) * rng.uniform();
    case Kind::kQuantiles: {
      const double pos = rng.uniform() * static_cast<double>(params_.size() - 1);
      const auto lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, params_.size() - 1);
      const double frac = pos - static_cast<double>(lo);
      return params_[lo] + frac * (params_[hi] - params_[lo]);
    }
  }
  return 0.0;
}

double VresetLaw::lower_bound() const { return params_.front(); }

void validate_config(const GeneratorConfig& config, bool require_min_curves) {
  if (require_min_curves && config.n_curves < 2) throw InvalidArgument("n_curves must be >= 2");
  if (!(config.noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");
  if (!(config.step > 0.0)) throw InvalidArgument("step must be positive");
  if (config.min_points < 1) throw InvalidArgument("min_points must be >= 1");
  if (config.modes.empty()) return;

  // Composite Gauss-Legendre on [0,1].
  constexpr int kPanels = 2048;
  const GaussRule rule = gauss_legendre(8);
  const std::size_t m = config.modes.size();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                               static_cast<Eigen::Index>(m));
  std::vector<double> values(m);
  for (int panel = 0; panel < kPanels; ++panel) {
    const double a = static_cast<double>(panel) / kPanels;
    const double half = 0.5 / kPanels;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double u = a + half * (1.0 + rule.nodes[q]);
      for (std::size_t j = 0; j < m; ++j) values[j] = config.modes[j].weight(u);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
          gram(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) +=
              half * rule.weights[q] * values[r] * values[c];
        }
      }
    }
  }
  const double dev =
      (gram - Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)))
          .cwiseAbs()
          .maxCoeff();
  if (dev > kOrthoTol) {
    throw InvalidArgument("mode weight functions are not orthonormal on [0,1] (max deviation " +
                          format_number(dev) + ")");
  }
}

GeneratedCurve generate_curve(const GeneratorConfig& config, std::size_t index, Rng& rng) {
  GeneratedCurve out;
  double v_reset = config.vreset.draw(rng);
  out.scores.reserve(config.modes.size());
  for (const GeneratorMode& mode : config.modes) out.scores.push_back(mode.scores.draw(rng, index));
  if (config.vreset_coupling != 0.0 && !out.scores.empty()) {
    v_reset += config.vreset_coupling * out.scores.front();
  }
  const long long k = std::llround(v_reset / config.step);
  const CycleId id = static_cast<CycleId>(index) + 1;
  if (k < config.min_points) {
    throw DataError("cycle " + std::to_string(id) + ": reset voltage " + format_number(v_reset) +
                    " gives " + std::to_string(k) + " samples, below the minimum " +
                    std::to_string(config.min_points));
  }
  RawCurve& curve = out.curve;
  curve.cycle_id = id;
  curve.voltages.resize(static_cast<std::size_t>(k));
  curve.currents.resize(static_cast<std::size_t>(k));
  for (long long j = 1; j <= k; ++j) {
    const double u = static_cast<double>(j) / static_cast<double>(k);
    double current = config.mean(u);
    for (std::size_t m = 0; m < config.modes.size(); ++m) {
      current += out.scores[m] * config.modes[m].weight(u);
    }
    if (config.noise_sigma > 0.0) current += config.noise_sigma * rng.normal();
    if (config.exponentiate) current = std::exp(current);
    curve.voltages[static_cast<std::size_t>(j - 1)] = static_cast<double>(j) * config.step;
    curve.currents[static_cast<std::size_t>(j - 1)] = current;
  }
  curve.v_reset = curve.voltages.back();
  return out;
}

GeneratedDataset generate_curves(const GeneratorConfig& config, int count) {
  if (count < 0) throw InvalidArgument("curve count must be non-negative");
  validate_config(config, false);
  const auto n = static_cast<std::size_t>(count);
  std::vector<std::optional<GeneratedCurve>> slots(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng(derive_seed(config.seed, i));
    slots[i] = generate_curve(config, i, rng);
  });
  GeneratedDataset out;
  out.scores.resize(count, static_cast<Eigen::Index>(config.modes.size()));
  out.data.curves.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < config.modes.size(); ++m) {
      out.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = slots[i]->scores[m];
    }
    out.data.curves.push_back(std::move(slots[i]->curve));
  }
  std::istringstream lines(format_generator_config(config));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = std::string(trim(std::string_view(line).substr(0, eq)));
    std::string value = std::string(trim(std::string_view(line).substr(eq + 1)));
    auto& slot = out.data.metadata["generator." + key];
    slot = slot.empty() ? value : slot + "; " + value;
  }
  return out;
}

GeneratedDataset generate_dataset_with_truth(const GeneratorConfig& config) {
  validate_config(config, true);
  return generate_curves(config, config.n_curves);
}

RawDataset generate_dataset(const GeneratorConfig& config) {
  return generate_dataset_with_truth(config).data;
}

GeneratorConfig parse_generator_config(std::string_view text) {
  GeneratorConfig config;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "n_curves") {
      config.n_curves = static_cast<int>(to_integer(value, line));
    } else if (key == "seed") {
      config.seed = static_cast<std::uint64_t>(to_integer(value, line));
    } else if (key == "step") {
      config.step = to_double(value, line);
    } else if (key == "noise_sigma") {
      config.noise_sigma = to_double(value, line);
    } else if (key == "min_points") {
      config.min_points = static_cast<int>(to_integer(value, line));
    } else if (key == "vreset_coupling") {
      config.vreset_coupling = to_double(value, line);
    } else if (key == "exponentiate") {
      config.exponentiate = value == "true" || value == "1";
    } else if (key == "mean") {
      config.mean = CurveFunction::parse(value);
    } else if (key == "vreset") {
      config.vreset = VresetLaw::parse(value);
    } else if (key == "mode") {
      const auto space = value.find_first_of(" \t");
      if (space == std::string_view::npos) {
        throw InvalidArgument("config line " + std::to_string(line_no) +
                              ": mode needs '<weight> <score law>'");
      }
      config.modes.push_back(
          {CurveFunction::parse(value.substr(0, space)), ScoreLaw::parse(value.substr(space + 1))});
    } else {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": unknown key '" +
                            std::string(key) + "'");
    }
  }
  return config;
}

GeneratorConfig load_generator_config(const std::filesystem::path& path) {
  return parse_generator_config(read_text_file(path));
}

std::string format_generator_config(const GeneratorConfig& config) {
  std::ostringstream out;
  out << "n_curves = " << config.n_curves << '\n';
  out << "seed = " << config.seed << '\n';
  out << "step = " << format_number(config.step) << '\n';
  out << "noise_sigma = " << format_number(config.noise_sigma) << '\n';
  out << "min_points = " << config.min_points << '\n';
  out << "vreset_coupling = " << format_number(config.vreset_coupling) << '\n';
  out << "exponentiate = " << (config.exponentiate ? "true" : "false") << '\n';
  out << "mean = " << config.mean.spec() << '\n';
  out << "vreset = " << config.vreset.spec() << '\n';
  for (const GeneratorMode& m : config.modes) {
    out << "mode = " << m.weight.spec() << ' ' << m.scores.spec() << '\n';
  }
  return out.str();
}

}  // namespace rramfda
