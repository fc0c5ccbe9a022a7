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

#include "rramfda/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <sstream>

#include "rramfda/error.hpp"
#include "rramfda/parallel.hpp"
#include "rramfda/report.hpp"
#include "rramfda/simgen.hpp"

namespace rramfda {

namespace {

constexpr int kVresetQuantiles = 101;

std::string format_utc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string provenance_time(bool stamp_time) {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    try {
      return format_utc(static_cast<std::time_t>(std::stoll(epoch)));
    } catch (const std::exception&) {
      // ignore a malformed value
    }
  }
  if (stamp_time) {
    return format_utc(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now()));
  }
  return "";
}

std::vector<double> quantiles(std::vector<double> values, int count) {
  std::sort(values.begin(), values.end());
  std::vector<double> out(static_cast<std::size_t>(count));
  const double last = static_cast<double>(values.size() - 1);
  for (int i = 0; i < count; ++i) {
    const double pos = last * i / (count - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    out[static_cast<std::size_t>(i)] = values[lo] + frac * (values[hi] - values[lo]);
  }
  return out;
}

double median_voltage_step(const RawDataset& data) {
  std::vector<double> steps;
  for (const RawCurve& c : data.curves) {
    for (std::size_t k = 1; k < c.voltages.size(); ++k) {
      steps.push_back(c.voltages[k] - c.voltages[k - 1]);
    }
  }
  if (steps.empty()) return 1e-3;
  auto mid = steps.begin() + static_cast<std::ptrdiff_t>(steps.size() / 2);
  std::nth_element(steps.begin(), mid, steps.end());
  return *mid;
}

ScoreSummary summarize(const Eigen::VectorXd& v) {
  ScoreSummary s;
  const double n = static_cast<double>(v.size());
  s.mean = v.mean();
  s.sd = v.size() > 1 ? std::sqrt((v.array() - s.mean).square().sum() / (n - 1.0)) : 0.0;
  s.min = v.minCoeff();
  s.max = v.maxCoeff();
  return s;
}

}  // namespace

std::vector<RegisteredCurve> prepare_curves(const RawDataset& data, bool log_current) {
  std::vector<RegisteredCurve> curves = register_all(data);
  if (log_current) {
    transform_currents(curves, [](double i) {
      return i > 0.0 ? std::log(i) : std::numeric_limits<double>::quiet_NaN();
    });
  }
  return curves;
}

std::vector<CurveDiagnostics> curve_diagnostics(const std::vector<RegisteredCurve>& curves,
                                                const ModelFile& model, const FpcaModel& view) {
  const BasisSpec& spec = view.spec;
  const PenaltyMatrix penalty = diff_penalty(spec.dimension(), model.penalty_order);
  const int qd = std::min(model.q(), 2);
  std::vector<CurveDiagnostics> out(curves.size());
  parallel_for(curves.size(), [&](std::size_t i) {
    const CurveSystem system(curves[i], spec);
    const PsplineFit fit = system.solve(model.lambda, penalty, false);
    const Eigen::MatrixXd scores = project_scores(view, fit.coefficients.transpose(), qd);
    CurveDiagnostics& d = out[i];
    d.cycle_id = curves[i].cycle_id;
    d.v_reset = curves[i].v_reset;
    const DesignRows& design = system.design();
    const Eigen::VectorXd& y = system.observations();
    for (int q = 1; q <= qd; ++q) {
      d.scores.push_back(scores(0, q - 1));
      const Eigen::VectorXd coefs = reconstruct(view, scores.row(0).head(q).transpose(), q);
      double ss = 0.0;
      for (int r = 0; r < design.rows(); ++r) {
        const auto row = design.row(r);
        double yhat = 0.0;
        for (int a = 0; a < design.width; ++a) yhat += row[a] * coefs(design.first[r] + a);
        ss += (y(r) - yhat) * (y(r) - yhat);
      }
      d.rmse.push_back(std::sqrt(ss / design.rows()));
    }
  });
  return out;
}

FitOutputs fit_dataset(const RawDataset& data, const FitConfig& config,
                       const std::string& input_hash) {
  if (data.curves.empty()) throw DataError("dataset has no curves");
  const std::vector<RegisteredCurve> curves = prepare_curves(data, config.log_current);
  const BasisSpec spec = make_basis({0.0, 1.0}, config.knots, config.degree, config.extension);
  require_min_points(curves, spec);
  const int n = static_cast<int>(curves.size());
  if (n < 2) throw DataError("FPCA needs at least 2 curves, got " + std::to_string(n));
  const int q_limit = std::min(n - 1, spec.dimension());
  if (config.q < 1 || config.q > q_limit) {
    throw DataError("q = " + std::to_string(config.q) + " outside [1, " + std::to_string(q_limit) +
                    "] for " + std::to_string(n) + " curves and " +
                    std::to_string(spec.dimension()) + " basis functions");
  }

  FitOutputs out{ModelFile{}, FpcaModel{spec, {}, {}, {}, {}, {}, {}, 0.0}, std::nullopt, {}, {}, {}};
  ModelFile& model = out.model;
  if (config.lambda) {
    if (!(*config.lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
    model.lambda = *config.lambda;
    model.lambda_source = "fixed";
  } else {
    const std::vector<double> grid = log_grid(config.grid_lo, config.grid_hi, config.grid_count);
    out.selection = select_lambda(curves, spec, grid, config.penalty_order, config.criterion);
    model.lambda = out.selection->chosen;
    model.lambda_source = to_string(config.criterion);
  }

  const CoefMatrix coefs = fit_all(curves, spec, model.lambda, config.penalty_order);
  out.fpca = fit_fpca(coefs, gram_matrix(spec), config.q);
  const FpcaModel& fpca = out.fpca;

  const Eigen::VectorXd first = fpca.scores.col(0);
  out.first_scores.assign(first.data(), first.data() + first.size());
  out.transformed_scores = transform_scores(out.first_scores);
  model.score_distribution = fit_score_distribution(
      out.first_scores, {config.bootstrap_resamples, config.seed});
  if (auto g = fit_gamma(out.transformed_scores)) model.comparators.push_back(*g);
  if (auto l = fit_lognormal(out.transformed_scores)) model.comparators.push_back(*l);

  model.degree = config.degree;
  model.extension = config.extension;
  model.breakpoints = spec.knots().breakpoints();
  model.penalty_order = config.penalty_order;
  model.log_current = config.log_current;
  model.n_curves = n;
  model.mean_coefs = fpca.mean_coefs;
  model.eigenvalues = fpca.eigenvalues;
  model.total_variance = fpca.total_variance;
  model.weight_coefs = fpca.weight_coefs;
  for (int j = 0; j < fpca.q_max(); ++j) model.score_summary.push_back(summarize(fpca.scores.col(j)));
  std::vector<double> vresets;
  vresets.reserve(data.curves.size());
  for (const RawCurve& c : data.curves) vresets.push_back(c.v_reset);
  model.vreset_quantiles = quantiles(std::move(vresets), kVresetQuantiles);
  model.voltage_step = median_voltage_step(data);
  model.provenance.input_hash = input_hash;
  model.provenance.timestamp = provenance_time(config.stamp_time);

  out.diagnostics = curve_diagnostics(curves, model, to_fpca(model));
  return out;
}

FitOutputs cmd_fit(const std::filesystem::path& input, const FitConfig& config,
                   const std::optional<std::filesystem::path>& model_out,
                   const std::optional<std::filesystem::path>& report_dir) {
  const std::string text = read_text_file(input);
  std::istringstream in(text);
  const RawDataset data = parse_dataset(in, input.string());
  FitOutputs out = fit_dataset(data, config, fnv1a64_hex(text));
  if (model_out) save_model(*model_out, out.model);
  if (report_dir) write_report(build_report(out), *report_dir);
  return out;
}

RawDataset simulate_dataset(const ModelFile& model, int n, std::uint64_t seed) {
  if (n < 0) throw InvalidArgument("number of curves must be non-negative");
  if (model.q() < 1) throw SchemaError("model has no principal components");
  const BasisSpec spec = model.basis();
  GeneratorConfig config;
  config.n_curves = n;
  config.mean = CurveFunction::spline(spec, model.mean_coefs);
  char law[96];
  std::snprintf(law, sizeof law, "recip_gumbel:%.17g:%.17g", model.score_distribution.mu,
                model.score_distribution.beta);
  config.modes.push_back(
      {CurveFunction::spline(spec, model.weight_coefs.row(0).transpose()), ScoreLaw::parse(law)});
  config.noise_sigma = 0.0;
  config.vreset = VresetLaw::from_quantiles(model.vreset_quantiles);
  config.step = model.voltage_step;
  config.seed = seed;
  config.min_points = 1;
  config.exponentiate = model.log_current;
  RawDataset data = generate_curves(config, n).data;
  data.metadata["model.input_hash"] = model.provenance.input_hash;
  return data;
}

void cmd_simulate(const std::filesystem::path& model_path, int n, std::uint64_t seed,
                  const std::filesystem::path& out) {
  const ModelFile model = load_model(model_path);
  save_dataset(out, simulate_dataset(model, n, seed));
}

ValidationReport validate_dataset(const RawDataset& data, const ModelFile& model) {
  if (data.curves.empty()) throw DataError("dataset has no curves");
  const FpcaModel view = to_fpca(model);
  const std::vector<RegisteredCurve> curves = prepare_curves(data, model.log_current);
  require_min_points(curves, view.spec);
  ValidationReport report;
  report.curves = curve_diagnostics(curves, model, view);

  std::vector<double> first;
  std::vector<double> rmse;
  for (const CurveDiagnostics& d : report.curves) {
    first.push_back(d.scores.front());
    rmse.push_back(d.rmse.front());
  }
  const std::vector<double> y = transform_scores(first);
  const ScoreDistribution& dist = model.score_distribution;
  report.ks = ks_test(y, [&](double x) { return gumbel_cdf(x, dist.mu, dist.beta); });
  report.accepted = ks_accept(report.ks.pvalue);

  std::vector<double> sorted = rmse;
  std::sort(sorted.begin(), sorted.end());
  double acc = 0.0;
  for (double v : rmse) acc += v;
  report.rmse_mean = acc / static_cast<double>(rmse.size());
  const std::size_t m = sorted.size();
  report.rmse_median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  report.rmse_max = sorted.back();
  return report;
}

ValidationReport cmd_validate(const std::filesystem::path& input,
                              const std::filesystem::path& model_path,
                              const std::optional<std::filesystem::path>& out_csv) {
  const ModelFile model = load_model(model_path);
  const RawDataset data = load_dataset(input);
  ValidationReport report = validate_dataset(data, model);
  if (out_csv) write_diagnostics(report.curves, *out_csv);
  return report;
}

}  // namespace rramfda
