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

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rramfda/error.hpp"
#include "rramfda/pipeline.hpp"
#include "rramfda/report.hpp"
#include "rramfda/simgen.hpp"

namespace fs = std::filesystem;
using namespace rramfda;

namespace {

void parse_grid(const std::string& text, FitConfig& config) {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &lo, &hi, &count, &tail) != 3) {
    throw InvalidArgument("--lambda-grid expects lo:hi:count, got '" + text + "'");
  }
  config.grid_lo = lo;
  config.grid_hi = hi;
  config.grid_count = count;
}

void print_fit(const FitOutputs& fit) {
  const ModelFile& m = fit.model;
  std::printf("curves            %d\n", m.n_curves);
  std::printf("lambda            %.6g (%s)\n", m.lambda, m.lambda_source.c_str());
  const VarianceTable t = explained_variance(fit.fpca, fit.fpca.q_max());
  std::printf("%-4s %14s %10s %10s\n", "pc", "eigenvalue", "percent", "cumul");
  for (int j = 0; j < fit.fpca.q_max(); ++j) {
    std::printf("%-4d %14.6e %10.4f %10.4f\n", j + 1, m.eigenvalues(j), t.percent[j],
                t.cumulative[j]);
  }
  const ScoreDistribution& d = m.score_distribution;
  std::printf("gumbel            mu=%.8g beta=%.6g\n", d.mu, d.beta);
  std::printf("ks                D=%.6g p=%.4g", d.ks_statistic, d.ks_pvalue);
  if (d.bootstrap_pvalue) std::printf(" p_boot=%.4g", *d.bootstrap_pvalue);
  std::printf(" %s\n", ks_accept(d.ks_pvalue) ? "accept" : "reject");
}

void print_validation(const ValidationReport& r) {
  std::printf("curves            %zu\n", r.curves.size());
  std::printf("rmse              mean=%.6g median=%.6g max=%.6g\n", r.rmse_mean, r.rmse_median,
              r.rmse_max);
  std::printf("ks                D=%.6g p=%.4g %s\n", r.ks.statistic, r.ks.pvalue,
              r.accepted ? "accept" : "reject");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional model of RRAM reset curves"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  FitConfig config;
  std::string input;
  std::string model_path;
  std::string out_path;
  std::string report_dir;
  std::string grid;
  std::string criterion = "cv";
  std::string config_path;
  double lambda = 0.0;
  int n = 0;
  std::uint64_t seed = 1;

  auto* fit = app.add_subcommand("fit", "fit a model to a dataset");
  fit->add_option("input", input, "dataset CSV (optionally .gz)")->required();
  fit->add_option("-o,--output", model_path, "model file to write");
  fit->add_option("--report-dir", report_dir, "directory for report CSV series");
  fit->add_option("--knots", config.knots, "breakpoints on [0,1] including the ends")
      ->capture_default_str();
  fit->add_option("--degree", config.degree, "spline degree")->capture_default_str();
  std::string extension = "uniform";
  fit->add_option("--knot-extension", extension, "exterior knots")
      ->check(CLI::IsMember({"uniform", "clamped"}))
      ->capture_default_str();
  fit->add_option("--penalty-order", config.penalty_order, "difference penalty order")
      ->capture_default_str();
  auto* lambda_opt = fit->add_option("--lambda", lambda, "fixed smoothing parameter");
  fit->add_option("--lambda-grid", grid, "log grid lo:hi:count")->excludes(lambda_opt);
  fit->add_option("--criterion", criterion, "lambda selection criterion")
      ->check(CLI::IsMember({"cv", "gcv"}))
      ->capture_default_str();
  fit->add_option("--q", config.q, "retained components")->capture_default_str();
  fit->add_flag("--log-current", config.log_current, "model log current");
  fit->add_option("--seed", config.seed, "bootstrap seed")->capture_default_str();
  fit->add_option("--bootstrap-ks", config.bootstrap_resamples,
                  "parametric bootstrap resamples for the KS p-value");
  fit->add_flag("--stamp-time", config.stamp_time, "record the wall-clock time in provenance");

  auto* sim = app.add_subcommand("simulate", "draw curves from a model");
  sim->add_option("model", model_path, "model file")->required();
  sim->add_option("-n,--count", n, "number of curves")->required();
  sim->add_option("--seed", seed, "random seed")->capture_default_str();
  sim->add_option("-o,--output", out_path, "dataset CSV to write")->required();

  auto* val = app.add_subcommand("validate", "check a dataset against a model");
  val->add_option("input", input, "dataset CSV")->required();
  val->add_option("-m,--model", model_path, "model file")->required();
  val->add_option("-o,--output", out_path, "per-curve diagnostics CSV");

  auto* rep = app.add_subcommand("report", "write report series for a model and dataset");
  rep->add_option("input", input, "dataset CSV")->required();
  rep->add_option("-m,--model", model_path, "model file")->required();
  rep->add_option("-o,--output", report_dir, "report directory")->required();

  auto* gen = app.add_subcommand("generate", "synthetic dataset from a generator config");
  gen->add_option("config", config_path, "key = value generator config")->required();
  gen->add_option("-o,--output", out_path, "dataset CSV to write")->required();
  gen->add_option("--seed", seed, "override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fit) {
      if (*lambda_opt) config.lambda = lambda;
      if (!grid.empty()) parse_grid(grid, config);
      config.criterion = parse_criterion(criterion);
      config.extension = parse_knot_extension(extension);
      const auto out = cmd_fit(input, config,
                               model_path.empty() ? std::nullopt : std::optional<fs::path>(model_path),
                               report_dir.empty() ? std::nullopt : std::optional<fs::path>(report_dir));
      print_fit(out);
    } else if (*sim) {
      cmd_simulate(model_path, n, seed, out_path);
    } else if (*val) {
      const auto report = cmd_validate(
          input, model_path, out_path.empty() ? std::nullopt : std::optional<fs::path>(out_path));
      print_validation(report);
    } else if (*rep) {
      cmd_report(model_path, input, report_dir);
    } else if (*gen) {
      GeneratorConfig gc = load_generator_config(config_path);
      if (gen->count("--seed") > 0) gc.seed = seed;
      save_dataset(out_path, generate_dataset(gc));
    }
  } catch (const Error& e) {
    std::cerr << "rramfda: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "rramfda: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kIo);
  } catch (const std::exception& e) {
    std::cerr << "rramfda: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kNumeric);
  }
  return 0;
}
