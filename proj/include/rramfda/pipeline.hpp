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

#ifndef RRAMFDA_PIPELINE_HPP_
#define RRAMFDA_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rramfda/curves.hpp"
#include "rramfda/distfit.hpp"
#include "rramfda/fpca.hpp"
#include "rramfda/model_io.hpp"
#include "rramfda/psmooth.hpp"

namespace rramfda {

struct FitConfig {
  int knots = 17;  // breakpoints on [0,1], endpoints included
  int degree = 3;
  KnotExtension extension = KnotExtension::kUniform;
  int penalty_order = 2;
  std::optional<double> lambda;  // skips selection when set
  double grid_lo = 1e-6;
  double grid_hi = 1e6;
  int grid_count = 41;
  Criterion criterion = Criterion::kCv;
  int q = 4;
  bool log_current = false;
  std::uint64_t seed = 0;       // bootstrap stream
  int bootstrap_resamples = 0;  // parametric-bootstrap KS when > 0
  bool stamp_time = false;      // record wall-clock time in provenance
};

/// Per-curve reconstruction quality. Scores are projections onto the
/// model's weight functions; rmse[q-1] compares the q-component
/// reconstruction with the observed (registered) samples.
struct CurveDiagnostics {
  CycleId cycle_id = 0;
  double v_reset = 0.0;
  std::vector<double> scores;
  std::vector<double> rmse;
};

struct FitOutputs {
  ModelFile model;
  FpcaModel fpca;
  std::optional<LambdaSelection> selection;
  std::vector<CurveDiagnostics> diagnostics;
  std::vector<double> first_scores;        // xi_1 per curve
  std::vector<double> transformed_scores;  // 1 / (xi_1 + 1)
};

/// register -> select lambda (unless fixed) -> fit_all -> fit_fpca ->
/// transform first scores -> Gumbel MLE -> KS.
FitOutputs fit_dataset(const RawDataset& data, const FitConfig& config,
                       const std::string& input_hash = "");

/// Registers, fits each curve with the model's smoothing setup, projects on
/// the model's first min(q, 2) components and measures the error.
std::vector<CurveDiagnostics> curve_diagnostics(const std::vector<RegisteredCurve>& curves,
                                                const ModelFile& model, const FpcaModel& view);

/// Registered curves in the model's current scale (log if requested).
std::vector<RegisteredCurve> prepare_curves(const RawDataset& data, bool log_current);

/// Loads the dataset, fits, and writes the model and report when paths are
/// given.
FitOutputs cmd_fit(const std::filesystem::path& input, const FitConfig& config,
                   const std::optional<std::filesystem::path>& model_out,
                   const std::optional<std::filesystem::path>& report_dir);

/// n curves from the one-component model: Gumbel scores, reset voltages by
/// inverse empirical CDF, noise-free reconstruction on the sampling grid.
RawDataset simulate_dataset(const ModelFile& model, int n, std::uint64_t seed);

void cmd_simulate(const std::filesystem::path& model_path, int n, std::uint64_t seed,
                  const std::filesystem::path& out);

struct ValidationReport {
  std::vector<CurveDiagnostics> curves;
  KsResult ks;
  bool accepted = false;  // KS at the 5% level
  double rmse_mean = 0.0;
  double rmse_median = 0.0;
  double rmse_max = 0.0;
};

/// Held-out check: q=1 reconstruction errors and KS of the transformed
/// first scores against the stored Gumbel (no refitting).
ValidationReport validate_dataset(const RawDataset& data, const ModelFile& model);

ValidationReport cmd_validate(const std::filesystem::path& input,
                              const std::filesystem::path& model_path,
                              const std::optional<std::filesystem::path>& out_csv);

}  // namespace rramfda

#endif  // RRAMFDA_PIPELINE_HPP_
