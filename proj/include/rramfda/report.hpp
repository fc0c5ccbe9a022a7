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

#ifndef RRAMFDA_REPORT_HPP_
#define RRAMFDA_REPORT_HPP_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rramfda/pipeline.hpp"

namespace rramfda {

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
};

/// Equal-width bins spanning [min, max]; the last bin is closed.
std::vector<HistogramBin> histogram(std::span<const double> values, int bins);

/// Data series behind the usual FPCA figures (mean with +-2 sd bands,
/// weight functions, reconstructions, score histograms, fitted density).
struct ReportBundle {
  VarianceTable variance;
  std::vector<double> grid;  // [0,1] inclusive
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<std::vector<double>> weights;  // one series per component
  std::vector<CurveDiagnostics> diagnostics;
  std::vector<HistogramBin> score_histogram;
  std::vector<HistogramBin> transformed_histogram;
  std::vector<double> density_x;
  std::vector<double> density;
  std::optional<LambdaSelection> selection;
  ScoreDistribution distribution;
  std::vector<ComparatorFit> comparators;
};

ReportBundle build_report(const FitOutputs& fit, int grid_points = 1001);

/// Writes variance.csv, functions.csv, reconstruction.csv,
/// histogram_scores.csv, histogram_transformed.csv, density.csv,
/// distribution.csv and (when lambda was selected) lambda_selection.csv.
void write_report(const ReportBundle& report, const std::filesystem::path& dir);

/// Per-curve diagnostics as CSV (shared by the fit report and validate).
void write_diagnostics(const std::vector<CurveDiagnostics>& diagnostics,
                       const std::filesystem::path& path);

/// Minimal reader for the CSV files emitted above.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::vector<double> column(std::string_view name) const;
};

CsvTable read_csv_table(const std::filesystem::path& path);

/// Report for a saved model, with per-curve errors and score histograms
/// taken from the given dataset.
ReportBundle report_from_model(const ModelFile& model, const RawDataset& data,
                               int grid_points = 1001);

ReportBundle cmd_report(const std::filesystem::path& model_path,
                        const std::filesystem::path& input, const std::filesystem::path& dir);

}  // namespace rramfda

#endif  // RRAMFDA_REPORT_HPP_
