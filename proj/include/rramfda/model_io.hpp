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

#ifndef RRAMFDA_MODEL_IO_HPP_
#define RRAMFDA_MODEL_IO_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rramfda/bspline.hpp"
#include "rramfda/distfit.hpp"
#include "rramfda/fpca.hpp"

namespace rramfda {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kToolVersion = "rramfda 1.0.0";

struct ScoreSummary {
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct Provenance {
  std::string input_hash;  // fnv1a64 of the input file bytes, hex
  std::string timestamp;   // empty unless requested; see README
  std::string tool_version = kToolVersion;
};

/// Everything needed to evaluate, simulate from and validate a fitted
/// model. Serialized as a versioned JSON document (docs/model_format.md).
struct ModelFile {
  int format_version = kModelFormatVersion;
  int degree = 3;
  KnotExtension extension = KnotExtension::kUniform;
  std::vector<double> breakpoints;
  double lambda = 0.0;
  int penalty_order = 2;
  std::string lambda_source;  // "cv", "gcv" or "fixed"
  bool log_current = false;
  int n_curves = 0;
  Eigen::VectorXd mean_coefs;
  Eigen::VectorXd eigenvalues;
  double total_variance = 0.0;
  Eigen::MatrixXd weight_coefs;  // q x p
  std::vector<ScoreSummary> score_summary;
  ScoreDistribution score_distribution;
  std::vector<ComparatorFit> comparators;
  std::vector<double> vreset_quantiles;  // at probabilities i / (size-1)
  double voltage_step = 1e-3;
  Provenance provenance;

  int q() const { return static_cast<int>(eigenvalues.size()); }
  BasisSpec basis() const;
};

/// Rebuilds an evaluable FPCA view (no per-curve scores) from a model file.
/// The coefficient covariance is the truncated sum of eigen-pairs.
FpcaModel to_fpca(const ModelFile& model);

std::string serialize_model(const ModelFile& model);

/// Throws IoError for unparsable or incomplete documents and SchemaError
/// for a format_version mismatch or inconsistent dimensions.
ModelFile parse_model(std::string_view text);

void save_model(const std::filesystem::path& path, const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);

/// FNV-1a 64-bit digest as 16 hex digits.
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace rramfda

#endif  // RRAMFDA_MODEL_IO_HPP_
