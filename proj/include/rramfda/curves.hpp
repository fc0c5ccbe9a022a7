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

#ifndef RRAMFDA_CURVES_HPP_
#define RRAMFDA_CURVES_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace rramfda {

using CycleId = std::int64_t;

/// One measured reset cycle on [0, v_reset]; the final sample is the reset
/// point.
struct RawCurve {
  CycleId cycle_id = 0;
  std::vector<double> voltages;  // volts, strictly increasing
  std::vector<double> currents;  // amperes
  double v_reset = 0.0;          // volts, == voltages.back()

  int size() const { return static_cast<int>(voltages.size()); }
  bool operator==(const RawCurve&) const = default;
};

/// A curve mapped onto [0,1] by u = v / v_reset.
struct RegisteredCurve {
  CycleId cycle_id = 0;
  std::vector<double> args;
  std::vector<double> currents;
  double v_reset = 0.0;

  int size() const { return static_cast<int>(args.size()); }
};

struct RawDataset {
  std::vector<RawCurve> curves;
  std::map<std::string, std::string> metadata;

  bool operator==(const RawDataset&) const = default;
};

inline constexpr std::string_view kCsvHeader = "cycle_id,voltage_V,current_A";

/// Parses the long CSV format: header `cycle_id,voltage_V,current_A`, one
/// sample per row, rows of a cycle in any order. Lines starting with '#'
/// are comments. Curves come back sorted by cycle_id, each sorted by
/// voltage, with v_reset set to the largest voltage.
RawDataset parse_dataset(std::istream& in, std::string_view source = "<stream>");

/// Reads a dataset file; a `.gz` extension selects gzip decompression.
RawDataset load_dataset(const std::filesystem::path& path);

/// Writes the long CSV format with 17 significant digits.
void write_dataset(std::ostream& out, const RawDataset& data);
void save_dataset(const std::filesystem::path& path, const RawDataset& data);

/// Reads a whole file (gzip-aware) into memory.
std::string read_text_file(const std::filesystem::path& path);

RegisteredCurve register_curve(const RawCurve& raw);
std::vector<RegisteredCurve> register_all(const RawDataset& data);

/// Applies an element-wise transform to the currents (e.g. log scale).
void transform_currents(std::vector<RegisteredCurve>& curves,
                        const std::function<double(double)>& f);

/// I(v) = I*(v / v_reset) for a model I* defined on [0,1].
double unregister_eval(const std::function<double(double)>& registered_model, double v_reset,
                       double v);

}  // namespace rramfda

#endif  // RRAMFDA_CURVES_HPP_
