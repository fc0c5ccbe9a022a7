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

#include "rramfda/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rramfda/error.hpp"

namespace rramfda {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot write " + path.string());
    row(header);
  }
  ~CsvWriter() = default;

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  void close() {
    out_.flush();
    if (!out_) throw IoError("write failure on " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

void write_histogram(const std::vector<HistogramBin>& bins, const std::filesystem::path& path) {
  CsvWriter w(path, {"bin_lo", "bin_hi", "count"});
  for (const HistogramBin& b : bins) w.row({num(b.lo), num(b.hi), std::to_string(b.count)});
  w.close();
}

}  // namespace

std::vector<HistogramBin> histogram(std::span<const double> values, int bins) {
  if (bins < 1) throw InvalidArgument("histogram needs at least one bin");
  if (values.empty()) return {};
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  double lo = *mn;
  double hi = *mx;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  const double width = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    out[static_cast<std::size_t>(b)].lo = lo + width * b;
    out[static_cast<std::size_t>(b)].hi = b + 1 == bins ? hi : lo + width * (b + 1);
  }
  for (double v : values) {
    int b = static_cast<int>((v - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    ++out[static_cast<std::size_t>(b)].count;
  }
  return out;
}

ReportBundle build_report(const FitOutputs& fit, int grid_points) {
  if (grid_points < 2) throw InvalidArgument("report grid needs at least 2 points");
  ReportBundle r;
  const FpcaModel& fpca = fit.fpca;
  r.variance = explained_variance(fpca, fpca.q_max());
  r.grid.resize(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) {
    r.grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / (grid_points - 1);
  }
  r.weights.assign(static_cast<std::size_t>(fpca.q_max()), {});
  for (double u : r.grid) {
    r.mean.push_back(eval_mean(fpca, u));
    r.sd.push_back(std::sqrt(std::max(eval_covariance(fpca, u, u), 0.0)));
    for (int j = 0; j < fpca.q_max(); ++j) {
      r.weights[static_cast<std::size_t>(j)].push_back(eval_weight(fpca, j, u));
    }
  }
  r.diagnostics = fit.diagnostics;
  const int n = static_cast<int>(fit.first_scores.size());
  const int bins = std::clamp(static_cast<int>(std::ceil(std::sqrt(n))), 5, 50);
  r.score_histogram = histogram(fit.first_scores, bins);
  r.transformed_histogram = histogram(fit.transformed_scores, bins);

  r.distribution = fit.model.score_distribution;
  r.comparators = fit.model.comparators;
  const double mu = r.distribution.mu;
  const double beta = r.distribution.beta;
  const double lo = gumbel_quantile(1e-3, mu, beta);
  const double hi = gumbel_quantile(1.0 - 1e-3, mu, beta);
  constexpr int kDensityPoints = 201;
  for (int i = 0; i < kDensityPoints; ++i) {
    const double x = lo + (hi - lo) * i / (kDensityPoints - 1);
    r.density_x.push_back(x);
    r.density.push_back(gumbel_pdf(x, mu, beta));
  }
  r.selection = fit.selection;
  return r;
}

void write_diagnostics(const std::vector<CurveDiagnostics>& diagnostics,
                       const std::filesystem::path& path) {
  const std::size_t q = diagnostics.empty() ? 0 : diagnostics.front().rmse.size();
  std::vector<std::string> header = {"cycle_id", "v_reset"};
  for (std::size_t j = 0; j < q; ++j) header.push_back("score_" + std::to_string(j + 1));
  for (std::size_t j = 0; j < q; ++j) header.push_back("rmse_q" + std::to_string(j + 1));
  CsvWriter w(path, header);
  for (const CurveDiagnostics& d : diagnostics) {
    std::vector<std::string> cells = {std::to_string(d.cycle_id), num(d.v_reset)};
    for (std::size_t j = 0; j < q; ++j) cells.push_back(num(d.scores[j]));
    for (std::size_t j = 0; j < q; ++j) cells.push_back(num(d.rmse[j]));
    w.row(cells);
  }
  w.close();
}

void write_report(const ReportBundle& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create report directory " + dir.string());

  {
    CsvWriter w(dir / "variance.csv", {"component", "percent", "cumulative"});
    for (std::size_t j = 0; j < r.variance.percent.size(); ++j) {
      w.row({std::to_string(j + 1), num(r.variance.percent[j]), num(r.variance.cumulative[j])});
    }
    w.close();
  }
  {
    std::vector<std::string> header = {"u", "mean", "sd", "lower", "upper"};
    for (std::size_t j = 0; j < r.weights.size(); ++j) {
      header.push_back("weight_" + std::to_string(j + 1));
    }
    CsvWriter w(dir / "functions.csv", header);
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
      std::vector<std::string> cells = {num(r.grid[i]), num(r.mean[i]), num(r.sd[i]),
                                        num(r.mean[i] - 2.0 * r.sd[i]),
                                        num(r.mean[i] + 2.0 * r.sd[i])};
      for (const auto& series : r.weights) cells.push_back(num(series[i]));
      w.row(cells);
    }
    w.close();
  }
  write_diagnostics(r.diagnostics, dir / "reconstruction.csv");
  write_histogram(r.score_histogram, dir / "histogram_scores.csv");
  write_histogram(r.transformed_histogram, dir / "histogram_transformed.csv");
  {
    CsvWriter w(dir / "density.csv", {"y", "gumbel_pdf"});
    for (std::size_t i = 0; i < r.density.size(); ++i) {
      w.row({num(r.density_x[i]), num(r.density[i])});
    }
    w.close();
  }
  {
    CsvWriter w(dir / "distribution.csv",
                {"family", "param_1", "param_2", "ks_statistic", "ks_pvalue"});
    w.row({"gumbel", num(r.distribution.mu), num(r.distribution.beta),
           num(r.distribution.ks_statistic), num(r.distribution.ks_pvalue)});
    for (const ComparatorFit& c : r.comparators) {
      w.row({c.family, num(c.params.at(0).second), num(c.params.at(1).second),
             num(c.ks.statistic), num(c.ks.pvalue)});
    }
    w.close();
  }
  if (r.selection) {
    CsvWriter w(dir / "lambda_selection.csv", {"lambda", to_string(r.selection->criterion)});
    for (std::size_t i = 0; i < r.selection->grid.size(); ++i) {
      w.row({num(r.selection->grid[i]), num(r.selection->scores[i])});
    }
    w.close();
  }
}

std::vector<double> CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("no column '" + std::string(name) + "'");
  const auto c = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const std::string& cell = row.at(c);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      if (cell == "nan" || cell == "-nan") {
        v = std::nan("");
      } else {
        throw DataError("non-numeric cell '" + cell + "' in column '" + std::string(name) + "'");
      }
    }
    out.push_back(v);
  }
  return out;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty CSV");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw DataError(path.string() + ": row width does not match header");
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

ReportBundle report_from_model(const ModelFile& model, const RawDataset& data, int grid_points) {
  const ValidationReport v = validate_dataset(data, model);
  FitOutputs fit{model, to_fpca(model), std::nullopt, v.curves, {}, {}};
  for (const CurveDiagnostics& d : v.curves) fit.first_scores.push_back(d.scores.front());
  fit.transformed_scores = transform_scores(fit.first_scores);
  return build_report(fit, grid_points);
}

ReportBundle cmd_report(const std::filesystem::path& model_path,
                        const std::filesystem::path& input, const std::filesystem::path& dir) {
  const ModelFile model = load_model(model_path);
  ReportBundle report = report_from_model(model, load_dataset(input));
  write_report(report, dir);
  return report;
}

}  // namespace rramfda
