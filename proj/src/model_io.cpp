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

#include "rramfda/model_io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "rramfda/curves.hpp"
#include "rramfda/error.hpp"

namespace rramfda {

namespace {

using nlohmann::ordered_json;

ordered_json to_json(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

ordered_json to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  return rows;
}

Eigen::VectorXd vector_from(const ordered_json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::MatrixXd matrix_from(const ordered_json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row = j.at(r).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw SchemaError("weight function " + std::to_string(r) + " has " +
                        std::to_string(row.size()) + " coefficients, basis dimension is " +
                        std::to_string(cols));
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

}  // namespace

BasisSpec ModelFile::basis() const {
  return BasisSpec(KnotVector(breakpoints, degree, extension));
}

FpcaModel to_fpca(const ModelFile& model) {
  const BasisSpec spec = model.basis();
  const Eigen::Index p = spec.dimension();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < model.q(); ++j) {
    const Eigen::VectorXd b = model.weight_coefs.row(j).transpose();
    cov += model.eigenvalues(j) * b * b.transpose();
  }
  return FpcaModel{spec,
                   gram_matrix(spec),
                   model.mean_coefs,
                   model.eigenvalues,
                   model.weight_coefs,
                   Eigen::MatrixXd(0, model.q()),
                   cov,
                   model.total_variance};
}

std::string serialize_model(const ModelFile& m) {
  ordered_json j;
  j["format_version"] = m.format_version;
  j["basis"] = {{"kind", "bspline"},
                {"degree", m.degree},
                {"extension", to_string(m.extension)},
                {"domain", {0.0, 1.0}},
                {"breakpoints", m.breakpoints}};
  j["smoothing"] = {{"lambda", m.lambda},
                    {"penalty_order", m.penalty_order},
                    {"lambda_source", m.lambda_source},
                    {"log_current", m.log_current}};
  j["n_curves"] = m.n_curves;
  j["mean_coefs"] = to_json(m.mean_coefs);
  j["eigenvalues"] = to_json(m.eigenvalues);
  j["total_variance"] = m.total_variance;
  j["weight_coefs"] = to_json(m.weight_coefs);
  ordered_json summary = ordered_json::array();
  for (const ScoreSummary& s : m.score_summary) {
    summary.push_back({{"mean", s.mean}, {"sd", s.sd}, {"min", s.min}, {"max", s.max}});
  }
  j["score_summary"] = summary;
  const ScoreDistribution& d = m.score_distribution;
  ordered_json dist = {{"family", "gumbel"},
                       {"transform", d.transform},
                       {"mu", d.mu},
                       {"beta", d.beta},
                       {"ks_statistic", d.ks_statistic},
                       {"ks_pvalue", d.ks_pvalue},
                       {"n", d.n}};
  dist["bootstrap_pvalue"] =
      d.bootstrap_pvalue ? ordered_json(*d.bootstrap_pvalue) : ordered_json(nullptr);
  j["score_distribution"] = dist;
  ordered_json comps = ordered_json::array();
  for (const ComparatorFit& c : m.comparators) {
    ordered_json params = ordered_json::object();
    for (const auto& [name, value] : c.params) params[name] = value;
    comps.push_back({{"family", c.family},
                     {"params", params},
                     {"ks_statistic", c.ks.statistic},
                     {"ks_pvalue", c.ks.pvalue}});
  }
  j["comparators"] = comps;
  j["vreset_quantiles"] = m.vreset_quantiles;
  j["voltage_step"] = m.voltage_step;
  j["provenance"] = {{"input_hash", m.provenance.input_hash},
                     {"timestamp", m.provenance.timestamp},
                     {"tool_version", m.provenance.tool_version}};
  return j.dump(2) + "\n";
}

ModelFile parse_model(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw IoError(std::string("model file is not valid JSON: ") + e.what());
  }
  ModelFile m;
  try {
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kModelFormatVersion) {
      throw SchemaError("model format_version " + std::to_string(m.format_version) +
                        " is not supported (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    const auto& basis = j.at("basis");
    if (basis.at("kind").get<std::string>() != "bspline") {
      throw SchemaError("unsupported basis kind '" + basis.at("kind").get<std::string>() + "'");
    }
    m.degree = basis.at("degree").get<int>();
    m.breakpoints = basis.at("breakpoints").get<std::vector<double>>();
    try {
      m.extension = parse_knot_extension(basis.at("extension").get<std::string>());
    } catch (const Error& e) {
      throw SchemaError(e.what());
    }
    const auto& sm = j.at("smoothing");
    m.lambda = sm.at("lambda").get<double>();
    m.penalty_order = sm.at("penalty_order").get<int>();
    m.lambda_source = sm.at("lambda_source").get<std::string>();
    m.log_current = sm.at("log_current").get<bool>();
    m.n_curves = j.at("n_curves").get<int>();
    m.mean_coefs = vector_from(j.at("mean_coefs"));
    m.eigenvalues = vector_from(j.at("eigenvalues"));
    m.total_variance = j.at("total_variance").get<double>();

    BasisSpec spec = [&] {
      try {
        return m.basis();
      } catch (const Error& e) {
        throw SchemaError(std::string("model basis is invalid: ") + e.what());
      }
    }();
    const Eigen::Index p = spec.dimension();
    if (m.mean_coefs.size() != p) {
      throw SchemaError("mean function has " + std::to_string(m.mean_coefs.size()) +
                        " coefficients, basis dimension is " + std::to_string(p));
    }
    m.weight_coefs = matrix_from(j.at("weight_coefs"), p);
    if (m.weight_coefs.rows() != m.eigenvalues.size()) {
      throw SchemaError("eigenvalue count does not match the number of weight functions");
    }
    for (const auto& s : j.at("score_summary")) {
      m.score_summary.push_back({s.at("mean").get<double>(), s.at("sd").get<double>(),
                                 s.at("min").get<double>(), s.at("max").get<double>()});
    }
    const auto& d = j.at("score_distribution");
    if (d.at("family").get<std::string>() != "gumbel") {
      throw SchemaError("unsupported score distribution family");
    }
    m.score_distribution.transform = d.at("transform").get<std::string>();
    if (m.score_distribution.transform != kReciprocalShift) {
      throw SchemaError("unsupported score transform '" + m.score_distribution.transform + "'");
    }
    m.score_distribution.mu = d.at("mu").get<double>();
    m.score_distribution.beta = d.at("beta").get<double>();
    m.score_distribution.ks_statistic = d.at("ks_statistic").get<double>();
    m.score_distribution.ks_pvalue = d.at("ks_pvalue").get<double>();
    m.score_distribution.n = d.at("n").get<int>();
    if (!d.at("bootstrap_pvalue").is_null()) {
      m.score_distribution.bootstrap_pvalue = d.at("bootstrap_pvalue").get<double>();
    }
    for (const auto& c : j.at("comparators")) {
      ComparatorFit fit;
      fit.family = c.at("family").get<std::string>();
      for (const auto& [name, value] : c.at("params").items()) {
        fit.params.emplace_back(name, value.get<double>());
      }
      fit.ks = {c.at("ks_statistic").get<double>(), c.at("ks_pvalue").get<double>()};
      m.comparators.push_back(std::move(fit));
    }
    m.vreset_quantiles = j.at("vreset_quantiles").get<std::vector<double>>();
    m.voltage_step = j.at("voltage_step").get<double>();
    const auto& prov = j.at("provenance");
    m.provenance.input_hash = prov.at("input_hash").get<std::string>();
    m.provenance.timestamp = prov.at("timestamp").get<std::string>();
    m.provenance.tool_version = prov.at("tool_version").get<std::string>();
  } catch (const ordered_json::exception& e) {
    throw IoError(std::string("model file is incomplete or malformed: ") + e.what());
  }
  if (!(m.score_distribution.beta > 0.0)) throw SchemaError("Gumbel scale must be positive");
  if (m.vreset_quantiles.size() < 2) throw SchemaError("need at least 2 reset-voltage quantiles");
  if (!(m.voltage_step > 0.0)) throw SchemaError("voltage step must be positive");
  return m;
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_model(model);
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("model file " + path.string() + " not found");
  return parse_model(read_text_file(path));
}

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rramfda
