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

#include "rramfda/curves.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "rramfda/error.hpp"

namespace rramfda {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool parse_number(std::string_view field, T& value) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  return ec == std::errc() && ptr == end && !field.empty();
}

std::string location(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

struct Sample {
  double voltage;
  double current;
};

}  // namespace

RawDataset parse_dataset(std::istream& in, std::string_view source) {
  std::map<CycleId, std::vector<Sample>> groups;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    if (!have_header) {
      std::string header;
      for (char c : view) {
        if (c != ' ' && c != '\t') header.push_back(c);
      }
      if (header != kCsvHeader) {
        throw DataError(location(source, line_no) + ": expected header '" +
                        std::string(kCsvHeader) + "'");
      }
      have_header = true;
      continue;
    }
    const auto c1 = view.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : view.find(',', c1 + 1);
    if (c2 == std::string_view::npos || view.find(',', c2 + 1) != std::string_view::npos) {
      throw DataError(location(source, line_no) + ": expected 3 comma-separated fields");
    }
    CycleId id = 0;
    double v = 0.0;
    double i = 0.0;
    if (!parse_number(view.substr(0, c1), id) ||
        !parse_number(view.substr(c1 + 1, c2 - c1 - 1), v) ||
        !parse_number(view.substr(c2 + 1), i)) {
      throw DataError(location(source, line_no) + ": malformed row '" + std::string(view) + "'");
    }
    if (!std::isfinite(v) || !std::isfinite(i)) {
      throw DataError(location(source, line_no) + ": non-finite value");
    }
    groups[id].push_back({v, i});
  }
  if (in.bad()) throw IoError(std::string(source) + ": read failure");
  if (!have_header) throw DataError(std::string(source) + ": empty file");
  if (groups.empty()) throw DataError(std::string(source) + ": no data rows");

  RawDataset data;
  data.curves.reserve(groups.size());
  for (auto& [id, samples] : groups) {
    std::sort(samples.begin(), samples.end(),
              [](const Sample& a, const Sample& b) { return a.voltage < b.voltage; });
    RawCurve curve;
    curve.cycle_id = id;
    curve.voltages.reserve(samples.size());
    curve.currents.reserve(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (k > 0 && !(samples[k].voltage > samples[k - 1].voltage)) {
        throw DataError(std::string(source) + ": cycle " + std::to_string(id) +
                        " has duplicated voltage " + std::to_string(samples[k].voltage));
      }
      curve.voltages.push_back(samples[k].voltage);
      curve.currents.push_back(samples[k].current);
    }
    curve.v_reset = curve.voltages.back();
    data.curves.push_back(std::move(curve));
  }
  data.metadata["source"] = std::string(source);
  return data;
}

std::string read_text_file(const std::filesystem::path& path) {
  const std::string name = path.string();
  if (path.extension() == ".gz") {
    gzFile gz = gzopen(name.c_str(), "rb");
    if (gz == nullptr) throw IoError("cannot open " + name);
    std::string text;
    std::vector<char> buf(1 << 16);
    for (;;) {
      const int got = gzread(gz, buf.data(), static_cast<unsigned>(buf.size()));
      if (got < 0) {
        gzclose(gz);
        throw IoError("gzip decode failure in " + name);
      }
      if (got == 0) break;
      text.append(buf.data(), static_cast<std::size_t>(got));
    }
    gzclose(gz);
    return text;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on " + name);
  return ss.str();
}

RawDataset load_dataset(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  return parse_dataset(in, path.string());
}

void write_dataset(std::ostream& out, const RawDataset& data) {
  out << kCsvHeader << '\n';
  char buf[96];
  for (const RawCurve& c : data.curves) {
    for (std::size_t k = 0; k < c.voltages.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n", static_cast<long long>(c.cycle_id),
                    c.voltages[k], c.currents[k]);
      out << buf;
    }
  }
}

void save_dataset(const std::filesystem::path& path, const RawDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_dataset(out, data);
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

RegisteredCurve register_curve(const RawCurve& raw) {
  if (!(raw.v_reset > 0.0)) {
    throw DataError("cycle " + std::to_string(raw.cycle_id) + ": reset voltage must be positive");
  }
  if (raw.voltages.size() != raw.currents.size()) {
    throw DataError("cycle " + std::to_string(raw.cycle_id) + ": voltage/current length mismatch");
  }
  RegisteredCurve reg;
  reg.cycle_id = raw.cycle_id;
  reg.v_reset = raw.v_reset;
  reg.currents = raw.currents;
  reg.args.resize(raw.voltages.size());
  std::transform(raw.voltages.begin(), raw.voltages.end(), reg.args.begin(),
                 [&](double v) { return v / raw.v_reset; });
  return reg;
}

std::vector<RegisteredCurve> register_all(const RawDataset& data) {
  std::vector<RegisteredCurve> out;
  out.reserve(data.curves.size());
  for (const RawCurve& c : data.curves) out.push_back(register_curve(c));
  return out;
}

void transform_currents(std::vector<RegisteredCurve>& curves,
                        const std::function<double(double)>& f) {
  for (RegisteredCurve& c : curves) {
    for (double& i : c.currents) {
      const double y = f(i);
      if (!std::isfinite(y)) {
        throw DataError("cycle " + std::to_string(c.cycle_id) +
                        ": current transform produced a non-finite value");
      }
      i = y;
    }
  }
}

double unregister_eval(const std::function<double(double)>& registered_model, double v_reset,
                       double v) {
  if (!(v_reset > 0.0)) throw InvalidArgument("reset voltage must be positive");
  if (!(v >= 0.0 && v <= v_reset)) {
    throw InvalidArgument("voltage " + std::to_string(v) + " outside [0, v_reset]");
  }
  return registered_model(v / v_reset);
}

}  // namespace rramfda
