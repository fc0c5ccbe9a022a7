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

#include <zlib.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rramfda/curves.hpp"
#include "rramfda/error.hpp"

using namespace rramfda;

namespace {

RawDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in, "test");
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("rramfda_test_" + name);
}

}  // namespace

TEST_CASE("two cycles of three points") {
  const RawDataset d = parse(
      "cycle_id,voltage_V,current_A\n"
      "2,0.003,3e-3\n1,0.001,1e-3\n1,0.002,2e-3\n1,0.003,2.5e-3\n2,0.001,1e-3\n2,0.002,2e-3\n");
  REQUIRE(d.curves.size() == 2);
  CHECK(d.curves[0].cycle_id == 1);
  CHECK(d.curves[1].cycle_id == 2);
  CHECK(d.curves[0].size() == 3);
  CHECK(d.curves[1].size() == 3);
  CHECK(d.curves[1].voltages == std::vector<double>{0.001, 0.002, 0.003});
  CHECK(d.curves[1].v_reset == 0.003);
  CHECK(d.curves[0].currents[2] == 2.5e-3);
}

TEST_CASE("malformed input") {
  auto message = [](const std::string& text) {
    try {
      parse(text);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kData);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string dup = message("cycle_id,voltage_V,current_A\n7,0.001,1\n7,0.001,2\n");
  CHECK(dup.find("cycle 7") != std::string::npos);
  CHECK(message("").find("empty") != std::string::npos);
  CHECK(message("a,b,c\n1,2,3\n").find("header") != std::string::npos);
  CHECK(message("cycle_id,voltage_V,current_A\n").find("no data") != std::string::npos);
  CHECK(message("cycle_id,voltage_V,current_A\n1,0.1\n").find("test:2") != std::string::npos);
  CHECK(message("cycle_id,voltage_V,current_A\n1,x,2\n").find("malformed") != std::string::npos);
  CHECK(message("cycle_id,voltage_V,current_A\n1,0.1,nan\n").find("non-finite") != std::string::npos);
}

TEST_CASE("comment lines and CRLF") {
  const RawDataset d = parse("# measured\ncycle_id,voltage_V,current_A\r\n5,0.1,1\r\n5,0.2,2\r\n");
  REQUIRE(d.curves.size() == 1);
  CHECK(d.curves[0].currents == std::vector<double>{1.0, 2.0});
}

TEST_CASE("write and parse round trip") {
  RawDataset d;
  d.curves.push_back({3, {0.001, 0.002}, {1.0 / 3.0, 2e-300}, 0.002});
  d.curves.push_back({9, {0.1}, {-std::exp(1.0)}, 0.1});
  std::ostringstream out;
  write_dataset(out, d);
  RawDataset back = parse(out.str());
  back.metadata.clear();
  CHECK(back == d);

  const auto path = temp_path("roundtrip.csv");
  save_dataset(path, d);
  RawDataset loaded = load_dataset(path);
  loaded.metadata.clear();
  CHECK(loaded == d);
  std::filesystem::remove(path);
}

TEST_CASE("gzip input") {
  const std::string text = "cycle_id,voltage_V,current_A\n1,0.5,2\n1,1.0,4\n";
  const auto path = temp_path("data.csv.gz");
  gzFile gz = gzopen(path.c_str(), "wb");
  REQUIRE(gz != nullptr);
  gzwrite(gz, text.data(), static_cast<unsigned>(text.size()));
  gzclose(gz);
  const RawDataset d = load_dataset(path);
  REQUIRE(d.curves.size() == 1);
  CHECK(d.curves[0].currents == std::vector<double>{2.0, 4.0});
  std::filesystem::remove(path);
}

TEST_CASE("missing file") {
  try {
    load_dataset(temp_path("does_not_exist.csv"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
    CHECK(e.exit_code() == 2);
  }
}

TEST_CASE("registration") {
  RawCurve c{1, {0.65, 1.3}, {1.0, 2.0}, 1.3};
  const RegisteredCurve r = register_curve(c);
  CHECK(r.args[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.args[1] == 1.0);

  const int k = 601;
  RawCurve g{2, {}, {}, k * 1e-3};
  for (int j = 1; j <= k; ++j) {
    g.voltages.push_back(j * 1e-3);
    g.currents.push_back(j);
  }
  const RegisteredCurve rg = register_curve(g);
  for (int j = 1; j <= k; ++j) {
    CHECK(std::abs(rg.args[j - 1] - static_cast<double>(j) / k) <= 1e-15);
    CHECK(std::abs(rg.args[j - 1] * g.v_reset - g.voltages[j - 1]) <= 1e-15);
  }

  RawCurve bad{4, {-0.1}, {1.0}, -0.1};
  CHECK_THROWS_AS(register_curve(bad), Error);
}

TEST_CASE("unregistered evaluation") {
  auto model = [](double u) { return u; };
  CHECK(unregister_eval(model, 0.8, 0.0) == 0.0);
  CHECK(unregister_eval(model, 0.8, 0.8) == 1.0);
  CHECK(unregister_eval(model, 0.8, 0.4) == doctest::Approx(0.5));
  CHECK_THROWS_AS(unregister_eval(model, 0.8, 0.9), Error);
}

TEST_CASE("current transform") {
  RawDataset d;
  d.curves.push_back({1, {0.5, 1.0}, {std::exp(1.0), std::exp(2.0)}, 1.0});
  std::vector<RegisteredCurve> r = register_all(d);
  transform_currents(r, [](double i) { return std::log(i); });
  CHECK(r[0].currents[0] == doctest::Approx(1.0));
  CHECK(r[0].currents[1] == doctest::Approx(2.0));
  CHECK_THROWS_AS(transform_currents(r, [](double) { return std::nan(""); }), Error);
}
