// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "qlattice/io.hpp"

namespace qlattice {
namespace {

namespace fs = std::filesystem;
using io::json;

json base_config() {
  return json::parse(R"({
    "tau": 1.0,
    "signal": {"kind": "gaussian_family", "components": [{"amplitude": [1, 0.5], "center": 0.2}]},
    "grid": {"min": -1, "max": 1, "step": 0.5}
  })");
}

TEST(Config, ParsesSampleConfigs) {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(QLATTICE_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW(io::load_config(entry.path().string())) << entry.path();
    ++seen;
  }
  EXPECT_GE(seen, 4);
}

TEST(Config, ComplexAmplitude) {
  const auto c = io::parse_config(base_config());
  ASSERT_TRUE(c.signal);
  EXPECT_EQ(c.signal->components().at(0).amplitude, std::complex<double>(1.0, 0.5));
  EXPECT_EQ(c.grid.expand().size(), 5u);
  EXPECT_FALSE(c.truncation);
}

TEST(Config, RejectsUnknownKeysAtEveryLevel) {
  for (const char* pointer : {"/extra", "/signal/extra", "/signal/components/0/extra", "/grid/extra"}) {
    json j = base_config();
    j[json::json_pointer(pointer)] = 1;
    EXPECT_THROW(io::parse_config(j), io::ConfigError) << pointer;
  }
}

TEST(Config, RejectsInvalidValues) {
  const char* patches[] = {
      R"({"tau": -1})",          R"({"tau": "one"})",        R"({"tol": 2})",
      R"({"truncation": "x"})",  R"({"truncation": {"M": -1, "K": 2}})",
      R"({"truncation": {"M": 65, "K": 2}})",                R"({"grid": {"min": 1, "max": 0, "step": 0.1}})",
      R"({"mode": "fast"})",     R"({"threads": -2})",       R"({"output": {"format": "xml"}})",
      R"({"signal": {"kind": "callback", "name": "nope"}})",
      R"({"signal": {"kind": "callback", "name": "sech", "params": {"width": 0}}})",
      R"({"signal": {"kind": "gaussian_family", "components": []}})",
  };
  for (const char* p : patches) {
    json j = base_config();
    j.merge_patch(json::parse(p));
    EXPECT_THROW(io::parse_config(j), InvalidParameter) << p;
  }
}

TEST(Config, CallbackCatalog) {
  for (const char* spec : {R"({"kind": "callback", "name": "wide_gaussian", "params": {"beta": 0.01}})",
                           R"({"kind": "callback", "name": "sech", "params": {"width": 2}})",
                           R"({"kind": "callback", "name": "lorentzian", "params": {"width": 1}})",
                           R"({"kind": "callback", "name": "gaussian", "params": {"center": 0.5}})"}) {
    const SignalModel s = io::parse_signal(json::parse(spec));
    EXPECT_EQ(s.kind(), SignalKind::callback) << spec;
    EXPECT_TRUE(s.envelope()) << spec;
  }
  const SignalModel g = io::parse_signal(json::parse(R"({"kind": "callback", "name": "gaussian"})"));
  EXPECT_NEAR(g(0.0).real(), 1.0, 1e-15);
  const SignalModel d = io::parse_signal(
      json::parse(R"({"kind": "callback", "name": "sech", "params": {"width": 1}, "decay": {"C": 2, "alpha": 1}})"));
  EXPECT_EQ(d.envelope()->C, 2.0);
  EXPECT_EQ(d.envelope()->alpha, 1.0);
}

TEST(Csv, QuotingAndNumbers) {
  EXPECT_EQ(io::csv_field("plain"), "plain");
  EXPECT_EQ(io::csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(io::csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(io::csv_row({"1", "x,y"}), "1,\"x,y\"\n");
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(io::format_double(v)), v);
}

TEST(Table, JsonRoundTripIsBitExact) {
  const SignalModel s =
      SignalModel::callback([](double x) { return std::complex<double>(1.0 / std::cosh(x), 0.1 * std::tanh(x)); },
                            DecayBound{1.1, 0.0});
  const GammaTable t = forward_table(s, 0.7, 6, 5);
  const json spec = {{"kind", "callback"}, {"name", "sech"}};
  const std::string text = io::table_to_json(t, spec).dump();
  const io::TableFile back = io::table_from_json(json::parse(text));
  EXPECT_TRUE(back.table == t);
  EXPECT_EQ(back.signal_spec, spec);
  for (std::size_t i = 0; i < t.values().size(); ++i) {
    const auto& a = t.values()[i];
    const auto& b = back.table.values()[i];
    EXPECT_EQ(std::signbit(a.mantissa().real()), std::signbit(b.mantissa().real()));
    EXPECT_EQ(std::signbit(a.mantissa().imag()), std::signbit(b.mantissa().imag()));
  }
  EXPECT_EQ(io::table_to_json(back.table, spec).dump(), text);
}

TEST(Table, RejectsMalformedFiles) {
  const GammaTable t = forward_table(SignalModel::gaussian(), 1.0, 1, 1);
  const json good = io::table_to_json(t, json::object());
  {
    json j = good;
    j["m"].erase(0);
    EXPECT_THROW(io::table_from_json(j), io::ConfigError);
  }
  {
    json j = good;
    std::swap(j["k"][0], j["k"][1]);
    EXPECT_THROW(io::table_from_json(j), io::ConfigError);
  }
  {
    json j = good;
    j["format"] = "other";
    EXPECT_THROW(io::table_from_json(j), io::ConfigError);
  }
  {
    json j = good;
    j["surprise"] = true;
    EXPECT_THROW(io::table_from_json(j), io::ConfigError);
  }
}

TEST(Files, AtomicWritesLeaveNothingOnFailure) {
  const fs::path dir = fs::temp_directory_path() / "qlattice_io_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string ok = (dir / "a.txt").string();
  const std::string bad = (dir / "missing" / "b.txt").string();
  EXPECT_THROW(io::write_files_atomically({{ok, "alpha"}, {bad, "beta"}}), io::ConfigError);
  EXPECT_TRUE(fs::is_empty(dir));
  io::write_files_atomically({{ok, "alpha"}});
  std::ifstream in(ok);
  std::string content;
  in >> content;
  EXPECT_EQ(content, "alpha");
  fs::remove_all(dir);
}

}  // namespace
}  // namespace qlattice
