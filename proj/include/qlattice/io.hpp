// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#pragma once

// Config parsing, signal catalog and file formats for the command-line tool.
// Needs nlohmann/json (json.hpp) on the include path.

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qlattice/errors.hpp"
#include "qlattice/recon.hpp"
#include "qlattice/signal.hpp"

namespace qlattice::io {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kTableFormat = "qlattice-gamma-table";
inline constexpr int kTableFormatVersion = 1;

/// Malformed or inconsistent input; maps to exit code 2.
class ConfigError : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

// ---------------------------------------------------------------------------
// Schema helpers
// ---------------------------------------------------------------------------

inline void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
}

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require_object(j, where);
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

inline double get_number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(where + "." + key + ": must be finite");
  return d;
}

inline double get_number_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? get_number(j, key, where) : fallback;
}

inline int get_int(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  return v.get<int>();
}

inline std::string get_string(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing \"" + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

/// A complex number given as a number or a [re, im] pair.
inline std::complex<double> get_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError(where + ": expected a number or a [re, im] pair");
}

// ---------------------------------------------------------------------------
// Signals
// ---------------------------------------------------------------------------

/// Callback signals available from configs, each with its decay metadata.
///   gaussian       amplitude e^{-(x-center)^2/4 + i modulation x}, sampled
///   wide_gaussian  e^{-beta x^2}
///   sech           sech(x / width)
///   lorentzian     1 / (1 + (x / width)^2)
/// A decay override replaces the catalog bound; it must still hold.
inline SignalModel catalog_signal(const std::string& name, const json& params, const std::string& where,
                                  std::optional<DecayBound> decay = std::nullopt) {
  if (name == "gaussian") {
    reject_unknown_keys(params, {"amplitude", "center", "modulation"}, where);
    const auto a = params.contains("amplitude") ? get_complex(params.at("amplitude"), where + ".amplitude")
                                                : std::complex<double>(1.0, 0.0);
    const double c = get_number_or(params, "center", 0.0, where);
    const double b = get_number_or(params, "modulation", 0.0, where);
    const SignalModel g = SignalModel::gaussian(a, c, b);
    return SignalModel::callback([g](double x) { return g(x); }, decay.value_or(DecayBound{std::max(std::abs(a), 1e-300), 0.0}),
                                 "gaussian");
  }
  if (name == "wide_gaussian") {
    reject_unknown_keys(params, {"beta"}, where);
    const double beta = get_number(params, "beta", where);
    if (!(beta > 0.0)) throw ConfigError(where + ".beta: must be positive");
    return SignalModel::callback([beta](double x) { return std::complex<double>(std::exp(-beta * x * x), 0.0); },
                                 decay.value_or(DecayBound{1.0, 0.0}), "wide_gaussian");
  }
  if (name == "sech") {
    reject_unknown_keys(params, {"width"}, where);
    const double w = get_number(params, "width", where);
    if (!(w > 0.0)) throw ConfigError(where + ".width: must be positive");
    return SignalModel::callback([w](double x) { return std::complex<double>(1.0 / std::cosh(x / w), 0.0); },
                                 decay.value_or(DecayBound{1.0, 0.0}), "sech");
  }
  if (name == "lorentzian") {
    reject_unknown_keys(params, {"width"}, where);
    const double w = get_number(params, "width", where);
    if (!(w > 0.0)) throw ConfigError(where + ".width: must be positive");
    return SignalModel::callback(
        [w](double x) {
          const double u = x / w;
          return std::complex<double>(1.0 / (1.0 + u * u), 0.0);
        },
        decay.value_or(DecayBound{1.0, 0.0}), "lorentzian");
  }
  throw ConfigError(where + ".name: unknown callback \"" + name + "\"");
}

inline SignalModel parse_signal(const json& j, const std::string& where = "signal") {
  require_object(j, where);
  const std::string kind = get_string(j, "kind", where);
  if (kind == "gaussian_family") {
    reject_unknown_keys(j, {"kind", "components"}, where);
    if (!j.contains("components") || !j.at("components").is_array() || j.at("components").empty()) {
      throw ConfigError(where + ".components: expected a non-empty array");
    }
    std::vector<GaussianComponent> comps;
    for (std::size_t i = 0; i < j.at("components").size(); ++i) {
      const auto& c = j.at("components")[i];
      const std::string w = where + ".components[" + std::to_string(i) + "]";
      reject_unknown_keys(c, {"amplitude", "center", "modulation"}, w);
      GaussianComponent g;
      g.amplitude = c.contains("amplitude") ? get_complex(c.at("amplitude"), w + ".amplitude") : g.amplitude;
      g.center = get_number_or(c, "center", 0.0, w);
      g.modulation = get_number_or(c, "modulation", 0.0, w);
      comps.push_back(g);
    }
    SignalModel s = SignalModel::gaussian_family(std::move(comps));
    s.set_label("gaussian_family");
    return s;
  }
  if (kind == "callback") {
    reject_unknown_keys(j, {"kind", "name", "params", "decay"}, where);
    const std::string name = get_string(j, "name", where);
    const json params = j.contains("params") ? j.at("params") : json::object();
    std::optional<DecayBound> decay;
    if (j.contains("decay")) {
      const auto& d = j.at("decay");
      reject_unknown_keys(d, {"C", "alpha"}, where + ".decay");
      decay = DecayBound{get_number(d, "C", where + ".decay"), get_number_or(d, "alpha", 0.0, where + ".decay")};
    }
    return catalog_signal(name, params, where + ".params", decay);
  }
  throw ConfigError(where + ".kind: expected \"gaussian_family\" or \"callback\"");
}

// ---------------------------------------------------------------------------
// Experiment config
// ---------------------------------------------------------------------------

struct OutputSpec {
  std::string format = "csv";
  std::optional<std::string> path;
};

struct ExperimentConfig {
  std::optional<double> tau;
  std::optional<SignalModel> signal;
  json signal_spec;  ///< as given, for table metadata
  std::optional<std::pair<int, int>> truncation;
  GridSpec grid;
  double tol = 1e-8;
  ReconMode mode = ReconMode::direct;
  std::optional<std::pair<int, int>> m_range;
  std::optional<std::string> suite;
  std::vector<double> taus;
  QuadratureControl quad;
  int threads = 0;
  OutputSpec output;
};

inline GridSpec parse_grid(const json& j, const std::string& where = "grid") {
  require_object(j, where);
  GridSpec g;
  if (j.contains("points")) {
    reject_unknown_keys(j, {"points"}, where);
    if (!j.at("points").is_array()) throw ConfigError(where + ".points: expected an array");
    std::vector<double> pts;
    for (const auto& v : j.at("points")) {
      if (!v.is_number()) throw ConfigError(where + ".points: expected numbers");
      pts.push_back(v.get<double>());
    }
    g.points = std::move(pts);
    return g;
  }
  reject_unknown_keys(j, {"min", "max", "step"}, where);
  g.x_min = get_number(j, "min", where);
  g.x_max = get_number(j, "max", where);
  g.step = get_number(j, "step", where);
  if (!(g.x_min < g.x_max)) throw ConfigError(where + ": needs min < max");
  if (!(g.step > 0.0)) throw ConfigError(where + ".step: must be positive");
  return g;
}

inline ExperimentConfig parse_config(const json& j) {
  reject_unknown_keys(j, {"tau", "signal", "truncation", "grid", "tol", "mode", "m_range", "suite", "taus",
                          "quadrature", "threads", "output"},
                      "config");
  ExperimentConfig c;
  if (j.contains("tau")) {
    c.tau = get_number(j, "tau", "config");
    if (!(*c.tau > 0.0)) throw ConfigError("config.tau: must be positive");
  }
  if (j.contains("signal")) {
    c.signal = parse_signal(j.at("signal"));
    c.signal_spec = j.at("signal");
  }
  if (j.contains("truncation")) {
    const auto& t = j.at("truncation");
    if (t.is_string()) {
      if (t.get<std::string>() != "auto") throw ConfigError("config.truncation: expected \"auto\" or {M, K}");
    } else {
      reject_unknown_keys(t, {"M", "K"}, "config.truncation");
      const int M = get_int(t, "M", "config.truncation");
      const int K = get_int(t, "K", "config.truncation");
      if (M < 0 || K < 0) throw ConfigError("config.truncation: M and K must be non-negative");
      if (M > kMaxLatticeIndex) throw ConfigError("config.truncation.M: exceeds " + std::to_string(kMaxLatticeIndex));
      c.truncation = std::make_pair(M, K);
    }
  }
  if (j.contains("grid")) c.grid = parse_grid(j.at("grid"));
  if (j.contains("tol")) {
    c.tol = get_number(j, "tol", "config");
    if (!(c.tol > 0.0 && c.tol < 1.0)) throw ConfigError("config.tol: must lie in (0, 1)");
  }
  if (j.contains("mode")) {
    const std::string m = get_string(j, "mode", "config");
    if (m == "direct") {
      c.mode = ReconMode::direct;
    } else if (m == "fourier_grid") {
      c.mode = ReconMode::fourier_grid;
    } else {
      throw ConfigError("config.mode: expected \"direct\" or \"fourier_grid\"");
    }
  }
  if (j.contains("m_range")) {
    const auto& r = j.at("m_range");
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer()) {
      throw ConfigError("config.m_range: expected [m_min, m_max]");
    }
    c.m_range = std::make_pair(r[0].get<int>(), r[1].get<int>());
  }
  if (j.contains("suite")) c.suite = get_string(j, "suite", "config");
  if (j.contains("taus")) {
    if (!j.at("taus").is_array()) throw ConfigError("config.taus: expected an array");
    for (const auto& v : j.at("taus")) {
      if (!v.is_number() || !(v.get<double>() > 0.0)) throw ConfigError("config.taus: expected positive numbers");
      c.taus.push_back(v.get<double>());
    }
  }
  if (j.contains("quadrature")) {
    const auto& q = j.at("quadrature");
    reject_unknown_keys(q, {"tol", "max_refinements"}, "config.quadrature");
    c.quad.tol = get_number_or(q, "tol", c.quad.tol, "config.quadrature");
    if (q.contains("max_refinements")) c.quad.max_refinements = get_int(q, "max_refinements", "config.quadrature");
    if (!(c.quad.tol > 0.0 && c.quad.tol < 1.0)) throw ConfigError("config.quadrature.tol: must lie in (0, 1)");
    if (c.quad.max_refinements < 1) throw ConfigError("config.quadrature.max_refinements: must be positive");
  }
  if (j.contains("threads")) {
    c.threads = get_int(j, "threads", "config");
    if (c.threads < 0) throw ConfigError("config.threads: must be non-negative");
  }
  if (j.contains("output")) {
    const auto& o = j.at("output");
    reject_unknown_keys(o, {"format", "path"}, "config.output");
    if (o.contains("format")) {
      c.output.format = get_string(o, "format", "config.output");
      if (c.output.format != "csv" && c.output.format != "json") {
        throw ConfigError("config.output.format: expected \"csv\" or \"json\"");
      }
    }
    if (o.contains("path")) c.output.path = get_string(o, "path", "config.output");
  }
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

/// Round-trippable decimal form of a double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  return out + "\n";
}

/// Writes files only after all contents exist, each through a temporary
/// sibling and a rename, so failures leave no truncated outputs.
inline void write_files_atomically(const std::vector<std::pair<std::string, std::string>>& files) {
  namespace fs = std::filesystem;
  std::vector<std::pair<fs::path, fs::path>> staged;
  auto cleanup = [&] {
    std::error_code ec;
    for (const auto& [tmp, _] : staged) fs::remove(tmp, ec);
  };
  for (const auto& [path, content] : files) {
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp-qlattice";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      cleanup();
      throw ConfigError("cannot write " + path);
    }
    staged.emplace_back(tmp, target);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      throw ConfigError("cannot write " + path);
    }
  }
  for (const auto& [tmp, target] : staged) fs::rename(tmp, target);
}

// ---------------------------------------------------------------------------
// Gamma table files
// ---------------------------------------------------------------------------

inline json table_to_json(const GammaTable& t, const json& signal_spec) {
  json j;
  j["format"] = kTableFormat;
  j["format_version"] = kTableFormatVersion;
  j["tool_version"] = kToolVersion;
  j["tau"] = t.tau();
  j["M"] = t.M();
  j["K"] = t.K();
  j["signal"] = signal_spec;
  std::vector<int> ms, ks;
  std::vector<double> re, im;
  std::vector<long long> ex;
  for (int m = -t.M(); m <= t.M(); ++m) {
    for (int k = -t.K(); k <= t.K(); ++k) {
      const auto& v = t.at(m, k);
      ms.push_back(m);
      ks.push_back(k);
      re.push_back(v.mantissa().real());
      im.push_back(v.mantissa().imag());
      ex.push_back(v.exponent());
    }
  }
  j["m"] = ms;
  j["k"] = ks;
  j["mantissa_re"] = re;
  j["mantissa_im"] = im;
  j["exponent"] = ex;
  return j;
}

struct TableFile {
  GammaTable table;
  json signal_spec;
};

inline TableFile table_from_json(const json& j) {
  reject_unknown_keys(j, {"format", "format_version", "tool_version", "tau", "M", "K", "signal", "m", "k",
                          "mantissa_re", "mantissa_im", "exponent"},
                      "table");
  if (get_string(j, "format", "table") != kTableFormat) throw ConfigError("table: not a gamma table file");
  if (get_int(j, "format_version", "table") != kTableFormatVersion) throw ConfigError("table: unsupported version");
  const double tau = get_number(j, "tau", "table");
  const int M = get_int(j, "M", "table");
  const int K = get_int(j, "K", "table");
  if (!(tau > 0.0) || M < 0 || K < 0) throw ConfigError("table: invalid tau, M or K");
  const std::size_t n = static_cast<std::size_t>(2 * M + 1) * static_cast<std::size_t>(2 * K + 1);
  for (const char* key : {"m", "k", "mantissa_re", "mantissa_im", "exponent"}) {
    if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != n) {
      throw ConfigError(std::string("table.") + key + ": expected an array of " + std::to_string(n) + " entries");
    }
  }
  TableFile f{GammaTable(M, K, tau), j.contains("signal") ? j.at("signal") : json()};
  std::size_t i = 0;
  for (int m = -M; m <= M; ++m) {
    for (int k = -K; k <= K; ++k, ++i) {
      if (j["m"][i].get<int>() != m || j["k"][i].get<int>() != k) throw ConfigError("table: entries out of order");
      const auto& re = j["mantissa_re"][i];
      const auto& im = j["mantissa_im"][i];
      const auto& ex = j["exponent"][i];
      if (!re.is_number() || !im.is_number() || !ex.is_number_integer()) throw ConfigError("table: malformed entry");
      f.table.at(m, k) = ScaledValue::from_parts({re.get<double>(), im.get<double>()}, ex.get<long long>());
    }
  }
  return f;
}

inline TableFile read_table(const std::string& path) { return table_from_json(read_json_file(path)); }

}  // namespace qlattice::io
