// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The qlattice Authors

#pragma once

// Command-line front end.  run() is the whole program minus main(), so tests
// can drive it in-process.  Needs CLI11 and nlohmann/json on the include path.

#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qlattice/errors.hpp"
#include "qlattice/io.hpp"
#include "qlattice/oracle.hpp"
#include "qlattice/qtheta.hpp"
#include "qlattice/recon.hpp"
#include "qlattice/signal.hpp"
#include "qlattice/sweep.hpp"
#include "qlattice/verify.hpp"

namespace qlattice::cli {

using json = nlohmann::json;

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kValidationError = 2, kNonConvergence = 3 };

struct Options {
  std::string config_path;
  std::string output;
  std::string summary;
  std::string format;
  std::string table;
  std::string suite;
  std::string taus;
  std::optional<double> tau;
  std::optional<double> tol;
  std::optional<int> threads;
  std::optional<int> m_min;
  std::optional<int> m_max;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline json scaled_json(const ScaledValue& v) {
  return {{"mantissa", {v.mantissa().real(), v.mantissa().imag()}}, {"exponent", v.exponent()}};
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::string optional_field(const std::optional<double>& v) { return v ? io::format_double(*v) : ""; }

inline json metadata(double elapsed) { return {{"elapsed_seconds", elapsed}, {"tool_version", io::kToolVersion}}; }

/// Merges flags over the config file; flags win.
struct Job {
  io::ExperimentConfig config;
  Options flags;

  double tau() const {
    if (flags.tau) return *flags.tau;
    if (config.tau) return *config.tau;
    throw io::ConfigError("tau is required (--tau or config \"tau\")");
  }
  std::optional<double> tau_if_given() const { return flags.tau ? flags.tau : config.tau; }
  double tol() const { return flags.tol.value_or(config.tol); }
  int threads() const { return flags.threads.value_or(config.threads); }
  std::string format(const char* fallback) const {
    if (!flags.format.empty()) return flags.format;
    return config.output.format.empty() ? fallback : config.output.format;
  }
  std::optional<std::string> output() const {
    if (!flags.output.empty()) return flags.output;
    return config.output.path;
  }
  const SignalModel& signal() const {
    if (!config.signal) throw io::ConfigError("config \"signal\" is required for this command");
    return *config.signal;
  }
};

inline Job make_job(const Options& flags) {
  Job job;
  job.flags = flags;
  if (!flags.config_path.empty()) job.config = io::load_config(flags.config_path);
  if (flags.tau && !(*flags.tau > 0.0 && std::isfinite(*flags.tau))) throw io::ConfigError("--tau must be positive");
  if (flags.tol && !(*flags.tol > 0.0 && *flags.tol < 1.0)) throw io::ConfigError("--tol must lie in (0, 1)");
  if (flags.threads && *flags.threads < 0) throw io::ConfigError("--threads must be non-negative");
  if (!flags.format.empty() && flags.format != "csv" && flags.format != "json") {
    throw io::ConfigError("--format must be csv or json");
  }
  return job;
}

/// Writes to the output path atomically, or to out when none is given.
inline void emit(const Job& job, const std::string& content, std::ostream& out) {
  if (const auto path = job.output()) {
    io::write_files_atomically({{*path, content}});
  } else {
    out << content;
  }
}

// ---------------------------------------------------------------------------

inline int cmd_coeffs(const Job& job, std::ostream& out) {
  const double tau = job.tau();
  int m_min = -4, m_max = 4;
  if (job.config.m_range) std::tie(m_min, m_max) = *job.config.m_range;
  if (job.flags.m_min) m_min = *job.flags.m_min;
  if (job.flags.m_max) m_max = *job.flags.m_max;
  if (m_min <= m_max && (std::abs(m_min) > kMaxLatticeIndex || std::abs(m_max) > kMaxLatticeIndex)) {
    throw io::ConfigError("m range exceeds |m| <= " + std::to_string(kMaxLatticeIndex));
  }
  const LatticeParams params = nome_from_tau(tau);

  json rows = json::array();
  std::vector<std::string> warnings;
  std::string csv = io::csv_row({"m", "mantissa_re", "mantissa_im", "exponent", "value_re", "value_im", "oracle_re",
                                 "oracle_im", "rel_diff", "warning"});
  for (int m = m_min; m <= m_max; ++m) {
    const Coefficient c = coeff_E(m, params);
    const ScaledValue oracle = laurent_c0_scaled<double>(m, params, default_contour(m, params));
    const double rel = std::exp((c.value - oracle).log_abs() - oracle.log_abs());
    std::optional<std::complex<double>> value, oracle_value;
    if (c.value.representable()) value = c.value.to_complex();
    if (oracle.representable()) oracle_value = oracle.to_complex();
    const std::string warning = c.warning.value_or("");
    if (c.warning && warnings.empty()) warnings.push_back(*c.warning);

    json row = {{"m", m}, {"E", scaled_json(c.value)}, {"oracle", scaled_json(oracle)}, {"rel_diff", rel}};
    row["value"] = value ? json{value->real(), value->imag()} : json(nullptr);
    row["oracle_value"] = oracle_value ? json{oracle_value->real(), oracle_value->imag()} : json(nullptr);
    rows.push_back(std::move(row));

    auto part = [](const std::optional<std::complex<double>>& v, bool re) {
      return v ? io::format_double(re ? v->real() : v->imag()) : std::string();
    };
    csv += io::csv_row({std::to_string(m), io::format_double(c.value.mantissa().real()),
                        io::format_double(c.value.mantissa().imag()), std::to_string(c.value.exponent()),
                        part(value, true), part(value, false), part(oracle_value, true), part(oracle_value, false),
                        io::format_double(rel), warning});
  }
  if (job.format("csv") == "json") {
    const json doc = {{"tau", tau}, {"regime", to_string(params.regime)}, {"warnings", warnings}, {"rows", rows}};
    emit(job, doc.dump(2) + "\n", out);
  } else {
    emit(job, csv, out);
  }
  return kOk;
}

inline int cmd_forward(const Job& job, std::ostream& out) {
  const double tau = job.tau();
  const SignalModel& s = job.signal();
  const LatticeParams params = nome_from_tau(tau);
  int M = 0, K = 0;
  if (job.config.truncation) {
    std::tie(M, K) = *job.config.truncation;
  } else {
    const auto xs = job.config.grid.expand();
    double X = 0.0;
    for (double x : xs) X = std::max(X, std::abs(x));
    // Two extra rows and columns let reconstruct repeat the tail estimate.
    const TruncationChoice t = auto_truncation(params, job.tol(), X, signal_source(s, tau, job.config.quad));
    M = std::min(t.M + 2, kMaxLatticeIndex);
    K = t.K + 2;
  }
  const GammaTable table = forward_table(s, tau, M, K, {job.config.quad, job.threads()});
  emit(job, io::table_to_json(table, job.config.signal_spec).dump() + "\n", out);
  return kOk;
}

inline std::string reconstruct_csv(const ReconReport& r) {
  std::string csv = io::csv_row({"x", "f_ref_re", "f_ref_im", "f_rec_re", "f_rec_im", "abs_err"});
  for (std::size_t i = 0; i < r.xs.size(); ++i) {
    const auto rec = r.reconstructed[i];
    std::optional<double> ref_re, ref_im, err;
    if (r.reference) {
      const auto ref = (*r.reference)[i];
      ref_re = ref.real();
      ref_im = ref.imag();
      err = std::abs(rec - ref);
    }
    csv += io::csv_row({io::format_double(r.xs[i]), optional_field(ref_re), optional_field(ref_im),
                        io::format_double(rec.real()), io::format_double(rec.imag()), optional_field(err)});
  }
  return csv;
}

inline json reconstruct_summary(const ReconReport& r, double tau) {
  return {{"tau", tau},
          {"points", r.xs.size()},
          {"sup_error", optional_number(r.sup_error)},
          {"l2_error", optional_number(r.l2_error)},
          {"M_used", r.M_used},
          {"K_used", r.K_used},
          {"tail_estimate", r.tail_estimate},
          {"tail_anomalies", r.tail_anomalies},
          {"mode", to_string(r.mode)},
          {"residue_buckets", r.residue_buckets}};
}

inline int cmd_reconstruct(const Job& job, std::ostream& out) {
  if (job.flags.table.empty()) throw io::ConfigError("--table is required");
  const io::TableFile file = io::read_table(job.flags.table);
  const double tau = file.table.tau();
  if (const auto given = job.tau_if_given(); given && *given != tau) {
    throw io::ConfigError("tau mismatch: config has " + io::format_double(*given) + ", table has " +
                          io::format_double(tau));
  }
  std::optional<SignalModel> reference = job.config.signal;
  if (!reference && file.signal_spec.is_object()) reference = io::parse_signal(file.signal_spec, "table.signal");

  ReconConfig rc;
  rc.tol = job.tol();
  rc.grid = job.config.grid;
  rc.mode = job.config.mode;
  rc.truncation = job.config.truncation;
  rc.threads = job.threads();
  const ReconReport r = reconstruct_grid(rc, file.table, nome_from_tau(tau), reference);

  const json summary = reconstruct_summary(r, tau);
  const auto path = job.output();
  if (job.format("csv") == "json") {
    json points = json::array();
    for (std::size_t i = 0; i < r.xs.size(); ++i) {
      json p = {{"x", r.xs[i]}, {"f_rec", {r.reconstructed[i].real(), r.reconstructed[i].imag()}}};
      if (r.reference) p["f_ref"] = {(*r.reference)[i].real(), (*r.reference)[i].imag()};
      points.push_back(std::move(p));
    }
    const json doc = {{"data", {{"summary", summary}, {"points", points}}}, {"metadata", metadata(r.elapsed_seconds)}};
    emit(job, doc.dump(2) + "\n", out);
    return kOk;
  }
  const json doc = {{"data", summary}, {"metadata", metadata(r.elapsed_seconds)}};
  if (!path) throw io::ConfigError("reconstruct writes CSV plus a summary file and needs --output");
  const std::string summary_path = job.flags.summary.empty() ? *path + ".summary.json" : job.flags.summary;
  io::write_files_atomically({{*path, reconstruct_csv(r)}, {summary_path, doc.dump(2) + "\n"}});
  return kOk;
}

inline int cmd_verify(const Job& job, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const double tau = job.tau();
  const std::string suite_name = !job.flags.suite.empty() ? job.flags.suite : job.config.suite.value_or("all");
  const auto suite = parse_suite(suite_name);
  if (!suite) throw io::ConfigError("unknown suite \"" + suite_name + "\"");
  VerifyOptions opts;
  opts.threads = job.threads();
  if (job.config.signal) opts.signals = {*job.config.signal};
  const VerifyReport rep = run_verify(tau, *suite, opts);

  json checks = json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"residual", c.residual},
                      {"threshold", c.threshold},
                      {"note", c.note}});
  }
  const json data = {{"suite", rep.suite},     {"tau", rep.tau},   {"regime", to_string(rep.regime)},
                     {"all_passed", rep.all_passed()}, {"checks", checks}, {"notes", rep.notes}};
  const json doc = {{"data", data}, {"metadata", metadata(seconds_since(start))}};
  emit(job, doc.dump(2) + "\n", out);
  return rep.all_passed() ? kOk : kVerifyFailed;
}

inline std::vector<double> parse_tau_list(const std::string& text) {
  std::vector<double> taus;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw io::ConfigError("--taus: cannot parse \"" + item + "\"");
    }
    if (used != item.size() || !(v > 0.0) || !std::isfinite(v)) {
      throw io::ConfigError("--taus: expected positive numbers, got \"" + item + "\"");
    }
    taus.push_back(v);
  }
  return taus;
}

inline int cmd_sweep(const Job& job, std::ostream& out) {
  SweepConfig cfg;
  cfg.taus = job.flags.taus.empty() ? job.config.taus : parse_tau_list(job.flags.taus);
  if (cfg.taus.empty()) throw io::ConfigError("sweep needs a tau list (--taus or config \"taus\")");
  if (job.config.truncation) std::tie(cfg.M, cfg.K) = *job.config.truncation;
  cfg.grid = job.config.grid;
  cfg.quad = job.config.quad;
  cfg.threads = job.threads();
  const auto rows = run_sweep(job.signal(), cfg);

  if (job.format("csv") == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"tau", r.tau},
                     {"regime", to_string(r.regime)},
                     {"status", to_string(r.status)},
                     {"sup_error", optional_number(r.sup_error)},
                     {"l2_error", optional_number(r.l2_error)},
                     {"M", r.M},
                     {"K", r.K},
                     {"log_tail_growth", r.log_tail_growth},
                     {"note", r.note}});
    }
    emit(job, json{{"rows", arr}}.dump(2) + "\n", out);
    return kOk;
  }
  std::string csv =
      io::csv_row({"tau", "regime", "status", "sup_error", "l2_error", "M", "K", "log_tail_growth", "note"});
  for (const auto& r : rows) {
    csv += io::csv_row({io::format_double(r.tau), to_string(r.regime), to_string(r.status),
                        optional_field(r.sup_error), optional_field(r.l2_error), std::to_string(r.M),
                        std::to_string(r.K), io::format_double(r.log_tail_growth), r.note});
  }
  emit(job, csv, out);
  return kOk;
}

}  // namespace detail

/// Runs one command; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"qlattice: theta-lattice signal reconstruction", "qlattice"};
  app.require_subcommand(1);
  Options o;
  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "experiment config (JSON)");
    sub->add_option("--output", o.output, "output path; stdout when omitted");
    sub->add_option("--tau", o.tau, "lattice parameter tau > 0");
    sub->add_option("--tol", o.tol, "target relative accuracy");
    sub->add_option("--threads", o.threads, "worker threads; 0 defers to QLATTICE_THREADS");
    sub->add_option("--format", o.format, "csv or json");
  };
  auto* coeffs = app.add_subcommand("coeffs", "list E_m with the contour oracle");
  common(coeffs);
  coeffs->add_option("--m-min", o.m_min, "first m (default -4)");
  coeffs->add_option("--m-max", o.m_max, "last m (default 4)");
  auto* forward = app.add_subcommand("forward", "compute a gamma table");
  common(forward);
  auto* reconstruct = app.add_subcommand("reconstruct", "reconstruct a signal from a gamma table");
  common(reconstruct);
  reconstruct->add_option("--table", o.table, "gamma table file")->required();
  reconstruct->add_option("--summary", o.summary, "summary path (default <output>.summary.json)");
  auto* verify = app.add_subcommand("verify", "run an invariant suite");
  common(verify);
  verify->add_option("--suite", o.suite, "theta, coeffs, poisson, interpolation or all");
  auto* sweep = app.add_subcommand("sweep", "fixed-truncation round trips across tau");
  common(sweep);
  sweep->add_option("--taus", o.taus, "comma-separated tau list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationError;
  }

  try {
    const detail::Job job = detail::make_job(o);
    if (coeffs->parsed()) return detail::cmd_coeffs(job, out);
    if (forward->parsed()) return detail::cmd_forward(job, out);
    if (reconstruct->parsed()) return detail::cmd_reconstruct(job, out);
    if (verify->parsed()) return detail::cmd_verify(job, out);
    return detail::cmd_sweep(job, out);
  } catch (const NonConvergence& e) {
    err << "error: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const Saturation& e) {
    err << "error: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  }
}

}  // namespace qlattice::cli
