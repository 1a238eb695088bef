#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gewi/analytic.hpp"
#include "gewi/error.hpp"
#include "gewi/sweep.hpp"
#include "gewi/traffic.hpp"

namespace gewi::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kUsage = 2,
  kProtocolFailure = 3,
};

namespace detail {

// Flags shared by every subcommand. Only flags actually given override the
// config file.
struct CommonFlags {
  std::uint64_t B = 0, D = 0, E = 0, L = 0, cycles = 0, warmup = 0, seed = 0, capacity = 0;
  std::string mode, stuffing, out, config;
  std::vector<std::string> vary;
  CLI::Option* o_B = nullptr;
  CLI::Option* o_D = nullptr;
  CLI::Option* o_E = nullptr;
  CLI::Option* o_L = nullptr;
  CLI::Option* o_cycles = nullptr;
  CLI::Option* o_warmup = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_capacity = nullptr;
  CLI::Option* o_mode = nullptr;
  CLI::Option* o_stuffing = nullptr;
  CLI::Option* o_out = nullptr;
  CLI::Option* o_config = nullptr;
  CLI::Option* o_vary = nullptr;

  void attach(CLI::App& app, bool with_vary) {
    o_B = app.add_option("--burst-packets,-B", B, "Packets per burst (B)");
    o_D = app.add_option("--packet-bits,-D", D, "Bits per packet (D), multiple of 8");
    o_E = app.add_option("--epr-frames,-E", E, "EPR frames per idle period (E)");
    o_L = app.add_option("--epr-frame-len,-L", L,
                         "EPR pairs per EPR frame (L); in units of 8 qubits this is L/8");
    o_cycles = app.add_option("--cycles", cycles, "Idle+burst cycles to simulate");
    o_warmup = app.add_option("--warmup", warmup, "Leading cycles excluded from the metric");
    o_mode = app.add_option("--mode", mode, "Flag handling: uniform or oracle")
                 ->check(CLI::IsMember({"uniform", "oracle"}));
    o_stuffing = app.add_option("--stuffing", stuffing, "Flag collisions: strict or stuffed")
                     ->check(CLI::IsMember({"strict", "stuffed"}));
    o_capacity = app.add_option("--capacity", capacity, "Entanglement buffer capacity (default unbounded)");
    o_seed = app.add_option("--seed", seed, "RNG seed");
    o_out = app.add_option("--out", out, "CSV output path");
    o_config = app.add_option("--config", config, "JSON config file; flags override its values");
    if (with_vary) {
      o_vary = app.add_option("--vary", vary,
                              "Swept parameter NAME=VALUES, e.g. L=0:104:8 or B=1,3,5,10; repeatable");
    }
  }

  SweepSpec resolve() const {
    SweepSpec spec;
    if (*o_config) load_config_file(spec, config);
    ExperimentConfig& c = spec.base;
    if (*o_B) c.B = B;
    if (*o_D) c.D = D;
    if (*o_E) c.E = E;
    if (*o_L) c.L = L;
    if (*o_cycles) c.cycles = cycles;
    if (*o_warmup) c.warmup_cycles = warmup;
    if (*o_seed) c.seed = seed;
    if (*o_capacity) c.capacity = static_cast<std::size_t>(capacity);
    if (*o_mode) c.mode = parse_mode(mode);
    if (*o_stuffing) c.stuffing = parse_stuffing(stuffing);
    if (*o_out) spec.out = out;
    if (o_vary && *o_vary) {
      spec.axes.clear();
      for (const std::string& v : vary) spec.axes.push_back(parse_axis(v));
    }
    return spec;
  }
};

inline bool append_csv_row(const std::string& path, const std::string& row) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream f(path, std::ios::app);
  if (!f) return false;
  if (fresh) f << csv_header() << '\n';
  f << row << '\n';
  return static_cast<bool>(f);
}

inline bool write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) return false;
  f << text;
  return static_cast<bool>(f);
}

inline void print_summary(std::ostream& out, const ExperimentConfig& c, const ExperimentResult& r) {
  const LinkStats& s = r.aggregate;
  out << "B=" << c.B << " E=" << c.E << " D=" << c.D << " L=" << c.L << " mode=" << mode_name(c.mode)
      << " stuffing=" << stuffing_name(c.stuffing) << " cycles=" << c.cycles
      << " warmup=" << c.warmup_cycles << " seed=" << c.seed << '\n';
  out << "measured C (bits per data qubit): " << format_real(r.measured_C) << '\n';
  out << "analytic C:                       " << format_real(r.analytic_C) << '\n';
  out << "deviation (measured - analytic):  " << format_real(r.measured_C - r.analytic_C) << '\n';
  out << "counters over " << (c.cycles - c.warmup_cycles) << " measured cycles:\n";
  out << "  data frames          " << s.data_frames << '\n';
  out << "  epr frames           " << s.epr_frames << '\n';
  out << "  header qubits        " << s.header_qubits << '\n';
  out << "  data payload qubits  " << s.data_payload_qubits << '\n';
  out << "  flag qubits          " << s.flag_qubits << '\n';
  out << "  epr payload qubits   " << s.epr_payload_qubits << '\n';
  out << "  total transmissions  " << s.total_transmissions() << '\n';
  out << "  epr pairs generated  " << s.epr_pairs_generated << '\n';
  out << "  epr pairs consumed   " << s.epr_pairs_consumed << '\n';
  out << "  data bits delivered  " << s.data_bits_delivered << '\n';
  out << "buffer occupancy at end: " << r.final_buffer_occupancy << '\n';
}

}  // namespace detail

inline int cmd_run(const detail::CommonFlags& flags, std::ostream& out, std::ostream& err) {
  const SweepSpec spec = flags.resolve();
  spec.base.validate();
  ExperimentResult r;
  try {
    r = run_experiment(spec.base);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    err << "protocol failure: " << e.what() << '\n';
    return kProtocolFailure;
  }
  detail::print_summary(out, spec.base, r);
  if (!spec.out.empty() && !detail::append_csv_row(spec.out, csv_row(spec.base, r))) {
    err << "cannot write '" << spec.out << "'\n";
    return kIoError;
  }
  return kOk;
}

inline int cmd_sweep(const detail::CommonFlags& flags, unsigned jobs, std::ostream& out,
                     std::ostream& err) {
  const SweepSpec spec = flags.resolve();
  expand(spec);  // validates every point before any work
  std::string csv;
  try {
    csv = sweep_csv(spec, jobs);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    err << "protocol failure: " << e.what() << '\n';
    return kProtocolFailure;
  }
  if (spec.out.empty()) {
    out << csv;
  } else if (!detail::write_file(spec.out, csv)) {
    err << "cannot write '" << spec.out << "'\n";
    return kIoError;
  }
  return kOk;
}

inline int cmd_analytic(const detail::CommonFlags& flags, std::ostream& out, std::ostream& err) {
  const SweepSpec spec = flags.resolve();
  const ExperimentConfig& c = spec.base;
  if (c.B < 1 || c.D < 1) throw ConfigError("analytic model needs B >= 1 and D >= 1");
  if (spec.axes.empty()) {
    const analytic::AnalyticPoint p = analytic::evaluate(c.B, c.E, c.D, c.L);
    char buf[128];
    std::snprintf(buf, sizeof buf, "C = %.6f\nburst transmissions = %.1f\n", p.C, p.transmissions);
    out << "B=" << c.B << " E=" << c.E << " D=" << c.D << " L=" << c.L << '\n' << buf;
    return kOk;
  }

  // Overlay curve: every point of the axis product, no simulation.
  std::string csv = "B,E,D,L,burst_transmissions,analytic_C\n";
  for (const ExperimentConfig& p : expand_points(spec)) {
    if (p.B < 1 || p.D < 1) throw ConfigError("analytic model needs B >= 1 and D >= 1");
    const analytic::AnalyticPoint a = analytic::evaluate(p.B, p.E, p.D, p.L);
    csv += std::to_string(p.B) + ',' + std::to_string(p.E) + ',' + std::to_string(p.D) + ',' +
           std::to_string(p.L) + ',' + format_real(a.transmissions) + ',' + format_real(a.C) + '\n';
  }
  if (spec.out.empty()) {
    out << csv;
  } else if (!detail::write_file(spec.out, csv)) {
    err << "cannot write '" << spec.out << "'\n";
    return kIoError;
  }
  return kOk;
}

/// Entry point shared by the gewi binary and the tests.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Entanglement-assisted link layer simulator", "gewi"};
  app.require_subcommand(1);

  detail::CommonFlags run_flags, sweep_flags, analytic_flags;
  unsigned jobs = 1;
  CLI::App* run = app.add_subcommand("run", "Run one idle/burst experiment and print a summary");
  run_flags.attach(*run, false);
  CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write CSV");
  sweep_flags.attach(*sweep, true);
  sweep->add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber);
  CLI::App* an = app.add_subcommand("analytic", "Evaluate the closed-form throughput model");
  analytic_flags.attach(*an, true);

  // CLI11 wants argv-style input with the program name first and parses in
  // reverse order from a vector.
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kUsage;
  }

  try {
    if (*run) return cmd_run(run_flags, out, err);
    if (*sweep) return cmd_sweep(sweep_flags, jobs, out, err);
    return cmd_analytic(analytic_flags, out, err);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kProtocolFailure;
  }
}

}  // namespace gewi::cli
