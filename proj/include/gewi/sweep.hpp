#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gewi/analytic.hpp"
#include "gewi/error.hpp"
#include "gewi/traffic.hpp"

// Parameter sweeps over ExperimentConfig and their CSV output.
namespace gewi {

/// One swept parameter. `name` is one of B, E, L (D is accepted too).
struct SweepAxis {
  char name = 'L';
  std::vector<std::uint64_t> values;
};

/// Base config plus axes; points are the Cartesian product of the axes with
/// the first axis outermost.
struct SweepSpec {
  ExperimentConfig base;
  std::vector<SweepAxis> axes;
  std::string out;
};

inline const char* mode_name(FlagMode m) {
  return m == FlagMode::oracle_delimited ? "oracle" : "uniform";
}

inline const char* stuffing_name(Stuffing s) {
  return s == Stuffing::byte_stuffed ? "stuffed" : "strict";
}

inline FlagMode parse_mode(const std::string& s) {
  if (s == "oracle") return FlagMode::oracle_delimited;
  if (s == "uniform") return FlagMode::in_band_uniform;
  throw ConfigError("unknown mode '" + s + "' (expected uniform or oracle)");
}

inline Stuffing parse_stuffing(const std::string& s) {
  if (s == "strict") return Stuffing::strict;
  if (s == "stuffed") return Stuffing::byte_stuffed;
  throw ConfigError("unknown stuffing '" + s + "' (expected strict or stuffed)");
}

inline std::uint64_t& axis_field(ExperimentConfig& cfg, char name) {
  switch (name) {
    case 'B': return cfg.B;
    case 'E': return cfg.E;
    case 'D': return cfg.D;
    case 'L': return cfg.L;
    default: throw ConfigError(std::string("cannot sweep parameter '") + name + "'");
  }
}

namespace detail {

inline std::uint64_t parse_u64(const std::string& s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw ConfigError("not a non-negative integer: '" + s + "'");
  }
  return std::stoull(s);
}

}  // namespace detail

/// Parses a value list: comma-separated items, each an integer or an
/// inclusive range start:stop[:step]. An empty string is an empty list.
inline std::vector<std::uint64_t> parse_values(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(detail::parse_u64(item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    const std::uint64_t start = detail::parse_u64(item.substr(0, c1));
    const std::uint64_t stop = detail::parse_u64(item.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1));
    const std::uint64_t step = c2 == std::string::npos ? 1 : detail::parse_u64(item.substr(c2 + 1));
    if (step == 0) throw ConfigError("range step must be positive in '" + item + "'");
    for (std::uint64_t v = start; v <= stop; v += step) out.push_back(v);
  }
  return out;
}

/// Parses NAME=VALUES, e.g. "L=0:104:8" or "B=1,3,5,10".
inline SweepAxis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq != 1) throw ConfigError("sweep axis must look like NAME=VALUES, got '" + text + "'");
  SweepAxis axis{text[0], parse_values(text.substr(2))};
  ExperimentConfig probe;
  (void)axis_field(probe, axis.name);
  return axis;
}

/// Axis product without config validation.
inline std::vector<ExperimentConfig> expand_points(const SweepSpec& spec) {
  std::vector<ExperimentConfig> points{spec.base};
  for (const SweepAxis& axis : spec.axes) {
    std::vector<ExperimentConfig> next;
    next.reserve(points.size() * axis.values.size());
    for (const ExperimentConfig& p : points) {
      for (std::uint64_t v : axis.values) {
        ExperimentConfig q = p;
        axis_field(q, axis.name) = v;
        next.push_back(q);
      }
    }
    points = std::move(next);
  }
  return points;
}

inline std::vector<ExperimentConfig> expand(const SweepSpec& spec) {
  std::vector<ExperimentConfig> points = expand_points(spec);
  for (const ExperimentConfig& p : points) p.validate();
  return points;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

inline std::string csv_header() {
  return "B,E,D,L,mode,data_payload_qubits,data_bits_delivered,measured_C,analytic_C,"
         "total_transmissions,epr_pairs_generated,epr_pairs_consumed";
}

inline std::string csv_row(const ExperimentConfig& cfg, const ExperimentResult& r) {
  const LinkStats& s = r.aggregate;
  std::ostringstream os;
  os << cfg.B << ',' << cfg.E << ',' << cfg.D << ',' << cfg.L << ',' << mode_name(cfg.mode) << ','
     << s.data_payload_qubits << ',' << s.data_bits_delivered << ',' << format_real(r.measured_C)
     << ',' << format_real(r.analytic_C) << ',' << s.total_transmissions() << ','
     << s.epr_pairs_generated << ',' << s.epr_pairs_consumed;
  return os.str();
}

/// Runs every point of the sweep on up to `jobs` threads. Results are in
/// expansion order regardless of completion order; the first failure is
/// rethrown after all workers join.
inline std::vector<ExperimentResult> run_points(const std::vector<ExperimentConfig>& points,
                                                unsigned jobs = 1) {
  std::vector<ExperimentResult> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        results[i] = run_experiment(points[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

/// Full CSV text (header plus one row per point).
inline std::string sweep_csv(const SweepSpec& spec, unsigned jobs = 1) {
  const std::vector<ExperimentConfig> points = expand(spec);
  const std::vector<ExperimentResult> results = run_points(points, jobs);
  std::string csv = csv_header() + "\n";
  for (std::size_t i = 0; i < points.size(); ++i) csv += csv_row(points[i], results[i]) + "\n";
  return csv;
}

// ---------------------------------------------------------------------------
// JSON config files. Keys mirror the long flag names:
//
//   {"burst-packets": 10, "packet-bits": 168, "epr-frames": 10,
//    "epr-frame-len": 8, "cycles": 4, "warmup": 1, "mode": "oracle",
//    "stuffing": "strict", "capacity": null, "seed": 1, "out": "sweep.csv",
//    "vary": [{"param": "B", "values": [1, 3, 5, 10]},
//             {"param": "L", "values": "0:104:8"}]}

inline void apply_json(SweepSpec& spec, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  ExperimentConfig& c = spec.base;
  auto u64 = [&](const char* key, std::uint64_t& field) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_unsigned()) {
      throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
    }
    field = j[key].get<std::uint64_t>();
  };
  u64("burst-packets", c.B);
  u64("packet-bits", c.D);
  u64("epr-frames", c.E);
  u64("epr-frame-len", c.L);
  u64("cycles", c.cycles);
  u64("warmup", c.warmup_cycles);
  u64("seed", c.seed);
  if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
  if (j.contains("stuffing")) c.stuffing = parse_stuffing(j["stuffing"].get<std::string>());
  if (j.contains("capacity")) {
    if (j["capacity"].is_null()) {
      c.capacity.reset();
    } else {
      std::uint64_t cap = 0;
      u64("capacity", cap);
      c.capacity = static_cast<std::size_t>(cap);
    }
  }
  if (j.contains("out")) spec.out = j["out"].get<std::string>();
  if (j.contains("vary")) {
    spec.axes.clear();
    for (const nlohmann::json& a : j["vary"]) {
      const std::string name = a.at("param").get<std::string>();
      if (name.size() != 1) throw ConfigError("sweep parameter must be one of B, E, D, L");
      SweepAxis axis{name[0], {}};
      const nlohmann::json& v = a.at("values");
      if (v.is_string()) {
        axis.values = parse_values(v.get<std::string>());
      } else {
        axis.values = v.get<std::vector<std::uint64_t>>();
      }
      ExperimentConfig probe;
      (void)axis_field(probe, axis.name);
      spec.axes.push_back(std::move(axis));
    }
  }
}

inline void load_config_file(SweepSpec& spec, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  try {
    apply_json(spec, j);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

}  // namespace gewi
