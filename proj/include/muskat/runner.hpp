#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "muskat/diagnostics.hpp"
#include "muskat/error.hpp"
#include "muskat/evolution.hpp"
#include "muskat/io.hpp"
#include "muskat/linear_analysis.hpp"
#include "muskat/scenario.hpp"

namespace muskat {

struct ProbeReport {
  SquirtProbe probe;
  std::optional<SquirtVerdict> verdict;  // empty when not applicable
  std::string note;
};

struct RateReport {
  std::string surface;  // "f" or "g"
  std::array<long, 2> mode{};
  std::optional<GrowthFit> fit;
  std::string error;
};

struct RunSummary {
  HaltReason reason = HaltReason::completed;
  std::string message;
  double final_t = 0.0;
  std::size_t steps = 0;
  bool trusted = true;
  Stability stability = Stability::stable;
  std::vector<ProbeReport> squirt;
  std::vector<RateReport> fitted_rates;

  bool squirt_failed() const {
    for (const auto& p : squirt)
      if (p.verdict && p.verdict->status == SquirtStatus::fail) return true;
    return false;
  }
};

/// Receives every recorded state and the final summary.
class RunSink {
 public:
  virtual ~RunSink() = default;
  virtual void record(const DiagnosticsRecord& r, const TimeState& s) = 0;
  virtual void finish(const RunSummary& summary) = 0;
};

inline nlohmann::ordered_json summary_to_json(const RunSummary& s) {
  using J = nlohmann::ordered_json;
  auto finite = [](double v) { return std::isfinite(v) ? J(v) : J(nullptr); };
  J j;
  j["halt_reason"] = to_string(s.reason);
  j["message"] = s.message;
  j["final_t"] = finite(s.final_t);
  j["steps"] = s.steps;
  j["trusted"] = s.trusted;
  j["stability"] = to_string(s.stability);
  J probes = J::array();
  for (const auto& p : s.squirt) {
    J e;
    e["center"] = {p.probe.center[0], p.probe.center[1]};
    e["aperture"] = p.probe.aperture;
    if (p.verdict) {
      e["verdict"] = to_string(p.verdict->status);
      e["t0"] = finite(p.verdict->t0);
      e["volume_t0"] = finite(p.verdict->volume_t0);
      e["worst_change"] = finite(p.verdict->worst_change);
      e["tolerance"] = finite(p.verdict->tolerance);
    } else {
      e["verdict"] = "NOT_APPLICABLE";
      e["note"] = p.note;
    }
    probes.push_back(e);
  }
  j["squirt"] = probes;
  J rates = J::array();
  for (const auto& r : s.fitted_rates) {
    J e;
    e["surface"] = r.surface;
    e["k"] = {r.mode[0], r.mode[1]};
    if (r.fit) {
      e["rate"] = finite(r.fit->rate);
      e["samples"] = r.fit->samples;
      e["linear_regime"] = r.fit->linear_regime;
      if (!r.fit->warning.empty()) e["warning"] = r.fit->warning;
    } else {
      e["error"] = r.error;
    }
    rates.push_back(e);
  }
  j["fitted_rates"] = rates;
  return j;
}

/// Writes scenario.json, diagnostics.ndjson, snapshots/ and summary.json
/// under one directory. The NDJSON stream is flushed after every record.
class DirectorySink : public RunSink {
 public:
  DirectorySink(const std::filesystem::path& dir, const Scenario& scenario) : dir_(dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_ / "snapshots", ec);
    if (ec) throw InputError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    {
      std::ofstream cfg(dir_ / "scenario.json", std::ios::binary | std::ios::trunc);
      cfg << scenario_to_json(scenario).dump(2) << '\n';
    }
    ndjson_.open(dir_ / "diagnostics.ndjson", std::ios::binary | std::ios::trunc);
    index_.open(dir_ / "snapshots" / "index.csv", std::ios::binary | std::ios::trunc);
    if (!ndjson_ || !index_) throw InputError("cannot open output files in '" + dir_.string() + "'");
    index_ << "step,t,file\n";
    index_.flush();
  }

  void record(const DiagnosticsRecord& r, const TimeState& s) override {
    const std::string line = record_to_ndjson(r);
    const std::string name = snapshot_name(s.step_count);
    write_snapshot(dir_ / "snapshots" / name, s.pair);
    ndjson_ << line << '\n';
    ndjson_.flush();
    index_ << s.step_count << ',' << format_double(s.t) << ',' << name << '\n';
    index_.flush();
  }

  void finish(const RunSummary& summary) override {
    std::ofstream out(dir_ / "summary.json", std::ios::binary | std::ios::trunc);
    out << summary_to_json(summary).dump(2) << '\n';
  }

 private:
  std::filesystem::path dir_;
  std::ofstream ndjson_;
  std::ofstream index_;
};

/// Keeps everything in memory (tests and library users).
class MemorySink : public RunSink {
 public:
  void record(const DiagnosticsRecord& r, const TimeState& s) override {
    records.push_back(r);
    states.push_back(s.pair);
  }
  void finish(const RunSummary& summary) override { this->summary = summary; }

  std::vector<DiagnosticsRecord> records;
  std::vector<ContourPair> states;
  RunSummary summary;
};

struct RunOptions {
  std::optional<std::size_t> cadence;  // overrides the scenario cadence
  std::optional<TimeState> resume;     // start here instead of the initial data
};

namespace detail {

inline double linear_regime_scale(const ContourPair& pair, const std::array<long, 2>& m) {
  if (pair.has_lower()) return 1e-2 * (mean_height(pair.upper()) - mean_height(pair.lower()));
  const double kappa = 2.0 * std::numbers::pi * std::hypot(static_cast<double>(m[0]), static_cast<double>(m[1])) /
                       pair.grid().side_length();
  return 1e-2 / kappa;
}

}  // namespace detail

/// Post-run squirt verdicts for every probe of the scenario.
inline std::vector<ProbeReport> squirt_reports(const Scenario& scenario, std::span<const double> times,
                                               std::span<const double> u_sup, std::span<const ContourPair> states) {
  std::vector<ProbeReport> out;
  for (const auto& p : scenario.diagnostics.squirt_probes) {
    ProbeReport r{p, std::nullopt, ""};
    if (!scenario.lower) {
      r.note = "single interface: no volume between contours";
    } else {
      r.verdict = squirt_monitor(p, times, u_sup, states);
    }
    out.push_back(r);
  }
  return out;
}

/// Advances the scenario, records diagnostics at the cadence and returns the summary.
inline RunSummary run_scenario(const Scenario& scenario, RunSink& sink, const RunOptions& options = {}) {
  const ContourPair initial_pair = scenario.initial_pair();
  TimeState start = options.resume ? *options.resume : TimeState{0.0, initial_pair, 0, 0.0};
  const PolarQuadRule rule = scenario.rule();
  const Stepper<> stepper(scenario.grid(), rule, scenario.control());
  const RecordSettings settings = scenario.record_settings();
  const std::size_t cadence = options.cadence.value_or(scenario.stepping.cadence);

  std::vector<double> times, u_sup;
  std::vector<ContourPair> states;
  const auto& modes = scenario.diagnostics.tracked_modes;
  std::vector<std::vector<double>> amp_f(modes.size()), amp_g(modes.size());

  auto observe = [&](const TimeState& s, bool) {
    const DiagnosticsRecord r = make_record(s.pair, s.t, s.step_count, s.dt_current, rule, settings);
    sink.record(r, s);
    times.push_back(s.t);
    u_sup.push_back(r.u_sup);
    if (!scenario.diagnostics.squirt_probes.empty()) states.push_back(s.pair);
    if (!modes.empty()) {
      const SpectralField sf(s.pair.upper());
      std::optional<SpectralField> sg;
      if (s.pair.has_lower()) sg.emplace(s.pair.lower());
      for (std::size_t m = 0; m < modes.size(); ++m) {
        amp_f[m].push_back(2.0 * std::abs(sf.at(modes[m][0], modes[m][1])));
        if (sg) amp_g[m].push_back(2.0 * std::abs(sg->at(modes[m][0], modes[m][1])));
      }
    }
  };

  RunSummary summary;
  const Densities& rho = scenario.densities;
  summary.stability = scenario.lower ? stability_classifier(rho.upper, rho.middle, rho.lower)
                                     : stability_classifier(rho.upper, rho.middle, rho.middle);
  try {
    const RunOutcome out = run_evolution(start, stepper, cadence, observe);
    summary.reason = out.reason;
    summary.message = out.message;
    summary.final_t = out.final_state.t;
    summary.steps = out.final_state.step_count;
    summary.trusted = out.trusted;
  } catch (const NumericalError& e) {
    summary.reason = HaltReason::numerical;
    summary.message = e.what();
    summary.final_t = times.empty() ? start.t : times.back();
  }

  if (!times.empty()) summary.squirt = squirt_reports(scenario, times, u_sup, states);

  for (std::size_t m = 0; m < modes.size(); ++m) {
    auto fit_one = [&](const char* name, const std::vector<double>& amps) {
      RateReport r{name, modes[m], std::nullopt, ""};
      try {
        r.fit = fit_growth_rate(std::span<const double>(times.data(), amps.size()), amps,
                                detail::linear_regime_scale(initial_pair, modes[m]));
      } catch (const Error& e) {
        r.error = e.what();
      }
      summary.fitted_rates.push_back(r);
    };
    fit_one("f", amp_f[m]);
    if (!amp_g[m].empty()) fit_one("g", amp_g[m]);
  }
  sink.finish(summary);
  return summary;
}

/// State stored in a snapshot listed in its directory's index.csv.
inline TimeState load_resume_state(const Scenario& scenario, const std::filesystem::path& snapshot) {
  const auto entries = read_snapshot_index(snapshot.parent_path());
  const std::string name = snapshot.filename().string();
  for (const auto& e : entries) {
    if (e.file != name) continue;
    const Grid2 grid = scenario.grid();
    SnapshotData d = read_snapshot(snapshot, grid);
    SurfaceField f(grid, std::move(d.upper), scenario.upper.far_constant);
    if (static_cast<bool>(d.lower) != static_cast<bool>(scenario.lower))
      throw ValidationError("resume", "snapshot interface count does not match the scenario");
    if (!d.lower) return TimeState{e.t, ContourPair::single(std::move(f), scenario.densities.upper, scenario.densities.middle), e.step, 0.0};
    SurfaceField g(grid, std::move(*d.lower), scenario.lower->far_constant);
    return TimeState{e.t, ContourPair(std::move(f), std::move(g), scenario.densities), e.step, 0.0};
  }
  throw ValidationError("resume", "snapshot '" + name + "' is not listed in its index.csv");
}

}  // namespace muskat
