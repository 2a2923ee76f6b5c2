// Command-line entry points: run, linearize, diagnose, squirt-check.
//
// Exit status: 0 success, 2 validation error, 3 numerical halt
// (collision or NaN), 4 verdict failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "muskat/muskat.hpp"

namespace fs = std::filesystem;
using namespace muskat;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kNumerical = 3;
constexpr int kVerdict = 4;

Scenario load_scenario(const std::string& config, const fs::path& run_dir) {
  if (!config.empty()) return parse_scenario(config);
  return parse_scenario((run_dir / "scenario.json").string());
}

int cmd_run(const std::string& config, const std::string& out, std::optional<std::size_t> cadence,
            const std::string& resume) {
  const Scenario scenario = parse_scenario(config);
  RunOptions options;
  options.cadence = cadence;
  if (!resume.empty()) options.resume = load_resume_state(scenario, resume);
  DirectorySink sink(out, scenario);
  const RunSummary s = run_scenario(scenario, sink, options);
  std::cerr << "run: " << to_string(s.reason) << " at t = " << s.final_t << " after " << s.steps << " steps\n";
  if (!s.message.empty()) std::cerr << "run: " << s.message << '\n';
  for (const auto& p : s.squirt)
    std::cerr << "squirt probe (" << p.probe.center[0] << ", " << p.probe.center[1] << "; a = " << p.probe.aperture
              << "): " << (p.verdict ? to_string(p.verdict->status) : "NOT_APPLICABLE") << '\n';
  if (s.reason == HaltReason::collision || s.reason == HaltReason::numerical) return kNumerical;
  if (s.squirt_failed()) return kVerdict;
  return kOk;
}

struct LinearizeArgs {
  std::string config;
  double a12 = 2.0, a23 = 0.0, gap = 1.0;
  double k_min = 1.0, k_max = 4.0, k_step = 1.0;
};

int cmd_linearize(LinearizeArgs a) {
  if (!a.config.empty()) {
    const Scenario s = parse_scenario(a.config);
    const ContourPair p = s.initial_pair();
    a.a12 = s.densities.upper_jump();
    a.a23 = s.lower ? s.densities.lower_jump() : 0.0;
    if (p.has_lower()) a.gap = mean_height(p.upper()) - mean_height(p.lower());
  }
  if (!(a.k_step > 0.0) || !(a.k_min > 0.0) || a.k_max < a.k_min)
    throw ParameterError("k range needs 0 < k_min <= k_max and k_step > 0");
  if (!(a.gap > 0.0)) throw ParameterError("gap must be positive");
  std::cout << "k,self_f,self_g,cross_f,cross_g,lambda_minus,lambda_plus\n";
  const FlatBase base{a.gap, 0.0, a.a12, a.a23};
  const auto count = static_cast<std::size_t>(std::floor((a.k_max - a.k_min) / a.k_step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) {
    const double k = a.k_min + a.k_step * static_cast<double>(i);
    const ModeRates m = mode_rates(k, base);
    std::cout << format_double(k) << ',' << format_double(m.matrix[0][0]) << ',' << format_double(m.matrix[1][1]) << ','
              << format_double(m.matrix[0][1]) << ',' << format_double(m.matrix[1][0]) << ',';
    if (m.real_spectrum)
      std::cout << format_double(m.eigenvalues[0].real()) << ',' << format_double(m.eigenvalues[1].real()) << '\n';
    else
      std::cout << format_double(m.eigenvalues[0].real()) << "-" << format_double(-m.eigenvalues[0].imag()) << "i,"
                << format_double(m.eigenvalues[1].real()) << "+" << format_double(m.eigenvalues[1].imag()) << "i\n";
  }
  return kOk;
}

std::vector<std::pair<SnapshotEntry, ContourPair>> load_snapshots(const Scenario& s, const fs::path& dir) {
  const fs::path snaps = dir / "snapshots";
  std::vector<std::pair<SnapshotEntry, ContourPair>> out;
  for (const auto& e : read_snapshot_index(snaps)) out.emplace_back(e, load_resume_state(s, snaps / e.file).pair);
  if (out.empty()) throw InputError("run directory has no snapshots");
  return out;
}

int cmd_diagnose(const std::string& config, const std::string& out) {
  const Scenario s = load_scenario(config, out);
  const auto snaps = load_snapshots(s, out);
  std::vector<double> times, energies;
  std::vector<std::string> lines;
  for (const auto& [entry, pair] : snaps) {
    const EnergyTerms e = energy(pair, s.diagnostics.energy_order);
    std::string line = "{\"t\":" + format_double(entry.t) + ",\"step\":" + std::to_string(entry.step) +
                       ",\"E\":" + format_double(e.total) + ",\"hk_f\":" + format_double(e.upper_hk) +
                       ",\"hk_g\":" + format_double(e.lower_hk) + ",\"d_sup\":" + format_double(e.d_sup) +
                       ",\"bound_bracket\":[";
    for (std::size_t i = 0; i < s.diagnostics.gammas.size(); ++i) {
      const double g = s.diagnostics.gammas[i];
      if (i) line += ',';
      line += "{\"gamma\":" + format_double(g) + ",\"value\":" + format_double(bound_bracket(pair, g)) + "}";
    }
    line += "]";
    lines.push_back(std::move(line));
    times.push_back(entry.t);
    energies.push_back(e.total);
  }
  std::vector<EnergyRate> rates;
  if (times.size() >= 3) rates = qtc_witness(times, energies);
  for (std::size_t i = 0; i < lines.size(); ++i)
    std::cout << lines[i] << ",\"dE_dt\":" << (rates.empty() ? std::string("null") : format_double(rates[i].rate))
              << "}\n";
  if (rates.empty()) std::cerr << "diagnose: fewer than three records, dE/dt not available\n";
  return kOk;
}

int cmd_squirt_check(const std::string& config, const std::string& out, const std::vector<double>& center,
                     std::optional<double> aperture) {
  Scenario s = load_scenario(config, out);
  if (aperture) {
    if (center.size() != 2) throw ParameterError("--center needs two numbers");
    s.diagnostics.squirt_probes = {SquirtProbe{{center[0], center[1]}, *aperture}};
  }
  if (s.diagnostics.squirt_probes.empty()) throw ParameterError("no squirt probe configured (use --center/--aperture)");
  const auto records = read_ndjson(fs::path(out) / "diagnostics.ndjson");
  const auto snaps = load_snapshots(s, out);
  if (records.size() != snaps.size()) throw InputError("diagnostics stream and snapshot index differ in length");
  std::vector<double> times, u;
  std::vector<ContourPair> states;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].step != snaps[i].first.step) throw InputError("diagnostics and snapshots are out of step");
    times.push_back(records[i].t);
    u.push_back(records[i].u_sup);
    states.push_back(snaps[i].second);
  }
  const auto reports = squirt_reports(s, times, u, states);
  bool failed = false;
  for (const auto& r : reports) {
    std::cout << "probe center=(" << format_double(r.probe.center[0]) << "," << format_double(r.probe.center[1])
              << ") aperture=" << format_double(r.probe.aperture) << " verdict=";
    if (!r.verdict) {
      std::cout << "NOT_APPLICABLE (" << r.note << ")\n";
      continue;
    }
    std::cout << to_string(r.verdict->status);
    if (r.verdict->status != SquirtStatus::inactive)
      std::cout << " t0=" << format_double(r.verdict->t0) << " vol_t0=" << format_double(r.verdict->volume_t0)
                << " worst_change=" << format_double(r.verdict->worst_change);
    std::cout << '\n';
    failed = failed || r.verdict->status == SquirtStatus::fail;
  }
  return failed ? kVerdict : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-phase Muskat contour-dynamics simulator"};
  app.require_subcommand(1);

  std::string config, out, resume;
  std::size_t cadence = 0;
  auto* run = app.add_subcommand("run", "evolve a scenario and write diagnostics, snapshots and a summary");
  run->add_option("--config", config, "scenario JSON")->required();
  run->add_option("--out", out, "output directory")->required();
  run->add_option("--cadence", cadence, "record every N steps (overrides the scenario)")->check(CLI::PositiveNumber);
  run->add_option("--resume", resume, "snapshot CSV to resume from (listed in its index.csv)");

  LinearizeArgs lin;
  auto* linearize = app.add_subcommand("linearize", "print linear symbols and eigen-rates for a k range");
  linearize->add_option("--config", lin.config, "take jumps and gap from a scenario");
  linearize->add_option("--a12", lin.a12, "upper jump rho2 - rho1");
  linearize->add_option("--a23", lin.a23, "lower jump rho3 - rho2");
  linearize->add_option("--gap", lin.gap, "flat layer thickness");
  linearize->add_option("--k-min", lin.k_min, "smallest |k|");
  linearize->add_option("--k-max", lin.k_max, "largest |k|");
  linearize->add_option("--k-step", lin.k_step, "spacing in |k|");

  auto* diagnose = app.add_subcommand("diagnose", "recompute E(t) and bound brackets from a run's snapshots");
  diagnose->add_option("--out", out, "run directory")->required();
  diagnose->add_option("--config", config, "scenario JSON (default: <run>/scenario.json)");

  std::vector<double> center;
  double aperture = 0.0;
  auto* squirt = app.add_subcommand("squirt-check", "apply the squirt-volume monitor to a finished run");
  squirt->add_option("--out", out, "run directory")->required();
  squirt->add_option("--config", config, "scenario JSON (default: <run>/scenario.json)");
  auto* center_opt = squirt->add_option("--center", center, "probe center x1 x2")->expected(2);
  auto* aperture_opt = squirt->add_option("--aperture", aperture, "probe aperture");
  aperture_opt->needs(center_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*run) return cmd_run(config, out, cadence ? std::optional<std::size_t>(cadence) : std::nullopt, resume);
    if (*linearize) return cmd_linearize(lin);
    if (*diagnose) return cmd_diagnose(config, out);
    if (*squirt)
      return cmd_squirt_check(config, out, center, aperture_opt->count() ? std::optional<double>(aperture) : std::nullopt);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const CollisionError& e) {
    std::cerr << "collision: " << e.what() << '\n';
    return kNumerical;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kOk;
}
