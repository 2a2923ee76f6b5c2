#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace muskat;
using namespace muskat::testing;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"grid": {"side_length": 6.283185307179586, "resolution": 16}})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("muskat_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Scenario, MinimalConfigFillsDefaults) {
  const Scenario s = parse_scenario_text(kMinimal);
  EXPECT_EQ(s.stepping.c_cfl, 0.5);
  EXPECT_EQ(s.diagnostics.energy_order, 4);
  ASSERT_EQ(s.diagnostics.gammas.size(), 1u);
  EXPECT_EQ(s.diagnostics.gammas[0], 0.5);
  EXPECT_EQ(s.quadrature.radial, 16u / 2 + 16);
  EXPECT_TRUE(s.lower.has_value());
}

TEST(Scenario, GapViolationNamesNode) {
  const std::string text = R"({"grid": {"side_length": 1, "resolution": 8},
    "surfaces": {"upper": {"far_constant": 0}, "lower": {"far_constant": 1}}})";
  try {
    parse_scenario_text(text);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("node (0, 0)"), std::string::npos) << e.what();
  }
}

TEST(Scenario, UnknownKeyRejected) {
  const std::string text = R"({"grid": {"side_length": 1, "resolution": 8}, "densitys": {"rho1": 0}})";
  try {
    parse_scenario_text(text);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("densitys"), std::string::npos);
  }
  EXPECT_THROW(parse_scenario_text(R"({"grid": {"side_length": 1, "resolution": 8, "n": 3}})"), ValidationError);
  EXPECT_THROW(parse_scenario_text(R"({"grid": {"side_length": 1, "resolution": 12}})"), ValidationError);
  EXPECT_THROW(parse_scenario_text(R"({"grid": {"side_length": 1, "resolution": 8}, "stepping": {"c_cfl": 2}})"),
               ValidationError);
  EXPECT_THROW(parse_scenario_text("{"), ValidationError);
}

TEST(Scenario, SingleInterfaceRules) {
  const Scenario s = parse_scenario_text(
      R"({"densities": {"rho1": 0, "rho2": 2}, "grid": {"side_length": 1, "resolution": 8}, "surfaces": {"lower": null}})");
  EXPECT_FALSE(s.lower.has_value());
  EXPECT_EQ(s.densities.lower, 2.0);
  EXPECT_FALSE(s.initial_pair().has_lower());
  EXPECT_THROW(parse_scenario_text(R"({"densities": {"rho1": 0, "rho2": 2, "rho3": 5},
      "grid": {"side_length": 1, "resolution": 8}, "surfaces": {"lower": null}})"),
               ValidationError);
}

TEST(Scenario, RoundTrip) {
  const std::string text = R"({
    "densities": {"rho1": 0.5, "rho2": 1.25, "rho3": 3},
    "grid": {"side_length": 5, "resolution": 16},
    "surfaces": {"upper": {"far_constant": 2, "modes": [{"k": [1, 2], "amplitude": 0.1, "phase": 0.3}],
                           "random_band": {"k_min": 1, "k_max": 3, "amplitude": 0.01}},
                 "lower": {"far_constant": 0.25}},
    "quadrature": {"angular": 24, "radial": 20},
    "stepping": {"t_end": 0.5, "cadence": 3, "dt_max": 0.01},
    "diagnostics": {"gammas": [0.25, 0.5], "squirt_probes": [{"center": [1, 2], "aperture": 0.5}],
                    "tracked_modes": [[1, 2]]},
    "seed": 42})";
  const Scenario a = parse_scenario_text(text);
  const Scenario b = scenario_from_json(scenario_to_json(a));
  EXPECT_TRUE(a == b);
  EXPECT_EQ(scenario_to_json(a).dump(), scenario_to_json(b).dump());
  const Scenario c = parse_scenario_text(kMinimal);
  EXPECT_TRUE(scenario_from_json(scenario_to_json(c)) == c);
}

TEST(Scenario, SeedDeterminesRandomBand) {
  const std::string base = R"({"grid": {"side_length": 6.283185307179586, "resolution": 16},
    "surfaces": {"upper": {"far_constant": 1, "random_band": {"k_min": 1, "k_max": 3, "amplitude": 0.05}}}, "seed": )";
  const auto a = parse_scenario_text(base + "7}").initial_pair();
  const auto b = parse_scenario_text(base + "7}").initial_pair();
  const auto c = parse_scenario_text(base + "8}").initial_pair();
  EXPECT_EQ(max_abs_diff(a.upper().values(), b.upper().values()), 0.0);
  EXPECT_GT(max_abs_diff(a.upper().values(), c.upper().values()), 0.0);
}

TEST(Format, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.283185307179586}) EXPECT_EQ(parse_double(format_double(v)), v);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_THROW(format_double(std::nan("")), NumericalError);
  EXPECT_THROW(parse_double("1.5x"), InputError);
}

TEST(Ndjson, FixedKeyOrder) {
  DiagnosticsRecord r;
  r.t = 0.5;
  r.step = 3;
  r.dt = 0.25;
  r.energy = {1.0, 2.0, 0.5, 3.5};
  r.u_sup = 0.125;
  r.brackets = {{0.5, 4.0}};
  r.mean_f = 1.0;
  EXPECT_EQ(record_to_ndjson(r),
            R"({"t":0.5,"step":3,"dt":0.25,"E":3.5,"hk_f":1,"hk_g":2,"d_sup":0.5,"u_sup":0.125,)"
            R"("bound_bracket":[{"gamma":0.5,"value":4}],"mean_f":1,"mean_g":null,"min_gap":null})");
  r.mean_g = 0.0;
  r.min_gap = 0.75;
  const auto back = record_from_json(nlohmann::json::parse(record_to_ndjson(r)));
  EXPECT_EQ(back.min_gap.value(), 0.75);
  EXPECT_EQ(record_to_ndjson(back), record_to_ndjson(r));
  r.u_sup = std::nan("");
  EXPECT_THROW(record_to_ndjson(r), NumericalError);
}

TEST(Snapshot, HeaderRowsAndRoundTrip) {
  const fs::path d = fresh_dir("snap");
  fs::create_directories(d);
  const Grid2 g(3.0, 8);
  const ContourPair p(random_surface(g, 1.0, 0.1, 1), random_surface(g, 0.0, 0.1, 2), Densities{});
  write_snapshot(d / "a.csv", p);
  const std::string text = slurp(d / "a.csv");
  EXPECT_EQ(text.substr(0, 10), "x1,x2,f,g\n");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 65);
  const auto back = read_snapshot(d / "a.csv", g);
  EXPECT_EQ(max_abs_diff(back.upper, p.upper().values()), 0.0);
  EXPECT_EQ(max_abs_diff(*back.lower, p.lower().values()), 0.0);
  write_snapshot(d / "b.csv", ContourPair::single(p.upper(), 0, 1));
  EXPECT_FALSE(read_snapshot(d / "b.csv", g).lower.has_value());
  EXPECT_THROW(read_snapshot(d / "a.csv", Grid2(3.0, 16)), InputError);
  fs::remove_all(d);
}

TEST(Runner, DirectorySinkIsDeterministic) {
  const std::string text = R"({"densities": {"rho1": 0, "rho2": 1, "rho3": 2},
    "grid": {"side_length": 6.283185307179586, "resolution": 16},
    "surfaces": {"upper": {"far_constant": 1, "modes": [{"k": [1, 0], "amplitude": 0.02}]},
                 "lower": {"far_constant": 0, "modes": [{"k": [0, 1], "amplitude": 0.02}]}},
    "quadrature": {"angular": 16, "radial": 16},
    "stepping": {"t_end": 0.2, "cadence": 2},
    "diagnostics": {"velocity_planes": 1, "velocity_stride": 4,
                    "squirt_probes": [{"center": [3, 3], "aperture": 1}], "tracked_modes": [[1, 0]]}})";
  const Scenario s = parse_scenario_text(text);
  const fs::path a = fresh_dir("run_a"), b = fresh_dir("run_b");
  {
    DirectorySink sink(a, s);
    const auto sum = run_scenario(s, sink);
    EXPECT_EQ(sum.reason, HaltReason::completed);
    ASSERT_EQ(sum.squirt.size(), 1u);
    EXPECT_EQ(sum.squirt[0].verdict->status, SquirtStatus::pass);
  }
  {
    DirectorySink sink(b, s);
    run_scenario(s, sink);
  }
  for (const char* f : {"diagnostics.ndjson", "summary.json", "scenario.json", "snapshots/index.csv"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  const auto records = read_ndjson(a / "diagnostics.ndjson");
  const auto index = read_snapshot_index(a / "snapshots");
  ASSERT_EQ(records.size(), index.size());
  EXPECT_EQ(records.front().step, 0u);
  EXPECT_EQ(records.back().t, 0.2);
  for (const auto& e : index) EXPECT_EQ(slurp(a / "snapshots" / e.file), slurp(b / "snapshots" / e.file));

  // Resuming from the middle snapshot reaches the same final state.
  const auto mid = index[index.size() / 2];
  MemorySink resumed;
  RunOptions opt;
  opt.resume = load_resume_state(s, a / "snapshots" / mid.file);
  run_scenario(s, resumed, opt);
  EXPECT_EQ(resumed.records.front().step, mid.step);
  EXPECT_EQ(resumed.records.back().t, 0.2);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Runner, ZeroHorizonWritesOneRecord) {
  Scenario s = parse_scenario_text(kMinimal);
  s.stepping.t_end = 0.0;
  s.diagnostics.velocity_planes = 1;
  MemorySink sink;
  run_scenario(s, sink);
  EXPECT_EQ(sink.records.size(), 1u);
  EXPECT_EQ(sink.states.size(), 1u);
}
