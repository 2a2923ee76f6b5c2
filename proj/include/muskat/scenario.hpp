#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "muskat/diagnostics.hpp"
#include "muskat/error.hpp"
#include "muskat/evolution.hpp"
#include "muskat/grid.hpp"
#include "muskat/quadrature.hpp"

namespace muskat {

using Json = nlohmann::ordered_json;

struct ModeSpec {
  std::array<long, 2> k{1, 0};  // integer wave vector; physical 2 pi k / L
  double amplitude = 0.0;
  double phase = 0.0;
  bool operator==(const ModeSpec&) const = default;
};

/// Every integer mode with k_min <= |k| <= k_max (one of each +-k pair) gets a
/// uniform amplitude in [-amplitude, amplitude] and a uniform phase.
struct RandomBand {
  double k_min = 1.0;
  double k_max = 4.0;
  double amplitude = 0.0;
  bool operator==(const RandomBand&) const = default;
};

struct SurfaceSpec {
  double far_constant = 0.0;
  std::vector<ModeSpec> modes;
  std::optional<RandomBand> random_band;
  bool operator==(const SurfaceSpec&) const = default;
};

struct QuadratureSpec {
  std::size_t angular = 64;
  std::size_t radial = 0;  // 0 before defaults are resolved
  double ratio = 0.85;
  double far_radius = 0.0;
  double min_radius = 0.0;
  bool operator==(const QuadratureSpec&) const = default;
};

struct SteppingSpec {
  double c_cfl = 0.5;
  double dt_max = std::numeric_limits<double>::infinity();
  double t_end = 1.0;
  std::size_t cadence = 1;
  double collision_floor_cells = 0.5;
  double trusted_gap_cells = 4.0;
  double amplitude_cap = 0.1;
  bool operator==(const SteppingSpec&) const = default;
};

struct DiagnosticsSpec {
  int energy_order = 4;
  std::vector<double> gammas{0.5};
  std::size_t velocity_planes = 3;
  std::size_t velocity_stride = 1;
  std::vector<SquirtProbe> squirt_probes;
  std::vector<std::array<long, 2>> tracked_modes;
  bool operator==(const DiagnosticsSpec& o) const {
    if (squirt_probes.size() != o.squirt_probes.size()) return false;
    for (std::size_t i = 0; i < squirt_probes.size(); ++i)
      if (squirt_probes[i].center != o.squirt_probes[i].center ||
          squirt_probes[i].aperture != o.squirt_probes[i].aperture)
        return false;
    return energy_order == o.energy_order && gammas == o.gammas && velocity_planes == o.velocity_planes &&
           velocity_stride == o.velocity_stride && tracked_modes == o.tracked_modes;
  }
};

/// Complete description of one experiment.
struct Scenario {
  Densities densities;
  double side_length = 2.0 * std::numbers::pi;
  std::size_t resolution = 64;
  SurfaceSpec upper{1.0, {}, std::nullopt};
  std::optional<SurfaceSpec> lower = SurfaceSpec{};
  QuadratureSpec quadrature;
  SteppingSpec stepping;
  DiagnosticsSpec diagnostics;
  std::uint64_t seed = 0;

  bool operator==(const Scenario&) const = default;

  Grid2 grid() const { return Grid2(side_length, resolution); }
  double far_constant() const noexcept { return upper.far_constant; }

  PolarQuadRule rule() const {
    return PolarQuadRule::graded(quadrature.angular, quadrature.radial, quadrature.ratio, quadrature.far_radius,
                                 quadrature.min_radius);
  }

  StepControl control() const {
    StepControl c;
    c.cfl = stepping.c_cfl;
    c.dt_max = stepping.dt_max;
    c.t_end = stepping.t_end;
    c.halt_gap_cells = stepping.collision_floor_cells;
    c.trusted_gap_cells = stepping.trusted_gap_cells;
    c.amplitude_cap = stepping.amplitude_cap;
    return c;
  }

  RecordSettings record_settings() const {
    RecordSettings r;
    r.energy_order = diagnostics.energy_order;
    r.gammas = diagnostics.gammas;
    r.samples = SampleSpec{true, diagnostics.velocity_planes, diagnostics.velocity_stride};
    return r;
  }

  /// Initial surfaces sampled on the grid. Throws ValidationError on a
  /// non-positive gap.
  ContourPair initial_pair() const;
};

namespace detail {

inline SurfaceField build_surface(const Grid2& grid, const SurfaceSpec& spec, std::uint64_t seed) {
  const std::size_t n = grid.resolution();
  const double L = grid.side_length();
  std::vector<ModeSpec> modes = spec.modes;
  if (spec.random_band && spec.random_band->amplitude != 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-spec.random_band->amplitude, spec.random_band->amplitude);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const auto reach = static_cast<long>(std::ceil(spec.random_band->k_max));
    for (long a = 0; a <= reach; ++a) {
      for (long b = -reach; b <= reach; ++b) {
        if (a == 0 && b <= 0) continue;
        const double r = std::hypot(static_cast<double>(a), static_cast<double>(b));
        if (r < spec.random_band->k_min || r > spec.random_band->k_max) continue;
        const double amplitude = amp(rng);
        modes.push_back({{a, b}, amplitude, phase(rng)});
      }
    }
  }
  std::vector<double> v(grid.size(), spec.far_constant);
  for (const auto& m : modes) {
    const double c1 = 2.0 * std::numbers::pi * static_cast<double>(m.k[0]) / L;
    const double c2 = 2.0 * std::numbers::pi * static_cast<double>(m.k[1]) / L;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        v[i * n + j] += m.amplitude * std::cos(c1 * grid.coordinate(i) + c2 * grid.coordinate(j) + m.phase);
  }
  return SurfaceField(grid, std::move(v), spec.far_constant);
}

}  // namespace detail

inline ContourPair Scenario::initial_pair() const {
  const Grid2 g = grid();
  auto f = detail::build_surface(g, upper, seed * 2 + 1);
  const Densities& rho = densities;
  if (!lower) return ContourPair::single(std::move(f), rho.upper, rho.middle);
  auto lo = detail::build_surface(g, *lower, seed * 2 + 2);
  const auto gap = minimum_gap(f, lo);
  if (!(gap.gap > 0.0)) {
    const std::size_t n = g.resolution();
    std::ostringstream os;
    os << "initial gap " << gap.gap << " <= 0 at node (" << gap.node / n << ", " << gap.node % n << ")";
    throw ValidationError("surfaces", os.str());
  }
  return ContourPair(std::move(f), std::move(lo), rho);
}

// ---------------------------------------------------------------------------
// JSON reading with unknown-key rejection

namespace detail {

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  /// Call after reading every known key.
  void finish(std::initializer_list<const char*> known) const {
    std::set<std::string> k(known.begin(), known.end());
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!k.count(it.key())) throw ValidationError(sub(it.key()), "unknown key '" + it.key() + "'");
  }

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const Json& at(const char* key) const { return j_.at(key); }
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number()) throw ValidationError(sub(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(sub(key), "must be finite");
    return d;
  }

  long integer(const char* key, long fallback) const {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) throw ValidationError(sub(key), "expected an integer");
    return v.get<long>();
  }

  std::size_t count(const char* key, std::size_t fallback, std::size_t min_value) const {
    const long v = integer(key, static_cast<long>(fallback));
    if (v < static_cast<long>(min_value))
      throw ValidationError(sub(key), "must be >= " + std::to_string(min_value));
    return static_cast<std::size_t>(v);
  }

 private:
  const Json& j_;
  std::string path_;
};

inline std::array<long, 2> read_wave(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    throw ValidationError(path, "expected a pair of integers");
  return {j[0].get<long>(), j[1].get<long>()};
}

inline SurfaceSpec read_surface(const Json& j, const std::string& path, double default_far) {
  Reader r(j, path);
  SurfaceSpec s;
  s.far_constant = r.number("far_constant", default_far);
  if (r.has("modes")) {
    const Json& m = r.at("modes");
    if (!m.is_array()) throw ValidationError(r.sub("modes"), "expected an array");
    for (std::size_t i = 0; i < m.size(); ++i) {
      const std::string p = r.sub("modes") + "[" + std::to_string(i) + "]";
      Reader mr(m[i], p);
      ModeSpec ms;
      if (!mr.has("k")) throw ValidationError(p + ".k", "required");
      ms.k = read_wave(mr.at("k"), p + ".k");
      if (ms.k[0] == 0 && ms.k[1] == 0) throw ValidationError(p + ".k", "wave vector must be nonzero");
      ms.amplitude = mr.number("amplitude", 0.0);
      ms.phase = mr.number("phase", 0.0);
      mr.finish({"k", "amplitude", "phase"});
      s.modes.push_back(ms);
    }
  }
  if (r.has("random_band")) {
    Reader br(r.at("random_band"), r.sub("random_band"));
    RandomBand b;
    b.k_min = br.number("k_min", b.k_min);
    b.k_max = br.number("k_max", b.k_max);
    b.amplitude = br.number("amplitude", b.amplitude);
    br.finish({"k_min", "k_max", "amplitude"});
    if (!(b.k_min > 0.0 && b.k_max >= b.k_min))
      throw ValidationError(r.sub("random_band"), "needs 0 < k_min <= k_max");
    s.random_band = b;
  }
  r.finish({"far_constant", "modes", "random_band"});
  return s;
}

}  // namespace detail

/// Validates and fills defaults. Every error names the offending field path.
inline Scenario scenario_from_json(const Json& root) {
  using detail::Reader;
  Reader r(root, "");
  r.finish({"densities", "grid", "surfaces", "quadrature", "stepping", "diagnostics", "seed"});
  Scenario s;

  if (r.has("densities")) {
    Reader d(r.at("densities"), "densities");
    s.densities.upper = d.number("rho1", s.densities.upper);
    s.densities.middle = d.number("rho2", s.densities.middle);
    s.densities.lower = d.number("rho3", s.densities.lower);
    d.finish({"rho1", "rho2", "rho3"});
  }

  if (!r.has("grid")) throw ValidationError("grid", "required");
  {
    Reader g(r.at("grid"), "grid");
    if (!g.has("side_length")) throw ValidationError("grid.side_length", "required");
    if (!g.has("resolution")) throw ValidationError("grid.resolution", "required");
    s.side_length = g.number("side_length", s.side_length);
    s.resolution = g.count("resolution", 0, 8);
    g.finish({"side_length", "resolution"});
    if (!(s.side_length > 0.0)) throw ValidationError("grid.side_length", "must be positive");
    if ((s.resolution & (s.resolution - 1)) != 0) throw ValidationError("grid.resolution", "must be a power of two");
  }

  bool lower_given = true;
  if (r.has("surfaces")) {
    Reader sr(r.at("surfaces"), "surfaces");
    if (sr.has("upper")) s.upper = detail::read_surface(sr.at("upper"), "surfaces.upper", 1.0);
    if (root.at("surfaces").contains("lower") && root.at("surfaces").at("lower").is_null()) {
      s.lower.reset();
      lower_given = false;
    } else if (sr.has("lower")) {
      s.lower = detail::read_surface(sr.at("lower"), "surfaces.lower", 0.0);
    }
    sr.finish({"upper", "lower"});
  }
  if (!lower_given && s.densities.lower != s.densities.middle) {
    if (r.has("densities") && root.at("densities").contains("rho3"))
      throw ValidationError("densities.rho3", "a single interface needs rho3 equal to rho2 (or rho3 omitted)");
    s.densities.lower = s.densities.middle;
  }

  const double dx = s.side_length / static_cast<double>(s.resolution);
  {
    QuadratureSpec& q = s.quadrature;
    q.radial = s.resolution / 2 + 16;
    q.far_radius = s.side_length / 2.0;
    q.min_radius = dx / 8.0;
    if (r.has("quadrature")) {
      Reader qr(r.at("quadrature"), "quadrature");
      q.angular = qr.count("angular", q.angular, 2);
      q.radial = qr.count("radial", q.radial, 2);
      q.ratio = qr.number("ratio", q.ratio);
      q.far_radius = qr.number("far_radius", q.far_radius);
      q.min_radius = qr.number("min_radius", q.min_radius);
      qr.finish({"angular", "radial", "ratio", "far_radius", "min_radius"});
    }
    if (q.angular % 2 != 0) throw ValidationError("quadrature.angular", "must be even");
    if (!(q.ratio > 0.0 && q.ratio < 1.0)) throw ValidationError("quadrature.ratio", "must lie in (0, 1)");
    if (!(q.far_radius > 0.0 && q.far_radius <= s.side_length / 2.0))
      throw ValidationError("quadrature.far_radius", "must lie in (0, L/2]");
    if (!(q.min_radius > 0.0 && q.min_radius < q.far_radius))
      throw ValidationError("quadrature.min_radius", "must lie in (0, far_radius)");
  }

  if (r.has("stepping")) {
    Reader st(r.at("stepping"), "stepping");
    SteppingSpec& p = s.stepping;
    p.c_cfl = st.number("c_cfl", p.c_cfl);
    p.dt_max = st.number("dt_max", p.dt_max);
    p.t_end = st.number("t_end", p.t_end);
    p.cadence = st.count("cadence", p.cadence, 1);
    p.collision_floor_cells = st.number("collision_floor_cells", p.collision_floor_cells);
    p.trusted_gap_cells = st.number("trusted_gap_cells", p.trusted_gap_cells);
    p.amplitude_cap = st.number("amplitude_cap", p.amplitude_cap);
    st.finish({"c_cfl", "dt_max", "t_end", "cadence", "collision_floor_cells", "trusted_gap_cells",
               "amplitude_cap"});
  }
  {
    const SteppingSpec& p = s.stepping;
    if (!(p.c_cfl > 0.0 && p.c_cfl <= 1.0)) throw ValidationError("stepping.c_cfl", "must lie in (0, 1]");
    if (!(p.dt_max > 0.0)) throw ValidationError("stepping.dt_max", "must be positive");
    if (!(p.t_end >= 0.0)) throw ValidationError("stepping.t_end", "must be >= 0");
    if (!(p.collision_floor_cells > 0.0))
      throw ValidationError("stepping.collision_floor_cells", "must be positive");
    if (!(p.trusted_gap_cells > 0.0)) throw ValidationError("stepping.trusted_gap_cells", "must be positive");
    if (!(p.amplitude_cap >= 0.0)) throw ValidationError("stepping.amplitude_cap", "must be >= 0");
  }

  if (r.has("diagnostics")) {
    Reader dr(r.at("diagnostics"), "diagnostics");
    DiagnosticsSpec& d = s.diagnostics;
    const long k = dr.integer("energy_order", d.energy_order);
    if (k < 0 || k > 8) throw ValidationError("diagnostics.energy_order", "must lie in [0, 8]");
    d.energy_order = static_cast<int>(k);
    if (dr.has("gammas")) {
      const Json& g = dr.at("gammas");
      if (!g.is_array() || g.empty()) throw ValidationError("diagnostics.gammas", "expected a non-empty array");
      d.gammas.clear();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const std::string p = "diagnostics.gammas[" + std::to_string(i) + "]";
        if (!g[i].is_number()) throw ValidationError(p, "expected a number");
        const double v = g[i].get<double>();
        if (!(v > 0.0 && v < 1.0)) throw ValidationError(p, "must lie in (0, 1)");
        d.gammas.push_back(v);
      }
    }
    d.velocity_planes = dr.count("velocity_planes", d.velocity_planes, 0);
    d.velocity_stride = dr.count("velocity_stride", d.velocity_stride, 1);
    if (dr.has("squirt_probes")) {
      const Json& pr = dr.at("squirt_probes");
      if (!pr.is_array()) throw ValidationError("diagnostics.squirt_probes", "expected an array");
      for (std::size_t i = 0; i < pr.size(); ++i) {
        const std::string p = "diagnostics.squirt_probes[" + std::to_string(i) + "]";
        Reader rr(pr[i], p);
        SquirtProbe probe;
        if (!rr.has("center")) throw ValidationError(p + ".center", "required");
        const Json& c = rr.at("center");
        if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
          throw ValidationError(p + ".center", "expected two numbers");
        probe.center = {c[0].get<double>(), c[1].get<double>()};
        probe.aperture = rr.number("aperture", probe.aperture);
        rr.finish({"center", "aperture"});
        if (!(probe.aperture > 0.0 && probe.aperture < s.side_length))
          throw ValidationError(p + ".aperture", "must lie in (0, side_length)");
        d.squirt_probes.push_back(probe);
      }
    }
    if (dr.has("tracked_modes")) {
      const Json& tm = dr.at("tracked_modes");
      if (!tm.is_array()) throw ValidationError("diagnostics.tracked_modes", "expected an array");
      for (std::size_t i = 0; i < tm.size(); ++i) {
        const std::string p = "diagnostics.tracked_modes[" + std::to_string(i) + "]";
        auto w = detail::read_wave(tm[i], p);
        if (w[0] == 0 && w[1] == 0) throw ValidationError(p, "wave vector must be nonzero");
        d.tracked_modes.push_back(w);
      }
    }
    dr.finish({"energy_order", "gammas", "velocity_planes", "velocity_stride", "squirt_probes", "tracked_modes"});
  }

  if (r.has("seed")) {
    const Json& v = r.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ValidationError("seed", "expected a non-negative integer");
    s.seed = v.get<std::uint64_t>();
  }

  (void)s.initial_pair();  // gap validation
  return s;
}

inline Json scenario_to_json(const Scenario& s) {
  auto surface = [](const SurfaceSpec& sp) {
    Json j;
    j["far_constant"] = sp.far_constant;
    Json modes = Json::array();
    for (const auto& m : sp.modes)
      modes.push_back(Json{{"k", {m.k[0], m.k[1]}}, {"amplitude", m.amplitude}, {"phase", m.phase}});
    j["modes"] = modes;
    if (sp.random_band)
      j["random_band"] = Json{{"k_min", sp.random_band->k_min},
                              {"k_max", sp.random_band->k_max},
                              {"amplitude", sp.random_band->amplitude}};
    return j;
  };
  Json j;
  j["densities"] = Json{{"rho1", s.densities.upper}, {"rho2", s.densities.middle}, {"rho3", s.densities.lower}};
  j["grid"] = Json{{"side_length", s.side_length}, {"resolution", s.resolution}};
  Json surfaces;
  surfaces["upper"] = surface(s.upper);
  surfaces["lower"] = s.lower ? surface(*s.lower) : Json(nullptr);
  j["surfaces"] = surfaces;
  j["quadrature"] = Json{{"angular", s.quadrature.angular},
                         {"radial", s.quadrature.radial},
                         {"ratio", s.quadrature.ratio},
                         {"far_radius", s.quadrature.far_radius},
                         {"min_radius", s.quadrature.min_radius}};
  Json st;
  st["c_cfl"] = s.stepping.c_cfl;
  st["dt_max"] = std::isfinite(s.stepping.dt_max) ? Json(s.stepping.dt_max) : Json(nullptr);
  st["t_end"] = s.stepping.t_end;
  st["cadence"] = s.stepping.cadence;
  st["collision_floor_cells"] = s.stepping.collision_floor_cells;
  st["trusted_gap_cells"] = s.stepping.trusted_gap_cells;
  st["amplitude_cap"] = s.stepping.amplitude_cap;
  j["stepping"] = st;
  Json d;
  d["energy_order"] = s.diagnostics.energy_order;
  d["gammas"] = s.diagnostics.gammas;
  d["velocity_planes"] = s.diagnostics.velocity_planes;
  d["velocity_stride"] = s.diagnostics.velocity_stride;
  Json probes = Json::array();
  for (const auto& p : s.diagnostics.squirt_probes)
    probes.push_back(Json{{"center", {p.center[0], p.center[1]}}, {"aperture", p.aperture}});
  d["squirt_probes"] = probes;
  Json modes = Json::array();
  for (const auto& m : s.diagnostics.tracked_modes) modes.push_back(Json{m[0], m[1]});
  d["tracked_modes"] = modes;
  j["diagnostics"] = d;
  j["seed"] = s.seed;
  return j;
}

inline Scenario parse_scenario_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError("<root>", std::string("malformed JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

inline Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("<file>", "cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str());
}

}  // namespace muskat
