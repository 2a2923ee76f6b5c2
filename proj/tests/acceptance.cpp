// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "support.hpp"

using namespace muskat;
using namespace muskat::testing;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Signed cosine coefficient of cos(2 pi m x1 / L) in h.
double cos_coefficient(const SurfaceField& h, long m) {
  const Grid2& g = h.grid();
  const std::size_t n = g.resolution();
  const double s = kTwoPi * static_cast<double>(m) / g.side_length();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) acc += h.at(i, j) * std::cos(s * g.coordinate(i));
  return 2.0 * acc / static_cast<double>(n * n);
}

// Fixed-step RK4 from p0 over `steps` steps of size dt; calls obs after each.
template <typename Obs>
ContourPair integrate(const Stepper<>& s, const ContourPair& p0, double dt, std::size_t steps, Obs obs) {
  TimeState st{0.0, p0, 0, 0.0};
  obs(st);
  for (std::size_t i = 0; i < steps; ++i) {
    st = s.step(st, dt);
    obs(st);
  }
  return st.pair;
}

void dispersion_single() {
  const Grid2 g(kTwoPi, 128);
  const double a = 2.0, eps = 1e-3;
  const Stepper<> s(g, default_rule(g, 24, 40), StepControl{});
  StepControl c;
  c.cfl = 1.0;
  bool ok = true;
  std::string detail;
  for (long k : {1L, 2L, 3L}) {
    const double kappa = static_cast<double>(k);
    const double oracle = symbol_oracle(kappa, a, 0.0);
    const double closed = self_symbol(kappa, a);
    const double pre = std::abs(closed - oracle) / std::abs(oracle);
    const ContourPair p0 = ContourPair::single(cosine_surface(g, 0.0, eps, k, 0), 0.0, a);
    const double dt = stable_dt(p0, c);
    std::vector<double> t, amp;
    integrate(s, p0, dt, 16, [&](const TimeState& st) {
      t.push_back(st.t);
      amp.push_back(mode_amplitude(st.pair.upper(), k, 0));
    });
    const double rate = fit_growth_rate(t, amp, 0.1).rate;
    const double rel = std::abs(rate - closed) / std::abs(closed);
    ok = ok && pre <= 1e-6 && rel <= 0.02;
    detail += fmt("|k|=%ld rate=%.5f expected=%.1f rel=%.2e oracle_rel=%.1e; ", k, rate, closed, rel, pre);
  }
  report(1, ok, detail + "(tol 2%, closed form vs oracle 1e-6)");
}

void dispersion_coupled() {
  const Grid2 g(kTwoPi, 64);
  const double eps = 1e-3, T = 0.5;
  const std::size_t steps = 16;
  const Densities rho{0, 2, 4};
  const Stepper<> s(g, default_rule(g, 32, 48), StepControl{});
  const auto predicted = mode_rates(1.0, FlatBase{1.0, 0.0, rho.upper_jump(), rho.lower_jump()});
  // Propagator columns from an f-only and a g-only perturbation.
  double P[2][2];
  for (int col = 0; col < 2; ++col) {
    const ContourPair p0(cosine_surface(g, 1.0, col == 0 ? eps : 0.0, 1, 0, 1.0),
                         cosine_surface(g, 0.0, col == 1 ? eps : 0.0, 1, 0, 0.0), rho);
    const auto pT = integrate(s, p0, T / steps, steps, [](const TimeState&) {});
    P[0][col] = cos_coefficient(pT.upper(), 1) / eps;
    P[1][col] = cos_coefficient(pT.lower(), 1) / eps;
  }
  const double tr = P[0][0] + P[1][1], det = P[0][0] * P[1][1] - P[0][1] * P[1][0];
  const double disc = 0.25 * tr * tr - det;
  if (disc < 0.0) {
    report(2, false, "measured propagator has complex eigenvalues");
    return;
  }
  const double mu[2] = {0.5 * tr - std::sqrt(disc), 0.5 * tr + std::sqrt(disc)};
  bool ok = true;
  std::string detail;
  for (int m = 0; m < 2; ++m) {
    const double lam = std::log(mu[m]) / T, want = predicted.eigenvalues[m].real();
    std::array<double, 2> v{P[0][1], mu[m] - P[0][0]};
    if (std::hypot(v[0], v[1]) < 1e-12) v = {mu[m] - P[1][1], P[1][0]};
    auto angle = [](double x, double y) {
      double d = std::atan2(y, x) * 180.0 / std::numbers::pi;
      while (d < 0.0) d += 180.0;
      while (d >= 180.0) d -= 180.0;
      return d;
    };
    double da = std::abs(angle(v[0], v[1]) - angle(predicted.eigenvectors[m][0], predicted.eigenvectors[m][1]));
    da = std::min(da, 180.0 - da);
    const double rel = std::abs(lam - want) / std::abs(want);
    ok = ok && rel <= 0.03 && da <= 5.0;
    detail += fmt("rate=%.5f expected=%.5f rel=%.2e angle_err=%.3fdeg; ", lam, want, rel, da);
  }
  report(2, ok, detail + "(tol 3%, 5deg)");
}

void rayleigh_taylor() {
  const Grid2 g(kTwoPi, 64);
  const double eps = 1e-3, T = 0.5;
  const std::size_t steps = 16;
  const Stepper<> s(g, default_rule(g, 32, 48), StepControl{});
  double rate[2];
  for (long k : {1L, 2L}) {
    // Heavy fluid (2) above light fluid (0).
    const ContourPair p0 = ContourPair::single(cosine_surface(g, 0.0, eps, k, 0), 2.0, 0.0);
    std::vector<double> t, amp;
    integrate(s, p0, T / steps, steps, [&](const TimeState& st) {
      t.push_back(st.t);
      amp.push_back(mode_amplitude(st.pair.upper(), k, 0));
    });
    rate[k - 1] = fit_growth_rate(t, amp, 0.1).rate;
  }
  const double ratio = rate[1] / rate[0];
  const bool ok = rate[0] > 0.0 && rate[1] > 0.0 && std::abs(ratio - 2.0) <= 0.2;
  report(3, ok, fmt("rate(|k|=1)=%.5f rate(|k|=2)=%.5f ratio=%.4f (want >0 and 2 +- 10%%)", rate[0], rate[1], ratio));
}

void hemisphere() {
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Vec3 n{nd(rng), nd(rng), nd(rng)};
    const double r = norm(n);
    for (auto& c : n) c /= r;
    for (int c = 1; c <= 3; ++c) worst = std::max(worst, std::abs(hemisphere_mean(n, c, 512)));
  }
  const double control = std::abs(hemisphere_mean(Vec3{0, 0, 1}, 3, 512, RieszKernel{}));
  report(4, worst <= 1e-6 && control >= 0.1,
         fmt("max |mean| over 20 normals x 3 components=%.2e (tol 1e-6), odd control=%.4f (want >= 0.1)", worst, control));
}

void darcy_oracle() {
  // Direct quadrature of the velocity of rho = cos(xi.x) against the
  // multiplier applied to the DFT of the same density on a 16^3 grid.
  constexpr std::size_t n = 16;
  const double L = kTwoPi;
  double worst = 0.0;
  std::size_t count = 0;
  for (long a = -4; a <= 4; ++a)
    for (long b = -4; b <= 4; ++b)
      for (long c = 0; c <= 4; ++c) {
        const long r2 = a * a + b * b + c * c;
        if (r2 == 0 || r2 > 16) continue;
        if (c == 0 && (b < 0 || (b == 0 && a < 0))) continue;  // one of +-xi
        PeriodicField3 rho{L, n, std::vector<double>(n * n * n)};
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
              rho.values[(i * n + j) * n + k] =
                  std::cos(kTwoPi * static_cast<double>(a * long(i) + b * long(j) + c * long(k)) / n);
        const auto hat = darcy_multiplier_check(rho, Wave3{a, b, c});
        const Vec3 u = darcy_velocity_single_mode(Vec3{double(a), double(b), double(c)});
        for (int d = 0; d < 3; ++d) worst = std::max(worst, std::abs(u[d] - 2.0 * hat[d].real()));
        ++count;
      }
  report(5, worst <= 1e-3,
         fmt("%zu wave vectors with |xi| <= 4, max |u_direct - m rho^| / |rho^| = %.2e (tol 1e-3)", count, worst));
}

void conservation() {
  const Grid2 g(kTwoPi, 64);
  StepControl c;
  c.t_end = 1.0;
  const Stepper<> s(g, default_rule(g, 16, 32), c);
  double worst = 0.0;
  struct Case {
    Densities rho;
    unsigned seed;
  };
  for (const Case& k : {Case{{0, 1, 2}, 11}, Case{{0.5, 1.5, 4}, 12}}) {
    const ContourPair p(random_surface(g, 1.0, 0.1, k.seed, 2), random_surface(g, 0.0, 0.1, k.seed + 100, 2), k.rho);
    const double f0 = mean_height(p.upper()), g0 = mean_height(p.lower()), scale = f0 - g0;
    const auto out = run_evolution(TimeState{0.0, p, 0, 0.0}, s, 1, [&](const TimeState& st, bool) {
      worst = std::max(worst, std::abs(mean_height(st.pair.upper()) - f0) / scale);
      worst = std::max(worst, std::abs(mean_height(st.pair.lower()) - g0) / scale);
    });
    if (out.reason != HaltReason::completed) {
      report(6, false, "run halted: " + out.message);
      return;
    }
  }
  report(6, worst <= 1e-6, fmt("max mean drift / mean gap over t in [0,1], 2 runs = %.2e (tol 1e-6)", worst));
}

void decoupling() {
  const Grid2 g(kTwoPi, 32);
  const auto f = random_surface(g, 1.0, 0.2, 21, 2);
  const auto lo = random_surface(g, 0.0, 0.2, 22, 2);
  StepControl c;
  c.t_end = 0.3;
  const Stepper<> s(g, default_rule(g, 16, 24), c);
  std::vector<std::vector<double>> a, b;
  run_evolution(TimeState{0.0, ContourPair(f, lo, Densities{0, 2, 2}), 0, 0.0}, s, 1,
                [&](const TimeState& st, bool) {
                  const auto v = st.pair.upper().values();
                  a.emplace_back(v.begin(), v.end());
                });
  run_evolution(TimeState{0.0, ContourPair::single(f, 0.0, 2.0), 0, 0.0}, s, 1,
                [&](const TimeState& st, bool) {
                  const auto v = st.pair.upper().values();
                  b.emplace_back(v.begin(), v.end());
                });
  double worst = a.size() == b.size() ? 0.0 : 1.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) worst = std::max(worst, max_abs_diff(a[i], b[i]));
  report(7, worst <= 1e-10, fmt("max |f_two - f_single| over %zu states = %.2e (tol 1e-10)", a.size(), worst));
}

struct SuiteResult {
  std::string name;
  bool all_pass = true;
  std::size_t probes = 0;
  double worst_change = 0.0;
  double ratio_min = 1e300, ratio_max = 0.0;
  double e_max = 0.0;
  std::string halt;
};

// Regression suite: five stable scenarios and one near approach.
std::vector<SuiteResult> regression_suite() {
  const std::vector<std::pair<std::string, std::string>> scenarios = {
      {"low_mode", R"({"densities": {"rho1": 0, "rho2": 1, "rho3": 2},
        "grid": {"side_length": 6.283185307179586, "resolution": 32},
        "surfaces": {"upper": {"far_constant": 1, "modes": [{"k": [1, 0], "amplitude": 0.02}]},
                     "lower": {"far_constant": 0, "modes": [{"k": [0, 1], "amplitude": 0.02}]}},
        "quadrature": {"angular": 16, "radial": 24}})"},
      {"high_mode", R"({"densities": {"rho1": 0, "rho2": 1, "rho3": 2},
        "grid": {"side_length": 6.283185307179586, "resolution": 64},
        "surfaces": {"upper": {"far_constant": 1, "modes": [{"k": [8, 0], "amplitude": 0.008}]},
                     "lower": {"far_constant": 0, "modes": [{"k": [0, 6], "amplitude": 0.008}]}},
        "quadrature": {"angular": 24, "radial": 40}})"},
      {"random_band", R"({"densities": {"rho1": 0, "rho2": 1, "rho3": 2},
        "grid": {"side_length": 6.283185307179586, "resolution": 32},
        "surfaces": {"upper": {"far_constant": 1, "random_band": {"k_min": 1, "k_max": 3, "amplitude": 0.02}},
                     "lower": {"far_constant": 0, "random_band": {"k_min": 1, "k_max": 3, "amplitude": 0.02}}},
        "quadrature": {"angular": 16, "radial": 24}, "seed": 5})"},
      {"thick_layer", R"({"densities": {"rho1": 0, "rho2": 0.5, "rho3": 2},
        "grid": {"side_length": 6.283185307179586, "resolution": 32},
        "surfaces": {"upper": {"far_constant": 2, "modes": [{"k": [1, 1], "amplitude": 0.01}]},
                     "lower": {"far_constant": 0, "modes": [{"k": [1, 0], "amplitude": 0.01}]}},
        "quadrature": {"angular": 16, "radial": 24}})"},
      {"strong_contrast", R"({"densities": {"rho1": 0, "rho2": 2, "rho3": 5},
        "grid": {"side_length": 6.283185307179586, "resolution": 32},
        "surfaces": {"upper": {"far_constant": 1, "modes": [{"k": [2, 1], "amplitude": 0.02}]},
                     "lower": {"far_constant": 0, "modes": [{"k": [1, 2], "amplitude": 0.02}]}},
        "quadrature": {"angular": 16, "radial": 24}})"},
      {"near_approach", R"({"densities": {"rho1": 0, "rho2": 1, "rho3": 2},
        "grid": {"side_length": 3.141592653589793, "resolution": 64},
        "surfaces": {"upper": {"far_constant": 0.2, "modes": [{"k": [1, 0], "amplitude": 0.01}]},
                     "lower": {"far_constant": 0, "modes": [{"k": [1, 0], "amplitude": 0.01}]}},
        "quadrature": {"angular": 24, "radial": 40}})"},
  };
  std::vector<SuiteResult> out;
  for (const auto& [name, body] : scenarios) {
    Scenario s = parse_scenario_text(body);
    s.stepping.t_end = 0.5;
    s.diagnostics.velocity_planes = 1;
    s.diagnostics.velocity_stride = 2;
    s.diagnostics.gammas = {0.5};
    const double L = s.side_length;
    s.diagnostics.squirt_probes = {SquirtProbe{{0.5 * L, 0.5 * L}, 0.25 * L}, SquirtProbe{{0.2 * L, 0.7 * L}, 0.15 * L}};
    MemorySink sink;
    const RunSummary sum = run_scenario(s, sink);
    SuiteResult r;
    r.name = name;
    r.halt = to_string(sum.reason);
    if (sum.reason != HaltReason::completed || !sum.trusted) r.all_pass = false;
    for (const auto& p : sum.squirt) {
      ++r.probes;
      if (!p.verdict || p.verdict->status != SquirtStatus::pass) {
        r.all_pass = false;
        continue;
      }
      r.worst_change = std::min(r.worst_change, p.verdict->worst_change / p.verdict->volume_t0);
    }
    for (const auto& rec : sink.records) {
      const double ratio = rec.u_sup / rec.brackets.at(0).value;
      r.ratio_min = std::min(r.ratio_min, ratio);
      r.ratio_max = std::max(r.ratio_max, ratio);
      r.e_max = std::max(r.e_max, rec.energy.total);
    }
    std::printf("  suite %-16s halt=%s E_max=%.4g ratio=[%.4g, %.4g] worst_rel_dVol=%.2e\n", name.c_str(),
                r.halt.c_str(), r.e_max, r.ratio_min, r.ratio_max, r.worst_change);
    out.push_back(r);
  }
  return out;
}

void squirt_and_bracket() {
  const auto suite = regression_suite();
  bool ok = true;
  std::size_t probes = 0;
  double worst = 0.0;
  for (const auto& r : suite) {
    ok = ok && r.all_pass;
    probes += r.probes;
    worst = std::min(worst, r.worst_change);
  }
  report(8, ok,
         fmt("%zu runs, %zu probes all PASS=%s, most negative dVol/Vol(t0) per step = %.2e (tol -1e-6)", suite.size(),
             probes, ok ? "yes" : "no", worst));
  double lo = 1e300, hi = 0.0, emin = 1e300, emax = 0.0;
  for (const auto& r : suite) {
    lo = std::min(lo, r.ratio_min);
    hi = std::max(hi, r.ratio_max);
    emin = std::min(emin, r.e_max);
    emax = std::max(emax, r.e_max);
  }
  const bool positive = lo > 0.0;
  const double band = positive ? hi / lo : INFINITY;
  report(9, positive && band <= 10.0 && emax / emin >= 100.0,
         fmt("u_sup/bracket(1/2) in [%.4g, %.4g], band=%.3f (tol 10) over energies spanning %.1fx (need >= 100)", lo, hi,
             band, emax / emin));
}

void self_convergence() {
  const Grid2 g(kTwoPi, 32);
  const auto f = SurfaceField::from_function(
      g, [](double x, double y) { return 1.0 + 0.1 * std::cos(x) + 0.05 * std::sin(x + y); }, 1.0);
  const auto lo = SurfaceField::from_function(g, [](double, double y) { return -0.5 + 0.1 * std::cos(y); }, 0.0);
  const ContourPair pair(f, lo, Densities{1, 2, 3});
  // Levels 1..4 of a rule whose radial cells halve and angular count doubles per level.
  PolarQuadRule r = default_rule(g, 8, 12).refined();
  std::vector<std::vector<double>> res;
  for (int l = 0; l < 4; ++l) {
    res.push_back(interface_rhs(pair, r).upper);
    r = r.refined();
  }
  const double e1 = max_abs_diff(res[0], res[3]), e2 = max_abs_diff(res[1], res[3]);
  const double quad_order = std::log2(e1 / e2);

  const Grid2 gt(kTwoPi, 16);
  const Stepper<> s(gt, default_rule(gt, 16, 24), StepControl{});
  const ContourPair p0(random_surface(gt, 0.6, 0.3, 3, 2), random_surface(gt, 0.0, 0.3, 4, 2), Densities{0, 1, 3});
  const double T = 0.2;
  auto advance = [&](std::size_t n) {
    const auto p = integrate(s, p0, T / n, n, [](const TimeState&) {});
    return std::vector<double>(p.upper().values().begin(), p.upper().values().end());
  };
  const auto ref = advance(64);
  const double t1 = max_abs_diff(advance(1), ref), t2 = max_abs_diff(advance(2), ref);
  const double rk_order = std::log2(t1 / t2);
  report(10, quad_order >= 1.8 && rk_order >= 3.8,
         fmt("quadrature errors %.3e -> %.3e order %.3f (need >= 1.8); RK4 errors %.3e -> %.3e order %.3f (need >= 3.8)",
             e1, e2, quad_order, t1, t2, rk_order));
}

void splitting() {
  const Grid2 g(kTwoPi, 64);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_add = 0.0, worst_near = 0.0;
  std::size_t cut = 0;
  const double gamma = 0.5, bound = near_piece_bound(gamma);
  for (unsigned i = 0; i < 10; ++i) {
    const double amp = 0.02 + 0.06 * u(rng);
    const ContourPair p(random_surface(g, 1.0, amp, 300 + i, 2), random_surface(g, 0.0, amp, 400 + i, 2),
                        Densities{0, 1, 2});
    // Points within 0.25 of the upper surface so the ball meets Omega1.
    const double x1 = kTwoPi * u(rng), x2 = kTwoPi * u(rng);
    const SampledSurface<HermiteSampling> fs(p.upper(), spectral_derivatives(p.upper()));
    const Vec3 x{x1, x2, fs.at_point(x1, x2).h + 0.5 * (u(rng) - 0.5)};
    const int comp = 1 + static_cast<int>(i % 3);
    const auto e = bound_splitting_eval(p, x, gamma, comp);
    const double scale = std::max({std::abs(e.unsplit), std::abs(e.near), std::abs(e.far)});
    worst_add = std::max(worst_add, std::abs(e.total - e.unsplit) / scale);
    worst_near = std::max(worst_near, std::abs(e.near));
    if (e.near != 0.0) ++cut;
  }
  report(11, worst_add <= 1e-8 && worst_near <= bound * (1.0 + 1e-6) && cut > 0,
         fmt("max |near+far-unsplit|/scale = %.2e (tol 1e-8); max |near| = %.4f vs constant %.4f; %zu/10 with a "
             "nonempty near region",
             worst_add, worst_near, bound, cut));
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number; default runs all.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
  const auto t0 = std::chrono::steady_clock::now();
  auto guarded = [&](int id, void (*fn)()) {
    if (!wanted(id)) return;
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, std::string("exception: ") + e.what());
    }
  };
  guarded(1, dispersion_single);
  guarded(2, dispersion_coupled);
  guarded(3, rayleigh_taylor);
  guarded(4, hemisphere);
  guarded(5, darcy_oracle);
  guarded(6, conservation);
  guarded(7, decoupling);
  if (wanted(8) || wanted(9)) {
    try {
      squirt_and_bracket();
    } catch (const std::exception& e) {
      report(8, false, std::string("exception: ") + e.what());
      report(9, false, "regression suite did not run");
    }
  }
  guarded(10, self_convergence);
  guarded(11, splitting);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d failure(s), %.1f s\n", failures, secs);
  return failures == 0 ? 0 : 1;
}
