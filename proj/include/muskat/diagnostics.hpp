#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "muskat/error.hpp"
#include "muskat/grid.hpp"
#include "muskat/norms.hpp"
#include "muskat/parallel.hpp"
#include "muskat/quadrature.hpp"
#include "muskat/velocity.hpp"

namespace muskat {

/// E = |f - C_inf|_{H^k} + |g|_{H^k} + |d(f,g)|_inf. A single interface has
/// no g terms and no distance term.
struct EnergyTerms {
  double upper_hk = 0.0;
  double lower_hk = 0.0;
  double d_sup = 0.0;
  double total = 0.0;
};

inline EnergyTerms energy(const ContourPair& pair, int k) {
  if (k < 0) throw ParameterError("energy order k must be >= 0");
  EnergyTerms e;
  e.upper_hk = sobolev_norm(pair.upper(), k);
  if (pair.has_lower()) {
    e.lower_hk = sobolev_norm(pair.lower(), k);
    e.d_sup = contour_distance_sup(pair);
  }
  e.total = e.upper_hk + e.lower_hk + e.d_sup;
  return e;
}

/// Where |u| is sampled: both interface limits at every `stride`-th node in
/// each direction plus `planes` horizontal levels.
struct SampleSpec {
  bool interface_limits = true;
  std::size_t planes = 3;
  std::size_t stride = 1;
};

/// Heights of the sampling planes: evenly between the mean surfaces, or for a
/// single interface below it at spacing L / (2 pi (planes + 1)).
inline std::vector<double> sample_plane_levels(const ContourPair& pair, std::size_t planes) {
  std::vector<double> z;
  const double top = mean_height(pair.upper());
  const double p1 = static_cast<double>(planes + 1);
  if (pair.has_lower()) {
    const double bottom = mean_height(pair.lower());
    for (std::size_t j = 1; j <= planes; ++j) z.push_back(bottom + (top - bottom) * static_cast<double>(j) / p1);
  } else {
    const double scale = pair.grid().side_length() / (2.0 * std::numbers::pi);
    for (std::size_t j = 1; j <= planes; ++j) z.push_back(top - scale * static_cast<double>(j) / p1);
  }
  return z;
}

/// max |u| over the sample set; a lower estimate of sup |u|.
template <typename Sampling = HermiteSampling>
double velocity_sup(const ContourPair& pair, const PolarQuadRule& rule, const SampleSpec& spec = {}) {
  if ((!spec.interface_limits && spec.planes == 0) || spec.stride == 0)
    throw ParameterError("velocity sample set is empty");
  const VelocityField<Sampling> field(pair, rule);
  const Grid2& grid = pair.grid();
  const std::size_t n = grid.resolution();
  const auto levels = sample_plane_levels(pair, spec.planes);
  const std::size_t rows = (n + spec.stride - 1) / spec.stride;
  std::vector<double> row_max(rows, 0.0);
  parallel_for(0, rows, [&](std::size_t r) {
    const std::size_t i = r * spec.stride;
    double m = 0.0;
    for (std::size_t j = 0; j < n; j += spec.stride) {
      if (spec.interface_limits) {
        m = std::max(m, norm(field.at_node(i, j, 0.0, VelocityMode::upper_limit)));
        if (pair.has_lower()) m = std::max(m, norm(field.at_node(i, j, 0.0, VelocityMode::lower_limit)));
      }
      const double fh = pair.upper()[i * n + j];
      const double gh = pair.has_lower() ? pair.lower()[i * n + j] : fh;
      for (double z : levels) {
        if (z == fh || z == gh) continue;
        m = std::max(m, norm(field.at_node(i, j, z)));
      }
    }
    row_max[r] = m;
  });
  return *std::max_element(row_max.begin(), row_max.end());
}

/// 1 + 1/gamma + (1/gamma) ln(1 + H_f + H_g)
///   + ln(1 + |f - C_inf|_inf + |C_inf| + |grad f|_2 + |g|_inf + |grad g|_2),
/// H the gradient Hoelder estimates. The constant in front is taken as 1.
inline double bound_bracket(const ContourPair& pair, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0, 1)");
  const SurfaceField& f = pair.upper();
  double holder = holder_norm_grad(f, gamma);
  double sizes = sup_norm_deviation(f) + std::abs(f.far_constant()) + gradient_l2_norm(f);
  if (pair.has_lower()) {
    holder += holder_norm_grad(pair.lower(), gamma);
    sizes += sup_norm(pair.lower()) + gradient_l2_norm(pair.lower());
  }
  return 1.0 + 1.0 / gamma + std::log1p(holder) / gamma + std::log1p(sizes);
}

struct BracketValue {
  double gamma;
  double value;
};

/// One time sample of every tracked diagnostic.
struct DiagnosticsRecord {
  double t = 0.0;
  std::size_t step = 0;
  double dt = 0.0;
  EnergyTerms energy;
  double u_sup = 0.0;
  std::vector<BracketValue> brackets;
  double mean_f = 0.0;
  std::optional<double> mean_g;
  std::optional<double> min_gap;
};

struct RecordSettings {
  int energy_order = 4;
  std::vector<double> gammas{0.5};
  SampleSpec samples;
};

template <typename Sampling = HermiteSampling>
DiagnosticsRecord make_record(const ContourPair& pair, double t, std::size_t step, double dt,
                              const PolarQuadRule& rule, const RecordSettings& settings) {
  DiagnosticsRecord r;
  r.t = t;
  r.step = step;
  r.dt = dt;
  r.energy = energy(pair, settings.energy_order);
  r.u_sup = velocity_sup<Sampling>(pair, rule, settings.samples);
  for (double g : settings.gammas) r.brackets.push_back({g, bound_bracket(pair, g)});
  r.mean_f = mean_height(pair.upper());
  if (pair.has_lower()) {
    r.mean_g = mean_height(pair.lower());
    r.min_gap = pair.min_gap().gap;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Squirt monitor

/// Area of {(u, v): u <= X, v <= Y, u^2 + v^2 <= R^2}.
inline double disc_corner_area(double x, double y, double r) {
  if (x <= -r || y <= -r) return 0.0;
  x = std::min(x, r);
  auto half_chord = [r](double u) { return std::sqrt(std::max(0.0, r * r - u * u)); };
  auto arc = [r](double u) {  // antiderivative of sqrt(r^2 - u^2)
    const double c = std::clamp(u / r, -1.0, 1.0);
    return 0.5 * (u * std::sqrt(std::max(0.0, r * r - u * u)) + r * r * std::asin(c));
  };
  if (y >= r) return 2.0 * (arc(x) - arc(-r));
  const double us = half_chord(y);  // where the chord height equals |y|
  // integrand over u in [-r, x]: min(y, s) + s clipped at 0, s = half chord
  auto integrate = [&](double a, double b, bool upper_capped) {
    if (b <= a) return 0.0;
    // capped: y + s, otherwise 2 s
    return upper_capped ? y * (b - a) + (arc(b) - arc(a)) : 2.0 * (arc(b) - arc(a));
  };
  if (y >= 0.0) {
    // |u| >= us: 2s ; |u| < us: y + s
    double a = 0.0;
    a += integrate(-r, std::min(x, -us), false);
    a += integrate(-us, std::min(x, us), true);
    a += integrate(us, x, false);
    return a;
  }
  // y < 0: only |u| < us contributes, with y + s
  return integrate(-us, std::min(x, us), true);
}

/// Area of the disc (center c, radius r) inside the rectangle [x0, x1] x [y0, y1].
inline double disc_rect_overlap(double cx, double cy, double r, double x0, double x1, double y0, double y1) {
  const double a = disc_corner_area(x1 - cx, y1 - cy, r) - disc_corner_area(x0 - cx, y1 - cy, r) -
                   disc_corner_area(x1 - cx, y0 - cy, r) + disc_corner_area(x0 - cx, y0 - cy, r);
  return std::max(0.0, a);
}

/// int over the periodic disc of (f - g), node values times exact cell overlap.
inline double disc_volume(const ContourPair& pair, double cx, double cy, double radius) {
  const Grid2& grid = pair.grid();
  const double dx = grid.spacing();
  if (radius <= 0.0) return 0.0;
  double vol = 0.0;
  const auto lo_i = static_cast<std::ptrdiff_t>(std::floor((cx - radius) / dx - 0.5));
  const auto hi_i = static_cast<std::ptrdiff_t>(std::ceil((cx + radius) / dx + 0.5));
  const auto lo_j = static_cast<std::ptrdiff_t>(std::floor((cy - radius) / dx - 0.5));
  const auto hi_j = static_cast<std::ptrdiff_t>(std::ceil((cy + radius) / dx + 0.5));
  // Unwrapped cell indices; the disc has diameter below L so no point is counted twice.
  for (std::ptrdiff_t i = lo_i; i <= hi_i; ++i) {
    const double x0 = (static_cast<double>(i) - 0.5) * dx, x1 = x0 + dx;
    for (std::ptrdiff_t j = lo_j; j <= hi_j; ++j) {
      const double y0 = (static_cast<double>(j) - 0.5) * dx, y1 = y0 + dx;
      const double w = disc_rect_overlap(cx, cy, radius, x0, x1, y0, y1);
      if (w == 0.0) continue;
      const std::size_t k = grid.index(i, j);
      vol += w * (pair.upper()[k] - pair.lower()[k]);
    }
  }
  return vol;
}

struct SquirtProbe {
  std::array<double, 2> center{0.0, 0.0};
  double aperture = 1.0;
};

enum class SquirtStatus { pass, fail, inactive };

inline const char* to_string(SquirtStatus s) {
  switch (s) {
    case SquirtStatus::pass:
      return "PASS";
    case SquirtStatus::fail:
      return "FAIL";
    case SquirtStatus::inactive:
      return "INACTIVE";
  }
  return "unknown";
}

struct SquirtPoint {
  double t, radius, volume;
};

struct SquirtVerdict {
  SquirtStatus status = SquirtStatus::inactive;
  double t0 = 0.0;
  double volume_t0 = 0.0;
  /// Most negative Vol(t_{i+1}) - Vol(t_i) on [t0, T] (0 if none decrease).
  double worst_change = 0.0;
  double tolerance = 0.0;
  std::vector<SquirtPoint> series;
};

/// R(t_i) = a/2 - int_{t_i}^T u_sup (trapezoid, T = last time); from the first
/// time with 0 < R < a, Vol(t) = int_{disc(center, R)} (f - g) must not
/// decrease by more than 1e-6 Vol(t0) per recorded step.
inline SquirtVerdict squirt_monitor(const SquirtProbe& probe, std::span<const double> times,
                                    std::span<const double> u_sup, std::span<const ContourPair> states,
                                    double relative_tolerance = 1e-6) {
  if (times.size() != u_sup.size() || times.size() != states.size())
    throw ParameterError("squirt monitor needs matching time, velocity and state series");
  if (times.empty()) throw ParameterError("squirt monitor needs a non-empty trajectory");
  const Grid2& grid = states.front().grid();
  if (!(probe.aperture > 0.0) || !(probe.aperture < grid.side_length()))
    throw ParameterError("squirt probe aperture must lie in (0, L_box)");
  if (!states.front().has_lower()) throw ParameterError("squirt monitor needs two interfaces");

  const std::size_t n = times.size();
  std::vector<double> radius(n);
  double tail = 0.0;
  radius[n - 1] = 0.5 * probe.aperture;
  for (std::size_t i = n - 1; i-- > 0;) {
    tail += 0.5 * (u_sup[i] + u_sup[i + 1]) * (times[i + 1] - times[i]);
    radius[i] = 0.5 * probe.aperture - tail;
  }
  SquirtVerdict v;
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (radius[i] > 0.0 && radius[i] < probe.aperture) {
      start = i;
      break;
    }
  }
  if (start == n) return v;
  v.t0 = times[start];
  for (std::size_t i = start; i < n; ++i)
    v.series.push_back({times[i], radius[i], disc_volume(states[i], probe.center[0], probe.center[1], radius[i])});
  v.volume_t0 = v.series.front().volume;
  v.tolerance = relative_tolerance * v.volume_t0;
  v.status = SquirtStatus::pass;
  for (std::size_t i = 1; i < v.series.size(); ++i) {
    const double change = v.series[i].volume - v.series[i - 1].volume;
    v.worst_change = std::min(v.worst_change, change);
    if (change < -v.tolerance) v.status = SquirtStatus::fail;
  }
  return v;
}

// ---------------------------------------------------------------------------

struct EnergyRate {
  double t, energy, rate;
};

/// Finite-difference dE/dt along a recorded series (central inside, one-sided at the ends).
inline std::vector<EnergyRate> qtc_witness(std::span<const double> times, std::span<const double> energies) {
  if (times.size() != energies.size()) throw ParameterError("qtc witness needs matching series");
  if (times.size() < 3) throw ParameterError("qtc witness needs at least three records");
  const std::size_t n = times.size();
  std::vector<EnergyRate> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 == n ? n - 1 : i + 1;
    const double dt = times[b] - times[a];
    if (!(dt > 0.0)) throw ParameterError("qtc witness needs increasing times");
    out[i] = {times[i], energies[i], (energies[b] - energies[a]) / dt};
  }
  return out;
}

enum class Stability { stable, unstable_upper, unstable_lower, unstable_both, passive };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable:
      return "stable";
    case Stability::unstable_upper:
      return "unstable-upper";
    case Stability::unstable_lower:
      return "unstable-lower";
    case Stability::unstable_both:
      return "unstable-both";
    case Stability::passive:
      return "passive";
  }
  return "unknown";
}

/// Stable iff rho1 <= rho2 <= rho3 with one strict inequality; all equal is passive.
inline Stability stability_classifier(double rho1, double rho2, double rho3) {
  const bool upper_bad = rho1 > rho2, lower_bad = rho2 > rho3;
  if (upper_bad && lower_bad) return Stability::unstable_both;
  if (upper_bad) return Stability::unstable_upper;
  if (lower_bad) return Stability::unstable_lower;
  if (rho1 == rho2 && rho2 == rho3) return Stability::passive;
  return Stability::stable;
}

}  // namespace muskat
