#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "muskat/error.hpp"
#include "muskat/grid.hpp"
#include "muskat/interface.hpp"
#include "muskat/norms.hpp"
#include "muskat/quadrature.hpp"

namespace muskat {

struct StepControl {
  double cfl = 0.5;
  double dt_max = std::numeric_limits<double>::infinity();
  double t_end = 1.0;
  /// Hard collision floor in grid spacings; a smaller gap halts the run.
  double halt_gap_cells = 0.5;
  /// Below this gap (grid spacings) results are flagged as not trusted.
  double trusted_gap_cells = 4.0;
  /// Unstably stratified runs halt once a surface deviates from its mean by
  /// more than this fraction of the initial mean gap (0 disables). Single
  /// interfaces use L/2pi in place of the gap.
  double amplitude_cap = 0.1;

  void validate() const {
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ParameterError("c_cfl must lie in (0, 1]");
    if (!(dt_max > 0.0)) throw ParameterError("dt_max must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ParameterError("t_end must be finite and >= 0");
    if (!(halt_gap_cells > 0.0)) throw ParameterError("collision floor must be positive");
    if (!(trusted_gap_cells > 0.0)) throw ParameterError("trusted gap must be positive");
    if (!(amplitude_cap >= 0.0)) throw ParameterError("amplitude cap must be >= 0");
  }
};

struct TimeState {
  double t = 0.0;
  ContourPair pair;
  std::size_t step_count = 0;
  double dt_current = 0.0;
};

/// c_cfl / (max(|a12|, |a23|)/2 * pi N / L), clipped to dt_max.
inline double stable_dt(const ContourPair& pair, const StepControl& control) {
  const Densities& rho = pair.densities();
  double jump = std::abs(rho.upper_jump());
  if (pair.has_lower()) jump = std::max(jump, std::abs(rho.lower_jump()));
  const Grid2& grid = pair.grid();
  const double kmax = std::numbers::pi * static_cast<double>(grid.resolution()) / grid.side_length();
  if (jump == 0.0) return control.dt_max;
  return std::min(control.cfl / (0.5 * jump * kmax), control.dt_max);
}

namespace detail {

inline ContourPair advanced(const ContourPair& base, const InterfaceRates& rate, double h) {
  auto shift = [h](const SurfaceField& s, const std::vector<double>& r) {
    auto v = std::vector<double>(s.values().begin(), s.values().end());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += h * r[k];
    return SurfaceField(s.grid(), std::move(v), s.far_constant());
  };
  std::optional<SurfaceField> lower;
  if (base.has_lower()) lower = shift(base.lower(), *rate.lower);
  return base.with_surfaces(shift(base.upper(), rate.upper), std::move(lower));
}

}  // namespace detail

/// Classic RK4 on (f, g) jointly with a fixed interface operator.
template <typename Sampling = HermiteSampling>
class Stepper {
 public:
  Stepper(Grid2 grid, PolarQuadRule rule, StepControl control, RhsOptions options = {})
      : op_(grid, std::move(rule), options), control_(control) {
    control_.validate();
  }

  const StepControl& control() const noexcept { return control_; }
  const InterfaceOperator<Sampling>& op() const noexcept { return op_; }

  double floor() const noexcept { return control_.halt_gap_cells * op_.grid().spacing(); }

  /// Throws CollisionError if the gap is at or below the floor.
  void check_gap(const ContourPair& pair) const {
    if (!pair.has_lower()) return;
    const auto g = pair.min_gap();
    if (g.gap <= floor())
      throw CollisionError("contour gap " + std::to_string(g.gap) + " at node " + std::to_string(g.node) +
                               " reached the collision floor " + std::to_string(floor()),
                           g.gap, g.node);
  }

  TimeState step(const TimeState& s, double dt) const {
    check_gap(s.pair);
    const auto k1 = op_(s.pair);
    const auto p2 = staged(s.pair, k1, 0.5 * dt);
    const auto k2 = op_(p2);
    const auto p3 = staged(s.pair, k2, 0.5 * dt);
    const auto k3 = op_(p3);
    const auto p4 = staged(s.pair, k3, dt);
    const auto k4 = op_(p4);
    InterfaceRates mix;
    auto combine = [](const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c,
                      const std::vector<double>& d) {
      std::vector<double> r(a.size());
      for (std::size_t k = 0; k < r.size(); ++k) r[k] = (a[k] + 2.0 * b[k] + 2.0 * c[k] + d[k]) / 6.0;
      return r;
    };
    mix.upper = combine(k1.upper, k2.upper, k3.upper, k4.upper);
    if (k1.lower) mix.lower = combine(*k1.lower, *k2.lower, *k3.lower, *k4.lower);
    auto next = staged(s.pair, mix, dt);
    return TimeState{s.t + dt, std::move(next), s.step_count + 1, dt};
  }

 private:
  ContourPair staged(const ContourPair& base, const InterfaceRates& rate, double h) const {
    for (double v : rate.upper)
      if (!std::isfinite(v)) throw NumericalError("non-finite stage value");
    auto p = detail::advanced(base, rate, h);
    check_gap(p);
    return p;
  }

  InterfaceOperator<Sampling> op_;
  StepControl control_;
};

template <typename Sampling = HermiteSampling>
TimeState step_rk4(const TimeState& state, const StepControl& control, const PolarQuadRule& rule) {
  Stepper<Sampling> stepper(state.pair.grid(), rule, control);
  return stepper.step(state, std::min(stable_dt(state.pair, control), control.t_end - state.t));
}

enum class HaltReason { completed, collision, numerical, amplitude_cap };

inline const char* to_string(HaltReason r) {
  switch (r) {
    case HaltReason::completed:
      return "completed";
    case HaltReason::collision:
      return "collision";
    case HaltReason::numerical:
      return "numerical";
    case HaltReason::amplitude_cap:
      return "amplitude_cap";
  }
  return "unknown";
}

struct RunOutcome {
  HaltReason reason = HaltReason::completed;
  std::string message;
  TimeState final_state;
  bool trusted = true;  // gap stayed above the trusted threshold
};

/// Observer called with each state to be recorded; `last` is true for the
/// final call (end of run or halt).
using StateObserver = std::function<void(const TimeState&, bool last)>;

/// Steps from `initial` to control.t_end. The observer sees the initial
/// state, every `cadence`-th step and the final state (exactly once each).
/// Errors from the stepper end the run; the last good state is reported.
template <typename Sampling = HermiteSampling>
RunOutcome run_evolution(const TimeState& initial, const Stepper<Sampling>& stepper, std::size_t cadence,
                         const StateObserver& observe) {
  if (cadence == 0) throw ParameterError("record cadence must be >= 1");
  const StepControl& c = stepper.control();
  const Grid2& grid = initial.pair.grid();
  const double trusted_floor = c.trusted_gap_cells * grid.spacing();
  const double cap_scale = initial.pair.has_lower()
                               ? mean_height(initial.pair.upper()) - mean_height(initial.pair.lower())
                               : grid.side_length() / (2.0 * std::numbers::pi);
  auto deviation = [](const SurfaceField& s) {
    const double m = mean_height(s);
    double d = 0.0;
    for (double v : s.values()) d = std::max(d, std::abs(v - m));
    return d;
  };

  const Densities& rho = initial.pair.densities();
  const bool capped = c.amplitude_cap > 0.0 &&
                      (rho.upper_jump() < 0.0 || (initial.pair.has_lower() && rho.lower_jump() < 0.0));

  RunOutcome out{HaltReason::completed, "", initial, true};
  TimeState state = initial;
  auto trusted_now = [&](const ContourPair& p) { return !p.has_lower() || p.min_gap().gap >= trusted_floor; };
  out.trusted = trusted_now(state.pair);
  if (state.t >= c.t_end) {
    observe(state, true);
    out.final_state = state;
    return out;
  }
  observe(state, false);
  try {
    while (state.t < c.t_end) {
      const double remaining = c.t_end - state.t;
      double dt = stable_dt(state.pair, c);
      if (dt >= remaining) dt = remaining;
      TimeState next = stepper.step(state, dt);
      if (remaining == dt) next.t = c.t_end;
      state = std::move(next);
      out.trusted = out.trusted && trusted_now(state.pair);
      if (capped) {
        const double limit = c.amplitude_cap * cap_scale;
        double dev = deviation(state.pair.upper());
        if (state.pair.has_lower()) dev = std::max(dev, deviation(state.pair.lower()));
        if (dev > limit) {
          out.reason = HaltReason::amplitude_cap;
          out.message = "surface amplitude " + std::to_string(dev) + " exceeded the cap " + std::to_string(limit);
          break;
        }
      }
      if (state.t >= c.t_end) break;
      if ((state.step_count - initial.step_count) % cadence == 0) observe(state, false);
    }
  } catch (const CollisionError& e) {
    out.reason = HaltReason::collision;
    out.message = e.what();
  } catch (const NumericalError& e) {
    out.reason = HaltReason::numerical;
    out.message = e.what();
  } catch (const InputError& e) {
    out.reason = HaltReason::numerical;
    out.message = e.what();
  }
  observe(state, true);
  out.final_state = state;
  return out;
}

}  // namespace muskat
