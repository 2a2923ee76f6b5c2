#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "muskat/error.hpp"
#include "muskat/grid.hpp"
#include "muskat/norms.hpp"
#include "muskat/parallel.hpp"
#include "muskat/quadrature.hpp"
#include "muskat/tail.hpp"

namespace muskat {

/// Time derivatives of both surfaces at every node.
struct InterfaceRates {
  std::vector<double> upper;
  std::optional<std::vector<double>> lower;
};

struct RhsOptions {
  /// Add the spectral correction for the linear part of |y| > R_far.
  bool far_tail = true;
  /// Below this gap (in grid spacings) the cross terms use a rule graded at gap/4.
  double recenter_gap_cells = 4.0;
};

namespace detail {

template <typename Sampling>
struct SurfaceData {
  SampledSurface<Sampling> sampled;
  std::vector<std::complex<double>> spectrum;  // normalized coefficients
};

template <typename Sampling>
SurfaceData<Sampling> prepare_surface(const SurfaceField& h) {
  std::vector<std::complex<double>> spectrum;
  const auto d = spectral_derivatives(h, &spectrum);
  return {SampledSurface<Sampling>(h, d), std::move(spectrum)};
}

inline double quantized(double h) { return std::round(h * 1048576.0) / 1048576.0; }

}  // namespace detail

/// Right-hand side of the coupled interface system
///   f_t = a12/4pi PV int (grad f(x) - grad f(x-y)).y / [|y|^2 + (f(x)-f(x-y))^2]^{3/2} dy
///       + a23/4pi PV int (grad f(x).y - grad g(x-y).y) / [|y|^2 + (f(x)-g(x-y))^2]^{3/2} dy
/// and symmetrically for g, with a12 = rho2 - rho1, a23 = rho3 - rho2.
/// Integrals run over the polar rule around each node; off-grid values come
/// from the `Sampling` policy applied to node heights and spectral derivatives.
template <typename Sampling = HermiteSampling>
class InterfaceOperator {
 public:
  InterfaceOperator(Grid2 grid, PolarQuadRule rule, RhsOptions options = {})
      : grid_(grid), rule_(std::move(rule)), taps_(build_taps<Sampling>(rule_, grid_)), options_(options) {
    if (rule_.far_radius() > grid_.side_length() / 2.0 * (1.0 + 1e-12))
      throw ParameterError("R_far must not exceed half the periodic cell");
    if (options_.far_tail) self_tail_ = TailMultipliers::get(grid_, rule_.far_radius(), 0.0);
  }

  const PolarQuadRule& rule() const noexcept { return rule_; }
  const Grid2& grid() const noexcept { return grid_; }

  InterfaceRates operator()(const ContourPair& pair) const {
    if (!(pair.grid() == grid_)) throw ParameterError("contour pair grid does not match operator grid");
    const Densities& rho = pair.densities();
    const double a12 = rho.upper_jump();
    const double a23 = pair.has_lower() ? rho.lower_jump() : 0.0;
    const bool has_g = pair.has_lower();
    const bool need_f = a12 != 0.0;
    const bool need_g = has_g && a23 != 0.0;

    const auto fd = detail::prepare_surface<Sampling>(pair.upper());
    std::optional<detail::SurfaceData<Sampling>> gd;
    if (has_g) gd = detail::prepare_surface<Sampling>(pair.lower());

    const std::size_t n = grid_.resolution();
    std::vector<double> self_f(grid_.size(), 0.0), cross_f(grid_.size(), 0.0);
    std::vector<double> self_g(has_g ? grid_.size() : 0, 0.0), cross_g(has_g ? grid_.size() : 0, 0.0);

    const double gap = has_g ? pair.min_gap().gap : std::numeric_limits<double>::infinity();
    const bool recenter = has_g && gap < options_.recenter_gap_cells * grid_.spacing();
    std::vector<typename Sampling::Tap> cross_taps;
    if (recenter) cross_taps = build_taps<Sampling>(recentered_rule(rule_, gap / 4.0), grid_);

    const SampledSurface<Sampling>& F = fd.sampled;
    const SampledSurface<Sampling>* G = gd ? &gd->sampled : nullptr;

    parallel_for(0, n, [&](std::size_t i) {
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = i * n + j;
        const HeightSample fx = F.node(k);
        const HeightSample gx = G ? G->node(k) : HeightSample{0, 0, 0};
        double sf = 0, cf = 0, sg = 0, cg = 0;
        auto self_and_cross = [&](const typename Sampling::Tap& tap, bool self_terms, bool cross_terms) {
          const TapGeometry& t = tap.geo;
          if (need_f) {
            const HeightSample fs = F.at_tap(i, j, tap);
            if (self_terms) {
              const double num = (fx.d1 - fs.d1) * t.y1 + (fx.d2 - fs.d2) * t.y2;
              sf += t.weight * num * inverse_cube_distance(t.r2, fx.h - fs.h);
            }
            if (cross_terms && G) {
              const double num = (gx.d1 - fs.d1) * t.y1 + (gx.d2 - fs.d2) * t.y2;
              cg += t.weight * num * inverse_cube_distance(t.r2, gx.h - fs.h);
            }
          }
          if (need_g) {
            const HeightSample gs = G->at_tap(i, j, tap);
            if (self_terms) {
              const double num = (gx.d1 - gs.d1) * t.y1 + (gx.d2 - gs.d2) * t.y2;
              sg += t.weight * num * inverse_cube_distance(t.r2, gx.h - gs.h);
            }
            if (cross_terms) {
              const double num = (fx.d1 - gs.d1) * t.y1 + (fx.d2 - gs.d2) * t.y2;
              cf += t.weight * num * inverse_cube_distance(t.r2, fx.h - gs.h);
            }
          }
        };
        if (!recenter) {
          for (const auto& t : taps_) self_and_cross(t, true, true);
        } else {
          for (const auto& t : taps_) self_and_cross(t, true, false);
          for (const auto& t : cross_taps) self_and_cross(t, false, true);
        }
        self_f[k] = sf;
        cross_f[k] = cf;
        if (has_g) {
          self_g[k] = sg;
          cross_g[k] = cg;
        }
      }
    });

    const double c = 1.0 / (4.0 * std::numbers::pi);
    InterfaceRates out;
    out.upper.resize(grid_.size());
    for (std::size_t k = 0; k < grid_.size(); ++k) out.upper[k] = c * (a12 * self_f[k] + a23 * cross_f[k]);
    if (has_g) {
      out.lower.emplace(grid_.size());
      for (std::size_t k = 0; k < grid_.size(); ++k) (*out.lower)[k] = c * (a23 * self_g[k] + a12 * cross_g[k]);
    }

    if (options_.far_tail) add_far_tail(pair, fd, gd ? &*gd : nullptr, a12, a23, out);

    check_finite(out.upper, "upper");
    if (out.lower) check_finite(*out.lower, "lower");
    return out;
  }

 private:
  void add_far_tail(const ContourPair& pair, const detail::SurfaceData<Sampling>& fd, const detail::SurfaceData<Sampling>* gd, double a12,
                    double a23, InterfaceRates& out) const {
    const std::size_t n = grid_.resolution();
    const auto self = self_tail_->values();
    std::vector<std::complex<double>> tf(grid_.size()), tg;
    if (!gd) {
      for (std::size_t k = 0; k < grid_.size(); ++k) tf[k] = a12 * self[k] * fd.spectrum[k];
    } else {
      const double height = detail::quantized(mean_height(pair.upper()) - mean_height(pair.lower()));
      const auto cross = TailMultipliers::get(grid_, rule_.far_radius(), height)->values();
      tg.resize(grid_.size());
      for (std::size_t k = 0; k < grid_.size(); ++k) {
        tf[k] = a12 * self[k] * fd.spectrum[k] + a23 * cross[k] * gd->spectrum[k];
        tg[k] = a23 * self[k] * gd->spectrum[k] + a12 * cross[k] * fd.spectrum[k];
      }
    }
    const auto vf = dft2_backward_real(tf, n);
    for (std::size_t k = 0; k < grid_.size(); ++k) out.upper[k] += vf[k];
    if (gd) {
      const auto vg = dft2_backward_real(tg, n);
      for (std::size_t k = 0; k < grid_.size(); ++k) (*out.lower)[k] += vg[k];
    }
  }

  void check_finite(const std::vector<double>& v, const char* which) const {
    const std::size_t n = grid_.resolution();
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!std::isfinite(v[k])) {
        std::ostringstream os;
        os << "non-finite " << which << " interface rate at node (" << k / n << ", " << k % n << ")";
        throw NumericalError(os.str());
      }
    }
  }

  Grid2 grid_;
  PolarQuadRule rule_;
  std::vector<typename Sampling::Tap> taps_;
  RhsOptions options_;
  std::shared_ptr<const TailMultipliers> self_tail_;
};

/// One-shot evaluation; builds the operator each call.
template <typename Sampling = HermiteSampling>
InterfaceRates interface_rhs(const ContourPair& pair, const PolarQuadRule& rule, RhsOptions options = {}) {
  return InterfaceOperator<Sampling>(pair.grid(), rule, options)(pair);
}

}  // namespace muskat
