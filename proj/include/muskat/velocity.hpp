#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "muskat/error.hpp"
#include "muskat/grid.hpp"
#include "muskat/parallel.hpp"
#include "muskat/quadrature.hpp"

namespace muskat {

using Vec3 = std::array<double, 3>;

/// Where a velocity evaluation sits relative to the interfaces.
enum class VelocityMode {
  off_interface,  // x3 strictly off both surfaces
  upper_limit,    // x3 -> f(x); the given x3 is ignored
  lower_limit,    // x3 -> g(x); the given x3 is ignored
};

/// Darcy velocity induced by the two density jumps:
///   u(x, x3) = -a12/4pi PV int (y1, y2, grad f(x-y).y) / [|y|^2 + (x3 - f(x-y))^2]^{3/2} dy
///              -a23/4pi PV int (y1, y2, grad g(x-y).y) / [|y|^2 + (x3 - g(x-y))^2]^{3/2} dy.
/// The interface limits use the same expression with x3 set on the surface;
/// the odd leading part cancels on the symmetric rule and tangential terms
/// are not added. Integrals over |y| > R_far are not included.
template <typename Sampling = HermiteSampling>
class VelocityField {
 public:
  VelocityField(const ContourPair& pair, PolarQuadRule rule)
      : pair_(pair), rule_(std::move(rule)), taps_(build_taps<Sampling>(rule_, pair.grid())) {
    f_ = SampledSurface<Sampling>(pair.upper(), spectral_derivatives(pair.upper()));
    if (pair.has_lower()) g_ = SampledSurface<Sampling>(pair.lower(), spectral_derivatives(pair.lower()));
  }

  const ContourPair& pair() const noexcept { return pair_; }
  const PolarQuadRule& rule() const noexcept { return rule_; }

  /// Velocity at an arbitrary point.
  Vec3 at(double x1, double x2, double x3, VelocityMode mode = VelocityMode::off_interface) const {
    const double fh = f_.at_point(x1, x2).h;
    const std::optional<double> gh = g_ ? std::optional<double>(g_->at_point(x1, x2).h) : std::nullopt;
    x3 = resolve_height(x3, fh, gh, mode);
    Vec3 u{0, 0, 0};
    const double dx = pair_.grid().spacing();
    auto surface_term = [&](const SampledSurface<Sampling>& s, double height_here, double jump, bool self) {
      if (jump == 0.0) return;
      const double dz = std::abs(x3 - height_here);
      const PolarQuadRule* use = &rule_;
      std::optional<PolarQuadRule> fine;
      if (!self && dz < 4.0 * dx) {
        fine = recentered_rule(rule_, dz / 4.0);
        use = &*fine;
      }
      const double c = -jump / (4.0 * std::numbers::pi);
      Vec3 acc{0, 0, 0};
      const double inv_dx = 1.0 / dx;
      use->for_each_node([&](const PolarQuadRule::Node& node) {
        const auto geo = tap_geometry(PolarQuadRule::Node{node.y1 - x1, node.y2 - x2, node.radius, node.weight}, inv_dx);
        auto tap = Sampling::make_tap(geo, dx);
        const HeightSample sm = s.at_tap(0, 0, tap);
        const double k = node.weight * inverse_cube_distance(node.radius * node.radius, x3 - sm.h);
        acc[0] += k * node.y1;
        acc[1] += k * node.y2;
        acc[2] += k * (sm.d1 * node.y1 + sm.d2 * node.y2);
      });
      for (int m = 0; m < 3; ++m) u[m] += c * acc[m];
    };
    const Densities& rho = pair_.densities();
    surface_term(f_, fh, rho.upper_jump(), mode == VelocityMode::upper_limit);
    if (g_) surface_term(*g_, *gh, rho.lower_jump(), mode == VelocityMode::lower_limit);
    check(u, x1, x2, x3);
    return u;
  }

  /// Velocity above grid node (i, j). Uses the shared tap table unless the
  /// point sits within 4 dx of a surface it is not on, where it falls back
  /// to the refined pointwise path.
  Vec3 at_node(std::size_t i, std::size_t j, double x3, VelocityMode mode = VelocityMode::off_interface) const {
    const Grid2& grid = pair_.grid();
    const std::size_t k = i * grid.resolution() + j;
    const double fh = f_.node(k).h;
    const std::optional<double> gh = g_ ? std::optional<double>(g_->node(k).h) : std::nullopt;
    x3 = resolve_height(x3, fh, gh, mode);
    const double near = 4.0 * grid.spacing();
    const bool f_near = mode != VelocityMode::upper_limit && std::abs(x3 - fh) < near;
    const bool g_near = g_ && mode != VelocityMode::lower_limit && std::abs(x3 - *gh) < near;
    if (f_near || g_near) return at(grid.coordinate(i), grid.coordinate(j), x3, mode);

    const Densities& rho = pair_.densities();
    const double cf = -rho.upper_jump() / (4.0 * std::numbers::pi);
    const double cg = g_ ? -rho.lower_jump() / (4.0 * std::numbers::pi) : 0.0;
    Vec3 u{0, 0, 0};
    for (const auto& tap : taps_) {
      const TapGeometry& t = tap.geo;
      if (cf != 0.0) {
        const HeightSample s = f_.at_tap(i, j, tap);
        const double w = cf * t.weight * inverse_cube_distance(t.r2, x3 - s.h);
        u[0] += w * t.y1;
        u[1] += w * t.y2;
        u[2] += w * (s.d1 * t.y1 + s.d2 * t.y2);
      }
      if (cg != 0.0) {
        const HeightSample s = g_->at_tap(i, j, tap);
        const double w = cg * t.weight * inverse_cube_distance(t.r2, x3 - s.h);
        u[0] += w * t.y1;
        u[1] += w * t.y2;
        u[2] += w * (s.d1 * t.y1 + s.d2 * t.y2);
      }
    }
    check(u, grid.coordinate(i), grid.coordinate(j), x3);
    return u;
  }

 private:
  static double resolve_height(double x3, double fh, std::optional<double> gh, VelocityMode mode) {
    switch (mode) {
      case VelocityMode::upper_limit:
        return fh;
      case VelocityMode::lower_limit:
        if (!gh) throw ParameterError("lower-interface limit requested on a single interface");
        return *gh;
      case VelocityMode::off_interface:
        break;
    }
    if (x3 == fh || (gh && x3 == *gh))
      throw ParameterError("ambiguous velocity evaluation: point lies on an interface; use an interface-limit mode");
    return x3;
  }

  static void check(const Vec3& u, double x1, double x2, double x3) {
    for (double v : u)
      if (!std::isfinite(v))
        throw NumericalError("non-finite velocity at (" + std::to_string(x1) + ", " + std::to_string(x2) + ", " +
                             std::to_string(x3) + ")");
  }

  ContourPair pair_;
  PolarQuadRule rule_;
  std::vector<typename Sampling::Tap> taps_;
  SampledSurface<Sampling> f_;
  std::optional<SampledSurface<Sampling>> g_;
};

template <typename Sampling = HermiteSampling>
Vec3 fluid_velocity(const ContourPair& pair, const Vec3& point, const PolarQuadRule& rule,
                    VelocityMode mode = VelocityMode::off_interface) {
  return VelocityField<Sampling>(pair, rule).at(point[0], point[1], point[2], mode);
}

inline double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace muskat
