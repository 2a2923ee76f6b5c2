#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "muskat/muskat.hpp"

namespace muskat::testing {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// c + eps cos(k1 x1 + k2 x2) with k measured in units of 2 pi / L.
inline SurfaceField cosine_surface(const Grid2& g, double c, double eps, long k1 = 1, long k2 = 0,
                                   double far = std::nan("")) {
  const double s = kTwoPi / g.side_length();
  return SurfaceField::from_function(
      g, [=](double x1, double x2) { return c + eps * std::cos(s * (k1 * x1 + k2 * x2)); }, std::isnan(far) ? c : far);
}

inline SurfaceField random_surface(const Grid2& g, double c, double scale, unsigned seed, int kmax = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double s = kTwoPi / g.side_length();
  std::vector<double> v(g.size(), c);
  for (int a = 0; a <= kmax; ++a)
    for (int b = -kmax; b <= kmax; ++b) {
      if (a == 0 && b <= 0) continue;
      const double amp = scale * u(rng) / (1.0 + a * a + b * b), ph = kTwoPi * u(rng);
      for (std::size_t i = 0; i < g.resolution(); ++i)
        for (std::size_t j = 0; j < g.resolution(); ++j)
          v[i * g.resolution() + j] += amp * std::cos(s * (a * g.coordinate(i) + b * g.coordinate(j)) + ph);
    }
  return SurfaceField(g, std::move(v), c);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

// -(a / 4 pi) int_{R^2} (k.y) sin(k.y) / (|y|^2 + h^2)^{3/2} dy by a polar
// product rule: trapezoid in angle, 16-point Gauss panels in radius, and a
// smooth cos^2 taper on the outer half that suppresses the oscillatory tail.
inline double symbol_oracle(double kappa, double jump, double h) {
  constexpr std::size_t angles = 512;
  const double reach = 400.0 / kappa;  // in units of radius
  const double panel = 0.5 * std::numbers::pi / kappa;
  const auto panels = static_cast<std::size_t>(std::ceil(reach / panel));
  const GaussRule gl = gauss_legendre(16);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = p * panel, b = std::min(reach, a + panel);
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double r = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[q];
      const double w = 0.5 * (b - a) * gl.weights[q];
      double ring = 0.0;
      for (std::size_t m = 0; m < angles; ++m) {
        const double th = 2.0 * std::numbers::pi * (m + 0.5) / angles;
        const double ky = kappa * r * std::cos(th);
        ring += ky * std::sin(ky);
      }
      ring *= 2.0 * std::numbers::pi / angles;
      double taper = 1.0;
      if (r > 0.5 * reach) {
        const double s = (r - 0.5 * reach) / (0.5 * reach);
        taper = std::pow(std::cos(0.5 * std::numbers::pi * s), 2);
      }
      total += w * taper * ring * r / std::pow(r * r + h * h, 1.5);
    }
  }
  return -jump / (4.0 * std::numbers::pi) * total;
}

}  // namespace muskat::testing
