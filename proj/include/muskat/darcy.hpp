#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "muskat/error.hpp"
#include "muskat/gauss.hpp"
#include "muskat/grid.hpp"
#include "muskat/norms.hpp"
#include "muskat/quadrature.hpp"
#include "muskat/tail.hpp"
#include "muskat/velocity.hpp"

namespace muskat {

/// Integer wave vector in three dimensions.
using Wave3 = std::array<long, 3>;

/// Fourier multiplier of the Darcy velocity: u^(xi) = m(xi) rho^(xi) with
///   m(xi) = (xi1 xi3, xi2 xi3, -(xi1^2 + xi2^2)) / |xi|^2.
inline Vec3 darcy_multiplier(const Wave3& xi) {
  const double a = static_cast<double>(xi[0]), b = static_cast<double>(xi[1]), c = static_cast<double>(xi[2]);
  const double n2 = a * a + b * b + c * c;
  if (n2 == 0.0) throw ParameterError("Darcy multiplier is undefined at xi = 0; the zero mode carries no velocity");
  return {a * c / n2, b * c / n2, -(a * a + b * b) / n2};
}

/// Periodic scalar field on an n^3 grid of side L, index (i*n + j)*n + k.
struct PeriodicField3 {
  double side_length;
  std::size_t resolution;
  std::vector<double> values;
};

/// m(xi) applied to the coefficient rho^(xi) = n^-3 sum rho(x) exp(-i 2 pi xi.x / L).
inline std::array<std::complex<double>, 3> darcy_multiplier_check(const PeriodicField3& rho, const Wave3& xi) {
  const Vec3 m = darcy_multiplier(xi);
  const std::size_t n = rho.resolution;
  if (rho.values.size() != n * n * n) throw ParameterError("3D field size does not match its resolution");
  const double c = 2.0 * std::numbers::pi / static_cast<double>(n);
  std::complex<double> hat = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        const double phase = c * static_cast<double>(static_cast<long>(i) * xi[0] + static_cast<long>(j) * xi[1] +
                                                     static_cast<long>(k) * xi[2]);
        hat += rho.values[(i * n + j) * n + k] * std::polar(1.0, -phase);
      }
  hat /= static_cast<double>(n * n * n);
  return {m[0] * hat, m[1] * hat, m[2] * hat};
}

namespace detail {

// Orthonormal pair completing n to a right-handed frame.
inline std::array<Vec3, 2> complete_frame(const Vec3& n) {
  const std::size_t least = std::abs(n[0]) <= std::abs(n[1]) && std::abs(n[0]) <= std::abs(n[2]) ? 0
                            : std::abs(n[1]) <= std::abs(n[2])                                   ? 1
                                                                                                 : 2;
  Vec3 e{0, 0, 0};
  e[least] = 1.0;
  Vec3 a{n[1] * e[2] - n[2] * e[1], n[2] * e[0] - n[0] * e[2], n[0] * e[1] - n[1] * e[0]};
  const double an = norm(a);
  for (double& v : a) v /= an;
  const Vec3 b{n[1] * a[2] - n[2] * a[1], n[2] * a[0] - n[0] * a[2], n[0] * a[1] - n[1] * a[0]};
  return {a, b};
}

}  // namespace detail

/// Coefficient vector c with u = c cos(k.x) for the density rho = cos(k.x),
/// by direct real-space quadrature of u = -PV int K(x - y) rho(y) dy - (2/3)(0, 0, rho).
/// Spherical shells around the origin: Gauss in cos(angle to k), trapezoid
/// in azimuth (exact for the quadratic angular part of K), Gauss panels in r
/// up to R = `reach`/|k| with a cos^2 taper on [R/2, R].
inline Vec3 darcy_velocity_single_mode(const Vec3& k, double reach = 400.0, std::size_t polar_nodes = 0) {
  const double s = norm(k);
  if (s == 0.0) throw ParameterError("single-mode density needs a nonzero wave vector");
  const Vec3 kh{k[0] / s, k[1] / s, k[2] / s};
  const auto [ea, eb] = detail::complete_frame(kh);
  if (polar_nodes == 0) polar_nodes = static_cast<std::size_t>(reach) + 64;
  const GaussRule gt = gauss_legendre(polar_nodes);
  constexpr std::size_t azimuth = 8;
  const Kernel3 kernel;

  // Azimuthal sums of K on the unit sphere for each polar node.
  std::vector<Vec3> ring(polar_nodes);
  for (std::size_t a = 0; a < polar_nodes; ++a) {
    const double t = gt.nodes[a], st = std::sqrt(1.0 - t * t);
    Vec3 acc{0, 0, 0};
    for (std::size_t m = 0; m < azimuth; ++m) {
      const double psi = 2.0 * std::numbers::pi * static_cast<double>(m) / azimuth;
      const double c = std::cos(psi) * st, d = std::sin(psi) * st;
      const Vec3 w{t * kh[0] + c * ea[0] + d * eb[0], t * kh[1] + c * ea[1] + d * eb[1],
                   t * kh[2] + c * ea[2] + d * eb[2]};
      const auto kv = kernel(w);
      for (int q = 0; q < 3; ++q) acc[q] += kv[q];
    }
    for (int q = 0; q < 3; ++q) ring[a][q] = acc[q] * gt.weights[a] * 2.0 * std::numbers::pi / azimuth;
  }

  const double radius = reach / s;
  const auto panels = static_cast<std::size_t>(std::ceil(reach / (0.5 * std::numbers::pi)));
  Vec3 total{0, 0, 0};
  for (int q = 0; q < 3; ++q) {
    total[q] = detail::gauss_panels(
        [&](double r) {
          double shell = 0.0;
          for (std::size_t a = 0; a < polar_nodes; ++a) shell += ring[a][q] * std::cos(r * s * gt.nodes[a]);
          double taper = 1.0;
          if (r > 0.5 * radius) {
            const double c = std::cos(std::numbers::pi * (r - 0.5 * radius) / radius);
            taper = c * c;
          }
          return taper * shell / r;
        },
        0.0, radius, panels);
  }
  return {-total[0], -total[1], -total[2] - 2.0 / 3.0};
}

/// Odd control kernel z_c / |z|^3 (Riesz type).
struct RieszKernel {
  std::array<double, 3> operator()(const std::array<double, 3>& z) const noexcept {
    const double r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
    const double inv3 = 1.0 / (r2 * std::sqrt(r2));
    return {z[0] * inv3, z[1] * inv3, z[2] * inv3};
  }
};

/// Integral of one component of `kernel` over the hemisphere {|z| = 1, n.z >= 0}.
/// Product rule with M Gauss nodes in n.z on [0, 1] and M azimuthal nodes.
template <typename Kernel = Kernel3>
double hemisphere_mean(const Vec3& normal, int component, std::size_t m, Kernel kernel = {}) {
  if (component < 1 || component > 3) throw ParameterError("kernel component must be 1, 2 or 3");
  if (m < 2) throw ParameterError("hemisphere quadrature density must be >= 2");
  const double nn = norm(normal);
  if (std::abs(nn - 1.0) > 1e-12) throw ParameterError("hemisphere normal must be a unit vector");
  const auto [ea, eb] = detail::complete_frame(normal);
  const GaussRule g = gauss_legendre(m);
  const std::size_t c = static_cast<std::size_t>(component - 1);
  double total = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    const double u = 0.5 * (g.nodes[a] + 1.0), su = std::sqrt(1.0 - u * u);
    double ring = 0.0;
    for (std::size_t b = 0; b < m; ++b) {
      const double psi = 2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(m);
      const double p = std::cos(psi) * su, q = std::sin(psi) * su;
      const Vec3 z{u * normal[0] + p * ea[0] + q * eb[0], u * normal[1] + p * ea[1] + q * eb[1],
                   u * normal[2] + p * ea[2] + q * eb[2]};
      ring += kernel(z)[c];
    }
    total += 0.5 * g.weights[a] * ring;
  }
  return total * 2.0 * std::numbers::pi / static_cast<double>(m);
}

/// Pieces of one coordinate of T(chi_Omega1)(x) = PV int_Omega1 K(x - y) dy,
/// Omega1 = {M > y3 > f(y)}, split at the ball B_delta(x).
struct SplitEvaluation {
  double near = 0.0;
  double far = 0.0;
  double total = 0.0;    // near + far
  double unsplit = 0.0;  // same quadrature over whole columns
  double delta = 0.0;
  double ceiling = 0.0;  // M
};

/// delta = 1 / (3 (1 + |grad f|_C^gamma + |grad g|_C^gamma)^(1/gamma)).
inline double splitting_radius(const ContourPair& pair, double gamma) {
  const double hf = holder_norm_grad(pair.upper(), gamma);
  const double hg = pair.has_lower() ? holder_norm_grad(pair.lower(), gamma) : 0.0;
  return 1.0 / (3.0 * std::pow(1.0 + hf + hg, 1.0 / gamma));
}

/// Constant bounding the near piece: (3 pi / 2)(1 + 2^gamma (1 + 1/gamma)).
inline double near_piece_bound(double gamma) {
  return 1.5 * std::numbers::pi * (1.0 + std::pow(2.0, gamma) * (1.0 + 1.0 / gamma));
}

/// The vertical integral over each column is done in closed form; the
/// horizontal integral uses the polar rule around x, graded down to a
/// quarter of the vertical distance from x to f.
template <typename Sampling = HermiteSampling>
SplitEvaluation bound_splitting_eval(const ContourPair& pair, const Vec3& x, double gamma, int component = 1,
                                     std::optional<PolarQuadRule> rule = std::nullopt) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0, 1)");
  if (component < 1 || component > 3) throw ParameterError("kernel component must be 1, 2 or 3");
  const Grid2& grid = pair.grid();
  SplitEvaluation out;
  out.delta = splitting_radius(pair, gamma);
  if (!(out.delta > grid.spacing()))
    throw ResolutionError("splitting radius " + std::to_string(out.delta) + " does not exceed the grid spacing " +
                          std::to_string(grid.spacing()));
  const SurfaceField& f = pair.upper();
  const double c_inf = f.far_constant();
  out.ceiling = sup_norm_deviation(f) + std::abs(c_inf) + (pair.has_lower() ? sup_norm(pair.lower()) : 0.0) + 1.0;
  const double top = out.ceiling;

  const SampledSurface<Sampling> fs(f, spectral_derivatives(f));
  const double here = fs.at_point(x[0], x[1]).h;
  if (!rule) rule = default_rule(grid);
  const double dz = std::abs(x[2] - here);
  if (dz > 0.0) rule = recentered_rule(*rule, dz / 4.0);

  const double delta2 = out.delta * out.delta;
  const double c4pi = 1.0 / (4.0 * std::numbers::pi);
  // Antiderivative in y3 of the chosen kernel component along a column at horizontal offset z.
  auto column = [&](double z1, double z2, double rho2, double y3) {
    const double w = x[2] - y3;
    const double q = rho2 + w * w;
    const double p = 1.0 / (q * std::sqrt(q));
    switch (component) {
      case 1:
        return c4pi * z1 * p;
      case 2:
        return c4pi * z2 * p;
      default:
        return c4pi * w * p;
    }
  };
  double near = 0.0, far = 0.0, whole = 0.0;
  rule->for_each_node([&](const PolarQuadRule::Node& node) {
    const double bottom = fs.at_point(x[0] - node.y1, x[1] - node.y2).h;
    const double rho2 = node.radius * node.radius;
    const double fb = column(node.y1, node.y2, rho2, bottom), ft = column(node.y1, node.y2, rho2, top);
    whole += node.weight * (ft - fb);
    if (rho2 < delta2) {
      const double half = std::sqrt(delta2 - rho2);
      const double lo = std::max(bottom, x[2] - half), hi = std::min(top, x[2] + half);
      if (lo < hi) {
        const double fl = column(node.y1, node.y2, rho2, lo), fh = column(node.y1, node.y2, rho2, hi);
        near += node.weight * (fh - fl);
        far += node.weight * ((fl - fb) + (ft - fh));
        return;
      }
    }
    far += node.weight * (ft - fb);
  });
  out.near = near;
  out.far = far;
  out.total = near + far;
  out.unsplit = whole;
  return out;
}

}  // namespace muskat
