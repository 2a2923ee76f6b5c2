#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "muskat/error.hpp"
#include "muskat/grid.hpp"

namespace muskat {

/// Spectral derivatives along x1 and x2. The Nyquist mode of the derivative
/// direction is dropped, which makes the result exact for band-limited data.
struct Gradient {
  std::vector<double> d1;
  std::vector<double> d2;
};

inline Gradient spectral_gradient(const SurfaceField& h) {
  const Grid2& grid = h.grid();
  const std::size_t n = grid.resolution();
  const auto hat = dft2_forward(h.values(), n);
  std::vector<std::complex<double>> c1(hat.size()), c2(hat.size());
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (std::size_t p = 0; p < n; ++p) {
    const double k1 = (p == n / 2) ? 0.0 : grid.angular_wavenumber(p);
    for (std::size_t q = 0; q < n; ++q) {
      const double k2 = (q == n / 2) ? 0.0 : grid.angular_wavenumber(q);
      const auto c = hat[p * n + q] * scale;
      c1[p * n + q] = std::complex<double>(0.0, k1) * c;
      c2[p * n + q] = std::complex<double>(0.0, k2) * c;
    }
  }
  return {dft2_backward_real(c1, n), dft2_backward_real(c2, n)};
}

/// sqrt(sum v^2 dx^2), the trapezoidal L2 norm on the periodic cell.
inline double grid_l2_norm(std::span<const double> values, const Grid2& grid) {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s) * grid.spacing();
}

/// H^k norm of h - far_constant with multiplier (1 + |2 pi xi / L|^2)^k and
/// prefactor L^2 on the squared coefficient sum.
inline double sobolev_norm(const SurfaceField& h, int k) {
  if (k < 0 || k > 8) throw ParameterError("sobolev order must lie in [0, 8]");
  if (!h.all_finite()) throw InputError("sobolev_norm: non-finite values in field");
  const Grid2& grid = h.grid();
  const std::size_t n = grid.resolution();
  std::vector<double> shifted(h.values().begin(), h.values().end());
  for (double& v : shifted) v -= h.far_constant();
  const auto hat = dft2_forward(shifted, n);
  const double scale = 1.0 / static_cast<double>(grid.size());
  double sum = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double k1 = grid.angular_wavenumber(p);
    for (std::size_t q = 0; q < n; ++q) {
      const double k2 = grid.angular_wavenumber(q);
      const double weight = std::pow(1.0 + k1 * k1 + k2 * k2, k);
      sum += weight * std::norm(hat[p * n + q] * scale);
    }
  }
  return grid.side_length() * std::sqrt(sum);
}

/// max |h - far_constant|.
inline double sup_norm_deviation(const SurfaceField& h) {
  double m = 0.0;
  for (double v : h.values()) m = std::max(m, std::abs(v - h.far_constant()));
  return m;
}

inline double sup_norm(const SurfaceField& h) {
  double m = 0.0;
  for (double v : h.values()) m = std::max(m, std::abs(v));
  return m;
}

/// L2 norm of |grad h|.
inline double gradient_l2_norm(const SurfaceField& h) {
  const auto g = spectral_gradient(h);
  double s = 0.0;
  for (std::size_t k = 0; k < g.d1.size(); ++k) s += g.d1[k] * g.d1[k] + g.d2[k] * g.d2[k];
  return std::sqrt(s) * h.grid().spacing();
}

/// Grid estimate of ||grad h||_{C^gamma}: sup |grad h| plus the largest
/// difference quotient |grad h(x) - grad h(x')| / |x - x'|^gamma over node
/// pairs at periodic separation in (0, L/4]. Never exceeds the continuum norm
/// of the band-limited interpolant.
inline double holder_norm_grad(const SurfaceField& h, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("Hoelder exponent must lie in (0, 1)");
  if (!h.all_finite()) throw InputError("holder_norm_grad: non-finite values in field");
  const Grid2& grid = h.grid();
  const auto grad = spectral_gradient(h);
  const auto n = static_cast<std::ptrdiff_t>(grid.resolution());
  double sup = 0.0;
  for (std::size_t k = 0; k < grad.d1.size(); ++k) sup = std::max(sup, std::hypot(grad.d1[k], grad.d2[k]));

  const double max_sep = grid.side_length() / 4.0;
  const std::ptrdiff_t reach = n / 4;
  double semi = 0.0;
  // Offsets (di, dj) and (-di, -dj) give the same set of unordered pairs.
  for (std::ptrdiff_t di = 0; di <= reach; ++di) {
    for (std::ptrdiff_t dj = -reach; dj <= reach; ++dj) {
      if (di == 0 && dj <= 0) continue;
      const double dist = grid.spacing() * std::hypot(static_cast<double>(di), static_cast<double>(dj));
      if (dist > max_sep * (1.0 + 1e-12)) continue;
      const double inv = std::pow(dist, -gamma);
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t j = 0; j < n; ++j) {
          const std::size_t a = grid.index(i, j), b = grid.index(i + di, j + dj);
          const double q = std::hypot(grad.d1[a] - grad.d1[b], grad.d2[a] - grad.d2[b]) * inv;
          if (q > semi) semi = q;
        }
      }
    }
  }
  return sup + semi;
}

/// ||d(f,g)||_inf with d = [|y|^2 + (f(x) - g(x-y))^2]^{-1/2}, scanned over all
/// nodes x and all grid offsets y (periodic length). Since d <= 1/|y|, offsets
/// with |y| at or beyond the current best reciprocal cannot win and are skipped.
inline double contour_distance_sup(const ContourPair& pair) {
  const SurfaceField& f = pair.upper();
  const SurfaceField& g = pair.lower();
  const auto gap = pair.min_gap();
  if (!(gap.gap > 0.0))
    throw CollisionError("contour collision: gap " + std::to_string(gap.gap), gap.gap, gap.node);
  const Grid2& grid = pair.grid();
  const auto n = static_cast<std::ptrdiff_t>(grid.resolution());
  double best = 1.0 / gap.gap;
  const double dx = grid.spacing();
  const std::ptrdiff_t half = n / 2;
  for (std::ptrdiff_t di = -half + 1; di <= half; ++di) {
    for (std::ptrdiff_t dj = -half + 1; dj <= half; ++dj) {
      if (di == 0 && dj == 0) continue;
      const double y2 = dx * dx * static_cast<double>(di * di + dj * dj);
      if (y2 * best * best >= 1.0) continue;
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t j = 0; j < n; ++j) {
          const double d = f[grid.index(i, j)] - g[grid.index(i - di, j - dj)];
          const double v = 1.0 / std::sqrt(y2 + d * d);
          if (v > best) best = v;
        }
      }
    }
  }
  return best;
}

inline double mean_height(const SurfaceField& h) {
  double s = 0.0;
  for (double v : h.values()) s += v;
  return s / static_cast<double>(h.values().size());
}

}  // namespace muskat
