#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>
#include <vector>

#include "muskat/grid.hpp"

namespace muskat {

namespace detail {

// 10-point Gauss-Legendre on [-1, 1].
inline constexpr std::array<double, 10> kGaussNodes10 = {
    -0.9739065285171717, -0.8650633666889845, -0.6794095682990244, -0.4333953941292472, -0.1488743389816312,
    0.1488743389816312,  0.4333953941292472,  0.6794095682990244,  0.8650633666889845,  0.9739065285171717};
inline constexpr std::array<double, 10> kGaussWeights10 = {
    0.0666713443086881, 0.1494513491505806, 0.2190863625159820, 0.2692667193099963, 0.2955242247147529,
    0.2955242247147529, 0.2692667193099963, 0.2190863625159820, 0.1494513491505806, 0.0666713443086881};

template <typename Fn>
double gauss_panels(Fn&& fn, double a, double b, std::size_t panels) {
  const double h = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = a + (static_cast<double>(p) + 0.5) * h;
    double s = 0.0;
    for (std::size_t k = 0; k < 10; ++k) s += kGaussWeights10[k] * fn(mid + 0.5 * h * kGaussNodes10[k]);
    total += 0.5 * h * s;
  }
  return total;
}

}  // namespace detail

/// Fraction of the linearized far-field weight beyond radius R:
///   int_R^inf r^2 J1(kappa r) / (r^2 + h^2)^{3/2} dr,
/// whose integral from 0 is exp(-h kappa). With h = 0 it reduces to
/// int_{kappa R}^inf J1(s)/s ds.
inline double far_tail_fraction(double kappa, double height, double radius) {
  if (kappa == 0.0) return 0.0;
  const double scale_osc = std::numbers::pi / kappa;
  double width = std::min(scale_osc, radius / 8.0);
  if (height > 0.0) width = std::min(width, 0.5 * height);
  const auto panels = static_cast<std::size_t>(std::ceil(radius / width));
  const double near = detail::gauss_panels(
      [&](double r) {
        if (height == 0.0) return ::j1(kappa * r) / r;
        const double q = r * r + height * height;
        return r * r * ::j1(kappa * r) / (q * std::sqrt(q));
      },
      0.0, radius, panels);
  return std::exp(-height * kappa) - near;
}

/// Spectral multipliers that add back the linear part of the integrals over
/// |y| > R_far, which the polar rule does not see. For a mode of wavenumber
/// kappa the missing contribution to the rate is -(kappa/2) T(kappa) per unit
/// density jump, with T from `far_tail_fraction` at h = 0 (self term) and at
/// the mean gap (cross term).
class TailMultipliers {
 public:
  static std::shared_ptr<const TailMultipliers> get(const Grid2& grid, double radius, double height) {
    static std::mutex mutex;
    static std::map<std::tuple<double, std::size_t, double, double>, std::shared_ptr<const TailMultipliers>> cache;
    const auto key = std::make_tuple(grid.side_length(), grid.resolution(), radius, height);
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto made = std::shared_ptr<const TailMultipliers>(new TailMultipliers(grid, radius, height));
    cache.emplace(key, made);
    return made;
  }

  double height() const noexcept { return height_; }
  /// Multiplier per storage slot of the N x N spectrum.
  std::span<const double> values() const noexcept { return values_; }

 private:
  TailMultipliers(const Grid2& grid, double radius, double height) : height_(height) {
    const std::size_t n = grid.resolution();
    std::map<std::ptrdiff_t, double> by_norm;
    values_.assign(n * n, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = 0; q < n; ++q) {
        const auto m1 = grid.wavenumber(p), m2 = grid.wavenumber(q);
        const std::ptrdiff_t key = m1 * m1 + m2 * m2;
        if (key == 0) continue;
        auto it = by_norm.find(key);
        if (it == by_norm.end()) {
          const double kappa = 2.0 * std::numbers::pi * std::sqrt(static_cast<double>(key)) / grid.side_length();
          it = by_norm.emplace(key, -0.5 * kappa * far_tail_fraction(kappa, height, radius)).first;
        }
        values_[p * n + q] = it->second;
      }
    }
  }

  double height_;
  std::vector<double> values_;
};

}  // namespace muskat
