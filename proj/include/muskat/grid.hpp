#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <algorithm>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "muskat/error.hpp"
#include "muskat/fft.hpp"

namespace muskat {

/// Doubly periodic square grid. Node (i, j) sits at (i dx, j dx); arrays are
/// stored row-major with the x1 index outermost.
class Grid2 {
 public:
  Grid2(double side_length, std::size_t resolution) : side_(side_length), n_(resolution) {
    if (!(side_length > 0.0) || !std::isfinite(side_length))
      throw ParameterError("grid side length must be positive and finite");
    if (resolution < 8 || (resolution & (resolution - 1)) != 0)
      throw ParameterError("grid resolution must be a power of two >= 8, got " + std::to_string(resolution));
  }

  double side_length() const noexcept { return side_; }
  std::size_t resolution() const noexcept { return n_; }
  std::size_t size() const noexcept { return n_ * n_; }
  double spacing() const noexcept { return side_ / static_cast<double>(n_); }
  double coordinate(std::size_t i) const noexcept { return static_cast<double>(i) * spacing(); }

  std::size_t wrap(std::ptrdiff_t i) const noexcept {
    return static_cast<std::size_t>(i) & (n_ - 1);
  }
  std::size_t index(std::ptrdiff_t i, std::ptrdiff_t j) const noexcept { return wrap(i) * n_ + wrap(j); }

  /// Signed integer wavenumber in (-N/2, N/2] for storage slot p.
  std::ptrdiff_t wavenumber(std::size_t p) const noexcept {
    const auto pi = static_cast<std::ptrdiff_t>(p);
    const auto half = static_cast<std::ptrdiff_t>(n_ / 2);
    return pi <= half ? pi : pi - static_cast<std::ptrdiff_t>(n_);
  }
  /// Physical wavenumber 2 pi m / L of slot p.
  double angular_wavenumber(std::size_t p) const noexcept {
    return 2.0 * std::numbers::pi * static_cast<double>(wavenumber(p)) / side_;
  }

  /// Periodic distance between two grid offsets, in length units.
  double periodic_distance(std::ptrdiff_t di, std::ptrdiff_t dj) const noexcept {
    const auto n = static_cast<std::ptrdiff_t>(n_);
    auto fold = [n](std::ptrdiff_t d) {
      d %= n;
      if (d < 0) d += n;
      return std::min(d, n - d);
    };
    const double a = static_cast<double>(fold(di)), b = static_cast<double>(fold(dj));
    return spacing() * std::hypot(a, b);
  }

  bool operator==(const Grid2& o) const noexcept { return side_ == o.side_ && n_ == o.n_; }

 private:
  double side_;
  std::size_t n_;
};

/// A height field over the grid together with the value it approaches away
/// from the perturbation.
class SurfaceField {
 public:
  SurfaceField(Grid2 grid, std::vector<double> values, double far_constant = 0.0)
      : grid_(grid), values_(std::move(values)), far_(far_constant) {
    if (values_.size() != grid_.size()) throw ParameterError("surface field size does not match grid");
  }

  static SurfaceField constant(Grid2 grid, double height, double far_constant) {
    return SurfaceField(grid, std::vector<double>(grid.size(), height), far_constant);
  }

  static SurfaceField from_function(Grid2 grid, const std::function<double(double, double)>& fn,
                                    double far_constant) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.resolution(); ++i)
      for (std::size_t j = 0; j < grid.resolution(); ++j)
        v[i * grid.resolution() + j] = fn(grid.coordinate(i), grid.coordinate(j));
    return SurfaceField(grid, std::move(v), far_constant);
  }

  const Grid2& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double>& mutable_values() noexcept { return values_; }
  double far_constant() const noexcept { return far_; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }
  double at(std::ptrdiff_t i, std::ptrdiff_t j) const noexcept { return values_[grid_.index(i, j)]; }

  bool all_finite() const noexcept {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  /// Field shifted vertically by c (far constant shifted too).
  SurfaceField shifted(double c) const {
    auto v = values_;
    for (double& x : v) x += c;
    return SurfaceField(grid_, std::move(v), far_ + c);
  }

 private:
  Grid2 grid_;
  std::vector<double> values_;
  double far_;
};

/// Densities of the upper, middle and lower fluid (gravity normalized to one).
struct Densities {
  double upper = 1.0;   // rho^1, above f
  double middle = 2.0;  // rho^2, between f and g
  double lower = 3.0;   // rho^3, below g

  double upper_jump() const noexcept { return middle - upper; }  // rho^2 - rho^1
  double lower_jump() const noexcept { return lower - middle; }  // rho^3 - rho^2
  bool operator==(const Densities&) const = default;
};

/// Smallest f - g over the grid and the node where it is attained.
struct GapInfo {
  double gap;
  std::size_t node;
};

inline GapInfo minimum_gap(const SurfaceField& f, const SurfaceField& g) {
  GapInfo best{f[0] - g[0], 0};
  for (std::size_t k = 1; k < f.grid().size(); ++k) {
    const double d = f[k] - g[k];
    if (d < best.gap) best = {d, k};
  }
  return best;
}

/// The two interfaces. The lower one may be absent, in which case the pair
/// describes a single interface between rho^1 (above) and rho^2 (below).
class ContourPair {
 public:
  ContourPair(SurfaceField upper, SurfaceField lower, Densities rho)
      : f_(std::move(upper)), g_(std::move(lower)), rho_(rho) {
    if (!(f_.grid() == g_->grid())) throw ParameterError("upper and lower surfaces must share one grid");
    validate();
  }

  static ContourPair single(SurfaceField upper, double rho_above, double rho_below) {
    return ContourPair(std::move(upper), Densities{rho_above, rho_below, rho_below});
  }

  const SurfaceField& upper() const noexcept { return f_; }
  bool has_lower() const noexcept { return g_.has_value(); }
  const SurfaceField& lower() const {
    if (!g_) throw ParameterError("contour pair has no lower interface");
    return *g_;
  }
  const Densities& densities() const noexcept { return rho_; }
  const Grid2& grid() const noexcept { return f_.grid(); }

  /// Minimum vertical gap; +inf for a single interface.
  GapInfo min_gap() const {
    if (!g_) return {std::numeric_limits<double>::infinity(), 0};
    return minimum_gap(f_, *g_);
  }

  ContourPair with_surfaces(SurfaceField upper, std::optional<SurfaceField> lower) const {
    if (lower) return ContourPair(std::move(upper), std::move(*lower), rho_);
    return ContourPair(std::move(upper), rho_);
  }

 private:
  ContourPair(SurfaceField upper, Densities rho) : f_(std::move(upper)), rho_(rho) { validate(); }

  void validate() const {
    if (!f_.all_finite() || (g_ && !g_->all_finite()))
      throw InputError("surface heights must be finite");
    if (g_) {
      const auto gap = minimum_gap(f_, *g_);
      if (!(gap.gap > 0.0))
        throw CollisionError("upper surface must lie strictly above lower surface (gap " +
                                 std::to_string(gap.gap) + " at node " + std::to_string(gap.node) + ")",
                             gap.gap, gap.node);
    }
  }

  SurfaceField f_;
  std::optional<SurfaceField> g_;
  Densities rho_;
};

/// Fourier coefficients c(xi) = (1/L^2) int h exp(-i 2 pi xi.x / L) dx,
/// approximated by the DFT divided by N^2.
class SpectralField {
 public:
  explicit SpectralField(const SurfaceField& h) : grid_(h.grid()) {
    coeffs_ = dft2_forward(h.values(), grid_.resolution());
    const double scale = 1.0 / static_cast<double>(grid_.size());
    for (auto& c : coeffs_) c *= scale;
  }
  SpectralField(Grid2 grid, std::vector<std::complex<double>> coeffs)
      : grid_(grid), coeffs_(std::move(coeffs)) {}

  const Grid2& grid() const noexcept { return grid_; }
  std::span<const std::complex<double>> coefficients() const noexcept { return coeffs_; }
  std::vector<std::complex<double>>& mutable_coefficients() noexcept { return coeffs_; }

  /// Coefficient at signed integer wave vector (m1, m2).
  std::complex<double> at(std::ptrdiff_t m1, std::ptrdiff_t m2) const noexcept {
    return coeffs_[grid_.index(m1, m2)];
  }

  std::vector<double> to_values() const {
    auto v = dft2_backward_real(coeffs_, grid_.resolution());
    return v;
  }

 private:
  Grid2 grid_;
  std::vector<std::complex<double>> coeffs_;
};

}  // namespace muskat
