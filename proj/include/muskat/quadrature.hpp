#pragma once

#include <array>
#include <complex>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "muskat/error.hpp"
#include "muskat/grid.hpp"

namespace muskat {

/// Product rule for integrals over the disc |y| <= R_far in polar
/// coordinates. Radial cells: [0, r_min], then a geometric run with ratio q
/// that hands over to uniform cells once the geometric width would exceed
/// the uniform width needed to reach R_far with the remaining cells. Each
/// radial cell uses its midpoint; weights are exact cell areas so they sum
/// to pi R_far^2. The angular count is even, so y and -y are both nodes.
class PolarQuadRule {
 public:
  static PolarQuadRule graded(std::size_t angular_count, std::size_t radial_count, double ratio,
                              double far_radius, double min_radius) {
    if (angular_count < 2 || angular_count % 2 != 0)
      throw ParameterError("angular node count must be even and >= 2");
    if (radial_count < 2) throw ParameterError("radial node count must be >= 2");
    if (!(ratio > 0.0 && ratio < 1.0)) throw ParameterError("radial grading ratio must lie in (0, 1)");
    if (!(min_radius > 0.0 && min_radius < far_radius))
      throw ParameterError("radial rule needs 0 < r_min < R_far");
    std::vector<double> edges{0.0, min_radius};
    while (edges.size() - 1 < radial_count) {
      const double last = edges.back();
      const std::size_t remaining = radial_count - (edges.size() - 1);
      const double uniform = (far_radius - last) / static_cast<double>(remaining);
      const double geometric = last * (1.0 / ratio - 1.0);
      if (geometric >= uniform || remaining == 1) {
        for (std::size_t k = 1; k < remaining; ++k) edges.push_back(last + uniform * static_cast<double>(k));
        edges.push_back(far_radius);
        break;
      }
      edges.push_back(last + geometric);
    }
    return PolarQuadRule(angular_count, std::move(edges));
  }

  /// Same rule with every radial cell bisected and twice the angular nodes.
  PolarQuadRule refined() const {
    std::vector<double> edges;
    edges.reserve(2 * edges_.size());
    for (std::size_t k = 0; k + 1 < edges_.size(); ++k) {
      edges.push_back(edges_[k]);
      edges.push_back(0.5 * (edges_[k] + edges_[k + 1]));
    }
    edges.push_back(edges_.back());
    return PolarQuadRule(2 * angular_, std::move(edges));
  }

  std::size_t angular_count() const noexcept { return angular_; }
  std::size_t radial_count() const noexcept { return radii_.size(); }
  std::size_t size() const noexcept { return angular_ * radii_.size(); }
  double far_radius() const noexcept { return edges_.back(); }
  double min_radius() const noexcept { return edges_[1]; }
  std::span<const double> radii() const noexcept { return radii_; }
  std::span<const double> radial_weights() const noexcept { return radial_weights_; }
  std::span<const double> edges() const noexcept { return edges_; }

  double angle(std::size_t m) const noexcept {
    return (static_cast<double>(m) + 0.5) * 2.0 * std::numbers::pi / static_cast<double>(angular_);
  }
  double angular_weight() const noexcept { return 2.0 * std::numbers::pi / static_cast<double>(angular_); }

  double total_weight() const noexcept {
    double s = 0.0;
    for (double w : radial_weights_) s += w;
    return s * angular_weight() * static_cast<double>(angular_);
  }

  /// Node y and its area weight, indexed radial-major.
  struct Node {
    double y1, y2, radius, weight;
  };
  template <typename Fn>
  void for_each_node(Fn&& fn) const {
    for (std::size_t r = 0; r < radii_.size(); ++r) {
      for (std::size_t m = 0; m < angular_; ++m) {
        const double th = angle(m);
        fn(Node{radii_[r] * std::cos(th), radii_[r] * std::sin(th), radii_[r],
                radial_weights_[r] * angular_weight()});
      }
    }
  }

 private:
  PolarQuadRule(std::size_t angular, std::vector<double> edges) : angular_(angular), edges_(std::move(edges)) {
    for (std::size_t k = 0; k + 1 < edges_.size(); ++k) {
      radii_.push_back(0.5 * (edges_[k] + edges_[k + 1]));
      radial_weights_.push_back(0.5 * (edges_[k + 1] * edges_[k + 1] - edges_[k] * edges_[k]));
    }
  }

  std::size_t angular_;
  std::vector<double> edges_;
  std::vector<double> radii_;
  std::vector<double> radial_weights_;
};

/// Default rule for a grid: R_far = L/2, r_min = dx/8, q = 0.85.
inline PolarQuadRule default_rule(const Grid2& grid, std::size_t angular_count = 64, std::size_t radial_count = 0,
                                  double ratio = 0.85) {
  if (radial_count == 0) radial_count = grid.resolution() / 2 + 16;
  return PolarQuadRule::graded(angular_count, radial_count, ratio, grid.side_length() / 2.0, grid.spacing() / 8.0);
}

/// Rule whose grading starts at `scale` instead of the rule's r_min, keeping
/// the far-field spacing. Used where an integrand peaks at |y| ~ gap.
inline PolarQuadRule recentered_rule(const PolarQuadRule& base, double scale, double ratio = 0.85) {
  if (!(scale < base.min_radius())) return base;
  const auto extra = static_cast<std::size_t>(std::ceil(std::log(base.min_radius() / scale) / std::log(1.0 / ratio)));
  return PolarQuadRule::graded(base.angular_count(), base.radial_count() + extra, ratio, base.far_radius(), scale);
}

/// The Darcy kernel K(x) = (1/4 pi)(3 x1 x3, 3 x2 x3, 2 x3^2 - x1^2 - x2^2)/|x|^5.
/// Even and homogeneous of degree -3.
struct Kernel3 {
  std::array<double, 3> operator()(const std::array<double, 3>& x) const noexcept {
    const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    const double inv5 = 1.0 / (r2 * r2 * std::sqrt(r2));
    const double c = inv5 / (4.0 * std::numbers::pi);
    return {3.0 * x[0] * x[2] * c, 3.0 * x[1] * x[2] * c, (2.0 * x[2] * x[2] - x[0] * x[0] - x[1] * x[1]) * c};
  }
};

/// Value and gradient of a surface at one point.
struct HeightSample {
  double h, d1, d2;
};

/// Sampling at x - y from a grid node x. Because x is a node the stencil
/// weights depend only on y, so each rule node is turned into one `Tap`
/// shared by all grid nodes.
struct TapGeometry {
  std::ptrdiff_t di, dj;  // lower-left stencil corner relative to x
  double t1, t2;          // fractional position inside the cell
  double y1, y2, r2, weight;
};

inline TapGeometry tap_geometry(const PolarQuadRule::Node& node, double inv_dx) {
  const double s1 = -node.y1 * inv_dx, s2 = -node.y2 * inv_dx;
  const double f1 = std::floor(s1), f2 = std::floor(s2);
  return {static_cast<std::ptrdiff_t>(f1), static_cast<std::ptrdiff_t>(f2), s1 - f1, s2 - f2, node.y1, node.y2,
          node.radius * node.radius, node.weight};
}

/// Spectral derivatives needed by the Hermite sampler: h_1, h_2, h_11,
/// h_12, h_22, h_112, h_122 at every node.
struct DerivativeSet {
  std::vector<double> d1, d2, d11, d12, d22, d112, d122;
};

/// Bilinear interpolation of node heights and spectral gradients (C0).
struct BilinearSampling {
  struct Tap {
    TapGeometry geo;
    double w[4];  // corners 00, 10, 01, 11
  };
  struct NodeData {
    double h, d1, d2;
  };

  static Tap make_tap(const TapGeometry& g, double /*dx*/) {
    const double t1 = g.t1, t2 = g.t2;
    return {g, {(1 - t1) * (1 - t2), t1 * (1 - t2), (1 - t1) * t2, t1 * t2}};
  }

  static NodeData pack(const HeightSample& s, const DerivativeSet&, std::size_t) { return {s.h, s.d1, s.d2}; }

  static HeightSample combine(const Tap& t, const NodeData& a, const NodeData& b, const NodeData& c,
                              const NodeData& d) noexcept {
    const double* w = t.w;
    return {w[0] * a.h + w[1] * b.h + w[2] * c.h + w[3] * d.h, w[0] * a.d1 + w[1] * b.d1 + w[2] * c.d1 + w[3] * d.d1,
            w[0] * a.d2 + w[1] * b.d2 + w[2] * c.d2 + w[3] * d.d2};
  }
};

/// Bicubic Hermite interpolation from node values and spectral derivatives.
/// Height, x1-slope and x2-slope are each interpolated with their own
/// Hermite data, so all three sampled fields are C1 in y. The composite
/// midpoint rule then keeps its second order under refinement, which C0
/// bilinear data does not.
struct HermiteSampling {
  struct Tap {
    TapGeometry geo;
    double w[16];  // per corner: value, d/dx1, d/dx2, d2/dx1dx2 (dx folded in)
  };
  struct NodeData {
    double q[3][4];  // (h, h1, h2) x (value, d1, d2, d12)
  };

  static Tap make_tap(const TapGeometry& g, double dx) {
    auto basis = [](double t, double out[4]) {
      const double t2 = t * t, t3 = t2 * t;
      out[0] = 2 * t3 - 3 * t2 + 1;  // value at left
      out[1] = t3 - 2 * t2 + t;      // slope at left
      out[2] = -2 * t3 + 3 * t2;     // value at right
      out[3] = t3 - t2;              // slope at right
    };
    double b1[4], b2[4];
    basis(g.t1, b1);
    basis(g.t2, b2);
    Tap tap{g, {}};
    // corner order 00, 10, 01, 11 with first index along x1
    const int side1[4] = {0, 1, 0, 1}, side2[4] = {0, 0, 1, 1};
    for (int c = 0; c < 4; ++c) {
      const double v1 = b1[2 * side1[c]], s1 = b1[2 * side1[c] + 1] * dx;
      const double v2 = b2[2 * side2[c]], s2 = b2[2 * side2[c] + 1] * dx;
      tap.w[4 * c + 0] = v1 * v2;
      tap.w[4 * c + 1] = s1 * v2;
      tap.w[4 * c + 2] = v1 * s2;
      tap.w[4 * c + 3] = s1 * s2;
    }
    return tap;
  }

  static NodeData pack(const HeightSample& s, const DerivativeSet& d, std::size_t k) {
    return {{{s.h, d.d1[k], d.d2[k], d.d12[k]},
             {d.d1[k], d.d11[k], d.d12[k], d.d112[k]},
             {d.d2[k], d.d12[k], d.d22[k], d.d122[k]}}};
  }

  static HeightSample combine(const Tap& t, const NodeData& a, const NodeData& b, const NodeData& c,
                              const NodeData& d) noexcept {
    double out[3];
    for (int m = 0; m < 3; ++m) {
      double s = 0.0;
      for (int r = 0; r < 4; ++r)
        s += t.w[r] * a.q[m][r] + t.w[4 + r] * b.q[m][r] + t.w[8 + r] * c.q[m][r] + t.w[12 + r] * d.q[m][r];
      out[m] = s;
    }
    return {out[0], out[1], out[2]};
  }
};

template <typename Sampling>
std::vector<typename Sampling::Tap> build_taps(const PolarQuadRule& rule, const Grid2& grid) {
  std::vector<typename Sampling::Tap> taps;
  taps.reserve(rule.size());
  const double inv_dx = 1.0 / grid.spacing();
  rule.for_each_node([&](const PolarQuadRule::Node& node) {
    taps.push_back(Sampling::make_tap(tap_geometry(node, inv_dx), grid.spacing()));
  });
  return taps;
}

/// Spectral derivatives of a surface up to the order the samplers need.
inline DerivativeSet spectral_derivatives(const SurfaceField& h, std::vector<std::complex<double>>* spectrum = nullptr) {
  const Grid2& grid = h.grid();
  const std::size_t n = grid.resolution();
  auto hat = dft2_forward(h.values(), n);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& c : hat) c *= scale;
  auto derive = [&](int o1, int o2) {
    std::vector<std::complex<double>> c(hat.size());
    for (std::size_t p = 0; p < n; ++p) {
      // Odd derivatives drop the unpaired Nyquist mode.
      const double k1 = grid.angular_wavenumber(p);
      const double k1e = (p == n / 2 && o1 % 2 == 1) ? 0.0 : k1;
      for (std::size_t q = 0; q < n; ++q) {
        const double k2 = grid.angular_wavenumber(q);
        const double k2e = (q == n / 2 && o2 % 2 == 1) ? 0.0 : k2;
        std::complex<double> m(1.0, 0.0);
        for (int a = 0; a < o1; ++a) m *= std::complex<double>(0.0, k1e);
        for (int a = 0; a < o2; ++a) m *= std::complex<double>(0.0, k2e);
        c[p * n + q] = m * hat[p * n + q];
      }
    }
    return dft2_backward_real(c, n);
  };
  DerivativeSet d{derive(1, 0), derive(0, 1), derive(2, 0), derive(1, 1), derive(0, 2), derive(2, 1), derive(1, 2)};
  if (spectrum) *spectrum = std::move(hat);
  return d;
}

/// A surface packed for sampling with the chosen interpolation policy.
template <typename Sampling>
class SampledSurface {
 public:
  using NodeData = typename Sampling::NodeData;
  using Tap = typename Sampling::Tap;

  SampledSurface() = default;
  SampledSurface(const SurfaceField& h, const DerivativeSet& d)
      : n_(h.grid().resolution()), dx_(h.grid().spacing()) {
    nodes_.resize(h.values().size());
    data_.resize(h.values().size());
    for (std::size_t k = 0; k < data_.size(); ++k) {
      nodes_[k] = {h[k], d.d1[k], d.d2[k]};
      data_[k] = Sampling::pack(nodes_[k], d, k);
    }
  }

  const HeightSample& node(std::size_t k) const noexcept { return nodes_[k]; }

  HeightSample at_tap(std::size_t i, std::size_t j, const Tap& t) const noexcept {
    const std::size_t mask = n_ - 1;
    const std::size_t ia = (i + static_cast<std::size_t>(t.geo.di)) & mask, ib = (ia + 1) & mask;
    const std::size_t ja = (j + static_cast<std::size_t>(t.geo.dj)) & mask, jb = (ja + 1) & mask;
    return Sampling::combine(t, data_[ia * n_ + ja], data_[ib * n_ + ja], data_[ia * n_ + jb], data_[ib * n_ + jb]);
  }

  /// Sample at an arbitrary horizontal point (length units, periodic).
  HeightSample at_point(double x1, double x2) const noexcept {
    const PolarQuadRule::Node origin{-x1, -x2, 0.0, 0.0};
    const Tap t = Sampling::make_tap(tap_geometry(origin, 1.0 / dx_), dx_);
    return at_tap(0, 0, t);
  }

 private:
  std::size_t n_ = 0;
  double dx_ = 0.0;
  std::vector<HeightSample> nodes_;
  std::vector<NodeData> data_;
};

/// [s + d^2]^{-3/2}
inline double inverse_cube_distance(double s, double d) noexcept {
  const double q = s + d * d;
  return 1.0 / (q * std::sqrt(q));
}

}  // namespace muskat
