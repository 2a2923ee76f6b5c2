#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "muskat/error.hpp"
#include "muskat/grid.hpp"

namespace muskat {

/// Linear rate of a surface mode under its own jump a: -(a/2)|k|.
inline double self_symbol(double kappa, double jump) {
  if (kappa == 0.0) return 0.0;
  return -0.5 * jump * std::abs(kappa);
}

/// Linear rate induced across a flat layer of thickness h: -(a/2)|k| exp(-h|k|).
inline double cross_symbol(double kappa, double jump, double height) {
  if (!(height > 0.0)) throw ParameterError("cross symbol needs a positive layer thickness");
  if (kappa == 0.0) return 0.0;
  const double k = std::abs(kappa);
  return -0.5 * jump * k * std::exp(-height * k);
}

/// Flat reference state: f = h_f, g = h_g.
struct FlatBase {
  double upper_height;
  double lower_height;
  double upper_jump;  // a12
  double lower_jump;  // a23

  double gap() const noexcept { return upper_height - lower_height; }
};

/// Linearized 2x2 system d/dt (f^, g^) = A (f^, g^) for one wavenumber.
struct ModeRates {
  double kappa = 0.0;
  std::array<std::array<double, 2>, 2> matrix{};
  /// Sorted by real part, ascending.
  std::array<std::complex<double>, 2> eigenvalues{};
  /// Unit eigenvectors matching `eigenvalues` (real when the eigenvalues are).
  std::array<std::array<double, 2>, 2> eigenvectors{};
  bool real_spectrum = true;
};

inline ModeRates mode_rates(double kappa, const FlatBase& base) {
  if (kappa == 0.0) throw ParameterError("mode rates are defined for nonzero wavenumbers");
  if (!(base.gap() > 0.0)) throw ParameterError("flat base needs upper height above lower height");
  ModeRates out;
  out.kappa = std::abs(kappa);
  const double sf = self_symbol(kappa, base.upper_jump), sg = self_symbol(kappa, base.lower_jump);
  const double cf = cross_symbol(kappa, base.lower_jump, base.gap());  // g drives f
  const double cg = cross_symbol(kappa, base.upper_jump, base.gap());  // f drives g
  out.matrix = {{{sf, cf}, {cg, sg}}};
  const double tr = sf + sg, det = sf * sg - cf * cg;
  const double disc = 0.25 * tr * tr - det;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    const double lo = 0.5 * tr - r, hi = 0.5 * tr + r;
    out.eigenvalues = {std::complex<double>(lo), std::complex<double>(hi)};
    for (int m = 0; m < 2; ++m) {
      const double lam = m == 0 ? lo : hi;
      // (A - lam) v = 0; choose the better-conditioned row.
      std::array<double, 2> v;
      if (std::abs(cf) + std::abs(lam - sf) >= std::abs(cg) + std::abs(lam - sg))
        v = {cf, lam - sf};
      else
        v = {lam - sg, cg};
      double n = std::hypot(v[0], v[1]);
      if (n == 0.0) {
        v = m == 0 ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
        n = 1.0;
      }
      if (v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0)) n = -n;
      out.eigenvectors[m] = {v[0] / n, v[1] / n};
    }
  } else {
    out.real_spectrum = false;
    const double im = std::sqrt(-disc);
    out.eigenvalues = {std::complex<double>(0.5 * tr, -im), std::complex<double>(0.5 * tr, im)};
  }
  return out;
}

/// Cosine amplitude 2|h^(m)| of integer mode m != 0.
inline double mode_amplitude(const SurfaceField& h, std::ptrdiff_t m1, std::ptrdiff_t m2) {
  if (m1 == 0 && m2 == 0) throw ParameterError("mode amplitude needs a nonzero wave vector");
  return 2.0 * std::abs(SpectralField(h).at(m1, m2));
}

struct GrowthFit {
  double rate = 0.0;
  std::size_t samples = 0;
  bool linear_regime = true;
  std::string warning;
};

/// Least-squares slope of log(amplitude) against t over the second half of
/// the series. `regime_scale` is the amplitude above which the linear
/// regime is considered left (a warning, not an error).
inline GrowthFit fit_growth_rate(std::span<const double> times, std::span<const double> amplitudes,
                                 double regime_scale) {
  if (times.size() != amplitudes.size()) throw ParameterError("growth fit needs matching time and amplitude series");
  if (times.size() < 2) throw ParameterError("growth fit needs at least two samples");
  const std::size_t first = std::min(times.size() / 2, times.size() - 2);
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t n = 0;
  GrowthFit out;
  for (std::size_t i = first; i < times.size(); ++i) {
    if (!(amplitudes[i] > 0.0) || !std::isfinite(amplitudes[i]))
      throw InputError("no signal: mode amplitude is zero or non-finite at t = " + std::to_string(times[i]));
    const double y = std::log(amplitudes[i]);
    st += times[i];
    sy += y;
    stt += times[i] * times[i];
    sty += times[i] * y;
    ++n;
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (amplitudes[i] > regime_scale) {
      out.linear_regime = false;
      out.warning = "amplitude " + std::to_string(amplitudes[i]) + " left the linear regime (limit " +
                    std::to_string(regime_scale) + ") at t = " + std::to_string(times[i]);
      break;
    }
  }
  const double nd = static_cast<double>(n);
  const double den = nd * stt - st * st;
  if (!(den > 0.0)) throw ParameterError("growth fit needs distinct sample times");
  out.rate = (nd * sty - st * sy) / den;
  out.samples = n;
  return out;
}

}  // namespace muskat
