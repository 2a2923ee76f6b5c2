#pragma once

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace muskat {

namespace detail {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(fftw_alloc_complex(n)), size(n) {}
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  fftw_complex* data;
  std::size_t size;
};

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
inline PlanPair plans_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  FftwBuffer in(n * n), out(n * n);
  const int ni = static_cast<int>(n);
  PlanPair p;
  p.forward = fftw_plan_dft_2d(ni, ni, in.data, out.data, FFTW_FORWARD, FFTW_ESTIMATE);
  p.backward = fftw_plan_dft_2d(ni, ni, in.data, out.data, FFTW_BACKWARD, FFTW_ESTIMATE);
  cache.emplace(n, p);
  return p;
}

}  // namespace detail

/// Unnormalized forward 2D DFT of an n x n real array stored row-major:
/// out[p,q] = sum_{i,j} in[i,j] exp(-2 pi i (p i + q j)/n).
inline std::vector<std::complex<double>> dft2_forward(std::span<const double> values, std::size_t n) {
  detail::FftwBuffer in(n * n), out(n * n);
  for (std::size_t i = 0; i < n * n; ++i) {
    in.data[i][0] = values[i];
    in.data[i][1] = 0.0;
  }
  fftw_execute_dft(detail::plans_for(n).forward, in.data, out.data);
  std::vector<std::complex<double>> result(n * n);
  for (std::size_t i = 0; i < n * n; ++i) result[i] = {out.data[i][0], out.data[i][1]};
  return result;
}

/// Unnormalized inverse 2D DFT returning the real part.
inline std::vector<double> dft2_backward_real(std::span<const std::complex<double>> coeffs, std::size_t n) {
  detail::FftwBuffer in(n * n), out(n * n);
  for (std::size_t i = 0; i < n * n; ++i) {
    in.data[i][0] = coeffs[i].real();
    in.data[i][1] = coeffs[i].imag();
  }
  fftw_execute_dft(detail::plans_for(n).backward, in.data, out.data);
  std::vector<double> result(n * n);
  for (std::size_t i = 0; i < n * n; ++i) result[i] = out.data[i][0];
  return result;
}

}  // namespace muskat
