#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "bpns/field.hpp"

namespace bpns::detail {

// FFTW planner is not thread-safe; execution on private buffers is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Per-thread plan + buffer cache keyed by grid size.
struct FftWorkspace {
  int n = 0;
  fftw_complex* buf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  explicit FftWorkspace(int n_) : n(n_) {
    buf = fftw_alloc_complex(size_t(n) * n);
    std::lock_guard<std::mutex> lock(planner_mutex());
    fwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftWorkspace() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    fftw_free(buf);
  }
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;
};

inline FftWorkspace& workspace_for(int n) {
  thread_local std::map<int, FftWorkspace> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, n).first;
  return it->second;
}

}  // namespace bpns::detail

namespace bpns {

/// Forward transform: collocation values -> Fourier coefficients c_k such
/// that f(x) = sum_k c_k exp(i k.x).
inline SpectralField to_spectral(const PhysicalField& f) {
  const int n = f.grid.n;
  auto& ws = detail::workspace_for(n);
  for (size_t i = 0; i < f.values.size(); ++i) {
    ws.buf[i][0] = f.values[i];
    ws.buf[i][1] = 0.0;
  }
  fftw_execute(ws.fwd);
  SpectralField out(f.grid);
  const double scale = 1.0 / (double(n) * n);
  for (size_t i = 0; i < out.c.size(); ++i)
    out.c[i] = Complex{ws.buf[i][0] * scale, ws.buf[i][1] * scale};
  return out;
}

/// Inverse transform back to collocation values (imaginary parts dropped;
/// a Hermitian spectrum yields them at round-off level).
inline PhysicalField to_physical(const SpectralField& f) {
  const int n = f.grid.n;
  auto& ws = detail::workspace_for(n);
  for (size_t i = 0; i < f.c.size(); ++i) {
    ws.buf[i][0] = f.c[i].real();
    ws.buf[i][1] = f.c[i].imag();
  }
  fftw_execute(ws.bwd);
  PhysicalField out(f.grid);
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = ws.buf[i][0];
  return out;
}

}  // namespace bpns
