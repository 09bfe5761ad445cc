#pragma once

#include <cstddef>
#include <string_view>

namespace evmesh::simd {

// Inner-loop kernels shared by the numeric modules. Each backend fills one
// table; the active table is picked once at startup from CPUID and can be
// overridden with set_backend() or EVMESH_SIMD=scalar|avx2.
//
// Elementwise kernels use the same operation sequence in every backend
// (no FMA contraction), so their outputs are bit-identical across
// backends. Reductions accumulate in double; lane order differs, so they
// agree only to rounding.

enum class Backend { kScalar, kAvx2 };

struct KernelTable {
  Backend backend;
  std::string_view name;

  // acc[i] += a[i] * b[i]
  void (*mul_acc)(float* acc, const float* a, const float* b, std::size_t n);
  // out[i] = a[i] + b[i]
  void (*add)(float* out, const float* a, const float* b, std::size_t n);
  // out[i] = in[i] * s
  void (*scale)(float* out, const float* in, float s, std::size_t n);
  // out[i] = w[i] * a[i] + (1 - w[i]) * b[i]
  void (*blend)(float* out, const float* a, const float* b, const float* w, std::size_t n);
  // out[i] = b[i] + alpha * (a[i] - b[i])
  void (*lerp)(float* out, const float* a, const float* b, float alpha, std::size_t n);
  // acc[i] += |in[i]|
  void (*abs_acc)(float* acc, const float* in, std::size_t n);
  // out[i] = sqrt((pu - gu)^2 + (pv - gv)^2), evaluated in double
  void (*endpoint_error)(double* out, const float* pu, const float* pv, const float* gu, const float* gv,
                         std::size_t n);

  double (*sum)(const float* in, std::size_t n);
  // sum of (in[i] - mean)^2
  double (*sum_sq_dev)(const float* in, std::size_t n, double mean);
  // sum of |a[i] - b[i]|
  double (*sum_abs_diff)(const float* a, const float* b, std::size_t n);
  // sum of sqrt((a[i] - b[i])^2 + xi^2)
  double (*charbonnier_sum)(const float* a, const float* b, std::size_t n, double xi);
};

const KernelTable& scalar_kernels() noexcept;

/// nullptr when the build has no AVX2 translation unit or the CPU lacks AVX2.
const KernelTable* avx2_kernels() noexcept;

bool backend_available(Backend backend) noexcept;

/// Throws ParameterError if the backend is unavailable on this machine.
void set_backend(Backend backend);

Backend active_backend() noexcept;

const KernelTable& kernels() noexcept;

}  // namespace evmesh::simd
