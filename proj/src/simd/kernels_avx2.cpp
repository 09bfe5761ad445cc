// Compiled with -mavx2; only reached after the dispatcher confirmed AVX2.
#include <immintrin.h>

#include <cmath>

#include "kernels_internal.hpp"

namespace evmesh::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void mul_acc(float* acc, const float* a, const float* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 p = _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i));
    _mm256_storeu_ps(acc + i, _mm256_add_ps(_mm256_loadu_ps(acc + i), p));
  }
  for (; i < n; ++i) {
    const float p = a[i] * b[i];
    acc[i] = acc[i] + p;
  }
}

void add(float* out, const float* a, const float* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void scale(float* out, const float* in, float s, std::size_t n) {
  const __m256 vs = _mm256_set1_ps(s);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(in + i), vs));
  for (; i < n; ++i) out[i] = in[i] * s;
}

void blend(float* out, const float* a, const float* b, const float* w, std::size_t n) {
  const __m256 one = _mm256_set1_ps(1.0F);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vw = _mm256_loadu_ps(w + i);
    const __m256 wa = _mm256_mul_ps(vw, _mm256_loadu_ps(a + i));
    const __m256 wb = _mm256_mul_ps(_mm256_sub_ps(one, vw), _mm256_loadu_ps(b + i));
    _mm256_storeu_ps(out + i, _mm256_add_ps(wa, wb));
  }
  for (; i < n; ++i) {
    const float wa = w[i] * a[i];
    const float wb = (1.0F - w[i]) * b[i];
    out[i] = wa + wb;
  }
}

void lerp(float* out, const float* a, const float* b, float alpha, std::size_t n) {
  const __m256 va = _mm256_set1_ps(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vb = _mm256_loadu_ps(b + i);
    const __m256 d = _mm256_mul_ps(va, _mm256_sub_ps(_mm256_loadu_ps(a + i), vb));
    _mm256_storeu_ps(out + i, _mm256_add_ps(vb, d));
  }
  for (; i < n; ++i) {
    const float d = alpha * (a[i] - b[i]);
    out[i] = b[i] + d;
  }
}

void abs_acc(float* acc, const float* in, std::size_t n) {
  const __m256 sign = _mm256_set1_ps(-0.0F);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 mag = _mm256_andnot_ps(sign, _mm256_loadu_ps(in + i));
    _mm256_storeu_ps(acc + i, _mm256_add_ps(_mm256_loadu_ps(acc + i), mag));
  }
  for (; i < n; ++i) acc[i] = acc[i] + std::fabs(in[i]);
}

void endpoint_error(double* out, const float* pu, const float* pv, const float* gu, const float* gv,
                    std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d du = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(pu + i)), _mm256_cvtps_pd(_mm_loadu_ps(gu + i)));
    const __m256d dv = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(pv + i)), _mm256_cvtps_pd(_mm_loadu_ps(gv + i)));
    const __m256d sq = _mm256_add_pd(_mm256_mul_pd(du, du), _mm256_mul_pd(dv, dv));
    _mm256_storeu_pd(out + i, _mm256_sqrt_pd(sq));
  }
  for (; i < n; ++i) {
    const double du = static_cast<double>(pu[i]) - static_cast<double>(gu[i]);
    const double dv = static_cast<double>(pv[i]) - static_cast<double>(gv[i]);
    const double sq = du * du;
    const double sv = dv * dv;
    out[i] = std::sqrt(sq + sv);
  }
}

double sum(const float* in, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_cvtps_pd(_mm_loadu_ps(in + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_cvtps_pd(_mm_loadu_ps(in + i + 4)));
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += static_cast<double>(in[i]);
  return s;
}

double sum_sq_dev(const float* in, std::size_t n, double mean) {
  const __m256d vm = _mm256_set1_pd(mean);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(in + i)), vm);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = static_cast<double>(in[i]) - mean;
    s += d * d;
  }
  return s;
}

double sum_abs_diff(const float* a, const float* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + i)), _mm256_cvtps_pd(_mm_loadu_ps(b + i)));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  return s;
}

double charbonnier_sum(const float* a, const float* b, std::size_t n, double xi) {
  const double xi2 = xi * xi;
  const __m256d vxi2 = _mm256_set1_pd(xi2);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(a + i)), _mm256_cvtps_pd(_mm_loadu_ps(b + i)));
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(d, d), vxi2)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += std::sqrt(d * d + xi2);
  }
  return s;
}

}  // namespace

const KernelTable kAvx2Table{
    Backend::kAvx2, "avx2", mul_acc, add, scale, blend, lerp, abs_acc, endpoint_error,
    sum, sum_sq_dev, sum_abs_diff, charbonnier_sum,
};

}  // namespace evmesh::simd::detail
