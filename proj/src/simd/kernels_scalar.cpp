#include <cmath>

#include "kernels_internal.hpp"

namespace evmesh::simd::detail {
namespace {

void mul_acc(float* acc, const float* a, const float* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const float p = a[i] * b[i];
    acc[i] = acc[i] + p;
  }
}

void add(float* out, const float* a, const float* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void scale(float* out, const float* in, float s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] * s;
}

void blend(float* out, const float* a, const float* b, const float* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const float wa = w[i] * a[i];
    const float wb = (1.0F - w[i]) * b[i];
    out[i] = wa + wb;
  }
}

void lerp(float* out, const float* a, const float* b, float alpha, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const float d = alpha * (a[i] - b[i]);
    out[i] = b[i] + d;
  }
}

void abs_acc(float* acc, const float* in, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] = acc[i] + std::fabs(in[i]);
}

void endpoint_error(double* out, const float* pu, const float* pv, const float* gu, const float* gv,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double du = static_cast<double>(pu[i]) - static_cast<double>(gu[i]);
    const double dv = static_cast<double>(pv[i]) - static_cast<double>(gv[i]);
    const double sq = du * du;
    const double sv = dv * dv;
    out[i] = std::sqrt(sq + sv);
  }
}

double sum(const float* in, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(in[i]);
  return s;
}

double sum_sq_dev(const float* in, std::size_t n, double mean) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(in[i]) - mean;
    s += d * d;
  }
  return s;
}

double sum_abs_diff(const float* a, const float* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
  return s;
}

double charbonnier_sum(const float* a, const float* b, std::size_t n, double xi) {
  const double xi2 = xi * xi;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    s += std::sqrt(d * d + xi2);
  }
  return s;
}

}  // namespace

const KernelTable kScalarTable{
    Backend::kScalar, "scalar", mul_acc, add, scale, blend, lerp, abs_acc, endpoint_error,
    sum, sum_sq_dev, sum_abs_diff, charbonnier_sum,
};

}  // namespace evmesh::simd::detail
