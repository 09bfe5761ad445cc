#include <atomic>
#include <cstdlib>
#include <string_view>

#include "evmesh/error.hpp"
#include "kernels_internal.hpp"

namespace evmesh::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(EVMESH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const KernelTable* pick_initial() noexcept {
  const KernelTable* best = avx2_kernels();
  if (const char* env = std::getenv("EVMESH_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return &scalar_kernels();
    if (want == "avx2" && best != nullptr) return best;
  }
  return best != nullptr ? best : &scalar_kernels();
}

std::atomic<const KernelTable*>& active() noexcept {
  static std::atomic<const KernelTable*> table{pick_initial()};
  return table;
}

}  // namespace

const KernelTable& scalar_kernels() noexcept { return detail::kScalarTable; }

const KernelTable* avx2_kernels() noexcept {
#if defined(EVMESH_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &detail::kAvx2Table : nullptr;
#else
  return nullptr;
#endif
}

bool backend_available(Backend backend) noexcept {
  switch (backend) {
    case Backend::kScalar: return true;
    case Backend::kAvx2: return avx2_kernels() != nullptr;
  }
  return false;
}

void set_backend(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      active().store(&scalar_kernels());
      return;
    case Backend::kAvx2:
      if (const KernelTable* t = avx2_kernels()) {
        active().store(t);
        return;
      }
      break;
  }
  throw ParameterError("simd", "requested SIMD backend is not available on this CPU");
}

Backend active_backend() noexcept { return active().load()->backend; }

const KernelTable& kernels() noexcept { return *active().load(); }

}  // namespace evmesh::simd
