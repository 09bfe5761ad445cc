#pragma once

#include "evmesh/simd/kernels.hpp"

namespace evmesh::simd::detail {

extern const KernelTable kScalarTable;

#if defined(EVMESH_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace evmesh::simd::detail
