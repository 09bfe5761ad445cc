#pragma once

#include <cstddef>
#include <functional>

namespace evmesh {

/// Worker count used by the internally parallel operations. Results never
/// depend on this value; only wall time does.
void set_thread_count(int threads);
int thread_count() noexcept;

/// Splits [0, n) into contiguous chunks and calls fn(begin, end) for each
/// chunk, one chunk per worker. Returns after every chunk finished;
/// the first exception thrown by a chunk is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace evmesh
