#pragma once

#include <cstdint>
#include <random>

namespace cpd {

/// Independent generator for chunk `chunk` of an experiment seeded with `seed`.
/// Runs inside a chunk draw from it in order.
std::mt19937_64 chunk_stream(std::uint64_t seed, std::uint64_t chunk);

/// Fixed chunk size for Monte Carlo aggregation; chunk boundaries never depend
/// on the worker count.
inline constexpr std::size_t kRunsPerChunk = 1024;

/// Calls fn(chunk) for chunk in [0, chunks) on up to `workers` threads
/// (0 = hardware concurrency). Exceptions from fn are rethrown on the caller.
template <class Fn>
void parallel_chunks(std::size_t chunks, unsigned workers, Fn&& fn);

}  // namespace cpd

#include "cpd/detail/parallel_impl.hpp"
