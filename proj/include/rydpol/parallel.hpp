#pragma once

#include <cstddef>
#include <functional>

namespace rydpol {

/// Worker count: RYDPOL_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
unsigned thread_count();

/// Calls body(i) for i in [0, n). Iterations are split into contiguous
/// blocks across threads; body must only write to slot i of its outputs.
/// The first exception thrown by any iteration is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

} // namespace rydpol
