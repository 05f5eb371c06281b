#pragma once

#include <cstddef>
#include <functional>

namespace adass {

/// Worker count from ADASS_THREADS, or 1 when unset or invalid.
std::size_t default_threads();

/// Calls fn(i) for i in [0, n) on up to `threads` workers in contiguous
/// chunks. fn must only write to slots owned by i.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace adass
