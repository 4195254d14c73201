#pragma once

#include <cstddef>
#include <functional>

namespace mfof {

// Static contiguous partition of [0, n) over `threads` workers. Results must be
// written to per-index slots; reductions happen afterwards in index order, so the
// outcome does not depend on the thread count.
// Process-wide worker count used when callers pass threads <= 0 (default 1).
int default_threads();
void set_default_threads(int threads);

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mfof
