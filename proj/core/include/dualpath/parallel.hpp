#pragma once

#include <cstddef>
#include <functional>

namespace dualpath {

/// Runs fn(0), ..., fn(n - 1) on at most `threads` workers with a static
/// contiguous partition. When several calls throw, the exception from the
/// lowest index is rethrown after all workers have joined.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace dualpath
