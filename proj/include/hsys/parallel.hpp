#pragma once

#include <cstddef>
#include <functional>

namespace hsys {

/// Number of worker threads used for internal parallel loops. Read once from
/// HSYS_THREADS; defaults to the hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n). Iterations must be independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hsys
