#pragma once

#include <cstddef>
#include <functional>

namespace kolmo {

/// Worker cap: KOLMO_THREADS if set and positive, else hardware concurrency.
std::size_t max_threads();

/// Runs body(i) for i in [0, count) on up to max_threads() threads. Each index
/// is processed exactly once; the first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace kolmo
