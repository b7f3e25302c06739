#pragma once

#include <cstddef>
#include <functional>

namespace measchrod {

/// Worker count: hardware concurrency, capped by MEASCHROD_THREADS when set.
int default_workers();

/// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks are
/// handed out dynamically; the first exception thrown is rethrown here after
/// all workers stop.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& task);

}  // namespace measchrod
