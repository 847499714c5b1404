#pragma once

#include <cstddef>
#include <functional>

namespace tipping {

// Worker count used when callers pass 0; defaults to hardware concurrency.
unsigned default_workers();
void set_default_workers(unsigned n);

// Runs fn(i) for i in [0, n) on a pool of threads. Work items must be
// independent; the first exception thrown is rethrown after all threads join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned workers = 0);

}  // namespace tipping
