#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <vector>

namespace ionmirror
{

// Worker count from IONMIRROR_THREADS, else the hardware concurrency.
unsigned worker_count();

// Calls fn(i) for i in [0, n) on up to worker_count() threads. Each index is
// visited exactly once; the first exception (lowest index) is rethrown after
// all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Results are stored in index order regardless of scheduling.
template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn)
{
    std::vector<T> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

} // namespace ionmirror
