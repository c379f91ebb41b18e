#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace wildfire {

// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each.
// threads <= 1 runs inline on the caller.
template <class Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn)
{
    if (threads <= 1 || n < 2) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, n);
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
}

inline unsigned default_threads()
{
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

} // namespace wildfire
