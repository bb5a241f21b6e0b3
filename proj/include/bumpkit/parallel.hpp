#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace bumpkit {

// Process-wide worker count for interval scans; 1 keeps everything on the calling thread.
void set_jobs(unsigned jobs);
unsigned jobs();

// Calls fn(i) for i in [0, n). Each index is handled exactly once, so writes to slot i are race-free.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    unsigned w = std::min<std::size_t>(jobs(), n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (unsigned t = 0; t < w; ++t)
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += w) fn(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace bumpkit
