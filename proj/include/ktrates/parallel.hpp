// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace ktrates {

// Process-wide parallelism cap, set from the CLI's --threads flag.
// Default 1: results must not depend on the cap, only wall time may.
inline int& max_threads_ref() {
    static int cap = 1;
    return cap;
}

inline void set_max_threads(int n) { max_threads_ref() = std::max(1, n); }
inline int max_threads() { return max_threads_ref(); }

// Static block partition of [0, count); fn(i) must write only to slot i of
// any shared output, which keeps results identical for every thread count.
template <typename F>
void parallel_for(std::size_t count, F&& fn) {
    const std::size_t nt =
        std::min<std::size_t>(static_cast<std::size_t>(max_threads()), count);
    if (nt <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (count + nt - 1) / nt;
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn]() {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace ktrates
