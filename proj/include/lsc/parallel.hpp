#pragma once

#include <algorithm>
#include <thread>
#include <vector>

#include <Eigen/Core>

namespace lsc {

/// Runs fn(i) for i in [0, n) over up to `threads` workers in contiguous
/// chunks. Each index is processed by exactly one worker, so results do not
/// depend on the thread count when fn(i) touches only slot i.
template <class Fn>
void parallel_for(Eigen::Index n, int threads, Fn&& fn) {
    const Eigen::Index workers = std::clamp<Eigen::Index>(threads, 1, std::max<Eigen::Index>(n, 1));
    if (workers == 1) {
        for (Eigen::Index i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const Eigen::Index chunk = (n + workers - 1) / workers;
    for (Eigen::Index w = 0; w < workers; ++w) {
        const Eigen::Index begin = w * chunk;
        const Eigen::Index end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] {
            for (Eigen::Index i = begin; i < end; ++i) fn(i);
        });
    }
}

} // namespace lsc
