#pragma once
#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace qtomo {

// Resolve a thread-count request: 0 means "use the hardware", anything else
// is clamped to at least 1.
inline unsigned resolve_threads(unsigned requested) {
    if (requested == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : hw;
    }
    return std::max(1u, requested);
}

// Run fn(job_index) for job_index in [0, n_jobs) on up to n_threads workers.
// Jobs are assigned round-robin so the partition is deterministic; callers
// must reduce results in job order to keep output independent of thread
// count.
inline void parallel_for(std::size_t n_jobs, unsigned n_threads,
                         const std::function<void(std::size_t)>& fn) {
    n_threads = resolve_threads(n_threads);
    if (n_threads == 1 || n_jobs <= 1) {
        for (std::size_t j = 0; j < n_jobs; ++j) fn(j);
        return;
    }
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(n_threads, n_jobs));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t j = w; j < n_jobs; j += workers) fn(j);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace qtomo
