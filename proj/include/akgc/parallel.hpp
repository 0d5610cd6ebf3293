#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

namespace akgc {

// Number of work chunks for an item count. Depends only on the workload, not
// on the thread count, so reductions over per-chunk buffers visit the same
// topology no matter how many workers run them. Reducing chunk buffers in
// chunk order therefore gives bit-identical results for any --threads value.
inline int chunk_count(std::size_t items, int max_chunks = 16) {
    if (items == 0) return 0;
    return static_cast<int>(std::min<std::size_t>(items, static_cast<std::size_t>(max_chunks)));
}

// Half-open item range for chunk c of n_chunks over n items.
inline std::pair<std::size_t, std::size_t> chunk_range(std::size_t items, int n_chunks, int c) {
    const std::size_t base = items / static_cast<std::size_t>(n_chunks);
    const std::size_t rem = items % static_cast<std::size_t>(n_chunks);
    const std::size_t uc = static_cast<std::size_t>(c);
    const std::size_t lo = uc * base + std::min(uc, rem);
    return {lo, lo + base + (uc < rem ? 1 : 0)};
}

// Runs fn(chunk) for chunk = 0..n_chunks-1 across at most n_threads workers.
// Exceptions are captured and rethrown on the caller thread.
inline void parallel_chunks(int n_chunks, int n_threads, const std::function<void(int)>& fn) {
    if (n_chunks <= 0) return;
    if (n_threads <= 1 || n_chunks == 1) {
        for (int c = 0; c < n_chunks; ++c) fn(c);
        return;
    }
    const int workers = std::min(n_threads, n_chunks);
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const int c = next.fetch_add(1);
                if (c >= n_chunks || failed.load()) return;
                try {
                    fn(c);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

} // namespace akgc
