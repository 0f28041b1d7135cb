#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace gbc {

// Work-sharing helper whose output layout is independent of the worker count.
// The index range is cut into fixed-size chunks; workers pull chunk indices
// from an atomic dispenser and run f(chunk_index, lo, hi). Callers store
// per-chunk (or per-index) partial results and combine them serially in chunk
// order afterwards, which keeps floating-point reductions byte-stable no
// matter how many threads ran.
template <class F>
void parallel_chunks(std::int64_t n, std::int64_t chunk_size, int workers, F&& f) {
    if (n <= 0) return;
    if (chunk_size < 1) chunk_size = 1;
    const std::int64_t chunks = (n + chunk_size - 1) / chunk_size;
    if (workers <= 1 || chunks == 1) {
        for (std::int64_t c = 0; c < chunks; ++c)
            f(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto run = [&] {
        for (;;) {
            const std::int64_t c = next.fetch_add(1, std::memory_order_relaxed);
            if (c >= chunks || failed.load(std::memory_order_relaxed)) return;
            try {
                f(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int spawn = static_cast<int>(std::min<std::int64_t>(workers, chunks)) - 1;
    pool.reserve(static_cast<std::size_t>(spawn));
    for (int t = 0; t < spawn; ++t) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

// Per-item variant for coarse-grained jobs (one slot per item).
template <class F>
void parallel_items(std::int64_t n, int workers, F&& f) {
    parallel_chunks(n, 1, workers, [&](std::int64_t, std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) f(i);
    });
}

}  // namespace gbc
