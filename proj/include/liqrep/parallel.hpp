#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace liqrep {

// Work is split into fixed-size chunks whose boundaries depend only on the item
// count, never on the thread count. Callers that reduce per-chunk partials in
// chunk order therefore get bit-identical results for any number of threads.
inline constexpr std::size_t kChunkSize = 2048;

inline std::size_t chunk_count(std::size_t n_items, std::size_t chunk = kChunkSize) {
    return (n_items + chunk - 1) / chunk;
}

template <class Fn>
void parallel_chunks(std::size_t n_items, unsigned threads, Fn&& fn,
                     std::size_t chunk = kChunkSize) {
    const std::size_t n_chunks = chunk_count(n_items, chunk);
    auto body = [&](std::size_t c) {
        const std::size_t begin = c * chunk;
        const std::size_t end = std::min(n_items, begin + chunk);
        fn(c, begin, end);
    };
    if (threads <= 1 || n_chunks <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) body(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            try {
                body(c);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const unsigned n_workers = static_cast<unsigned>(std::min<std::size_t>(threads, n_chunks));
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace liqrep
