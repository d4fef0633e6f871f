#pragma once

// Static-partition parallel loop. Each index is computed by exactly one thread
// and written to its own slot, so the result never depends on `threads`.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace catmap {

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body)
{
    threads = std::max(1u, std::min<unsigned>(threads, unsigned(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i)
            body(i);
        return;
    }
    std::exception_ptr first;
    std::size_t first_index = count;
    std::mutex mu;
    auto worker = [&](unsigned w) {
        for (std::size_t i = w; i < count; i += threads) {
            try {
                body(i);
            } catch (...) {
                // keep the error of the lowest index, as a serial loop would
                std::lock_guard lock(mu);
                if (i < first_index) {
                    first_index = i;
                    first = std::current_exception();
                }
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back(worker, w);
    for (auto& t : pool)
        t.join();
    if (first)
        std::rethrow_exception(first);
}

} // namespace catmap
