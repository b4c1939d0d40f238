#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

namespace forge {

/// Runs body(i) for i in [0, n) on at most `parallelism` threads. Workers stop
/// taking new indices once `cancel` is set or a body throws; the first
/// exception is rethrown after all workers have joined.
template <class Body>
void parallel_for(std::size_t n, std::size_t parallelism, Body&& body, const std::atomic<bool>* cancel = nullptr) {
    if (parallelism == 0) throw std::invalid_argument("parallelism must be positive");
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mu;

    auto worker = [&] {
        for (;;) {
            if (failed.load() || (cancel && cancel->load())) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
            }
        }
    };

    const std::size_t threads = std::min(parallelism, n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace forge
