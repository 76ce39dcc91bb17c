#pragma once

// Deterministic data-parallel loop: every index writes its own slot, so the
// thread count never changes results, only wall time. COURNOT_THREADS caps
// the worker count.

#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace cournot {

inline unsigned thread_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("COURNOT_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1 && (unsigned long)v < n) n = unsigned(v);
    }
    return n;
}

/// Runs fn(i) for i in [0, count), striped across threads. The first
/// exception thrown by any index is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const unsigned workers = std::min<std::size_t>(thread_count(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace cournot
