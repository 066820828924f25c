#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace ivproc {

/// Worker-thread budget: the IVPROC_THREADS environment variable when set
/// (clamped to at least 1), otherwise the hardware concurrency.
inline unsigned thread_budget() {
    if (const char* env = std::getenv("IVPROC_THREADS")) {
        const long parsed = std::strtol(env, nullptr, 10);
        if (parsed >= 1) return static_cast<unsigned>(parsed);
        return 1;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Run body(i) for i in [0, count) across the thread budget. Each index is
/// processed exactly once and results must be written to per-index slots,
/// so the outcome is identical for any schedule. The first exception is
/// rethrown on the calling thread.
template <typename Body>
void parallel_for(long count, Body&& body) {
    const unsigned threads = std::min<unsigned>(thread_budget(), static_cast<unsigned>(std::max<long>(count, 1)));
    if (threads <= 1 || count <= 1) {
        for (long i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (long i = static_cast<long>(w); i < count; i += static_cast<long>(threads)) body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace ivproc
