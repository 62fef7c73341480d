#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace netdyn {

/// Run fn(job) for job = 0..n_jobs-1 on a bounded pool of workers.
/// Jobs must be independent; each writes only its own output slot, so the
/// result is identical for any worker count. The first exception thrown by
/// a job is rethrown on the calling thread after all workers join.
inline void parallel_for(int n_jobs, int n_threads,
                         const std::function<void(int)>& fn) {
    if (n_jobs <= 0) return;
    n_threads = std::max(1, std::min(n_threads, n_jobs));

    if (n_threads == 1) {
        for (int j = 0; j < n_jobs; ++j) fn(j);
        return;
    }

    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const int j = next.fetch_add(1);
            if (j >= n_jobs) return;
            try {
                fn(j);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };

    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

inline int default_thread_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace netdyn
