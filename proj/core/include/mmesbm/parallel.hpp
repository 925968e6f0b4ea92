#ifndef MMESBM_PARALLEL_HPP
#define MMESBM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mmesbm {

// Runs fn(0..n_tasks-1) on up to n_jobs threads. Tasks must be independent;
// callers collect results into pre-sized slots so the merge order is
// deterministic regardless of scheduling.
inline void parallel_for(int n_tasks, int n_jobs, const std::function<void(int)>& fn) {
    if (n_tasks <= 0) return;
    if (n_jobs <= 1 || n_tasks == 1) {
        for (int t = 0; t < n_tasks; ++t) fn(t);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const int t = next.fetch_add(1);
            if (t >= n_tasks || failed.load()) return;
            try {
                fn(t);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    const int k = std::min(n_jobs, n_tasks);
    threads.reserve(k);
    for (int i = 0; i < k; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace mmesbm

#endif
