#include "surfstokes/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace surfstokes {

int configured_threads()
{
    const char* env = std::getenv("SURFSTOKES_THREADS");
    if (env == nullptr) return 1;
    int n = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), n);
    if (ec != std::errc() || n < 1) return 1;
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return std::min(n, hw);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body)
{
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < std::min(workers, count); ++w) pool.emplace_back(run);
    run();
    pool.clear();
    if (error) std::rethrow_exception(error);
}

}  // namespace surfstokes
