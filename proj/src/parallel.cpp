#include "bleep/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace bleep {

namespace {

std::atomic<int> global_workers{1};

}

int workers() {
    return global_workers.load();
}

void set_workers(int n) {
    global_workers.store(std::max(1, n));
}

void parallel_ranges(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fun, int num_workers) {
    if (n == 0) {
        return;
    }

    std::size_t nthreads = std::min<std::size_t>(std::max(1, num_workers), n);
    if (nthreads == 1) {
        fun(0, n);
        return;
    }

    std::size_t chunk = n / nthreads, remainder = n % nthreads;
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(nthreads);
    threads.reserve(nthreads);

    std::size_t start = 0;
    for (std::size_t t = 0; t < nthreads; ++t) {
        std::size_t length = chunk + (t < remainder ? 1 : 0);
        threads.emplace_back([&, t, start, length]() {
            try {
                fun(start, start + length);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
        start += length;
    }

    for (auto& th : threads) {
        th.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

}
