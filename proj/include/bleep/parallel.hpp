#ifndef BLEEP_PARALLEL_HPP
#define BLEEP_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace bleep {

/**
 * Process-wide worker count used by the row-parallel kernels (matmul, k-NN, imputation).
 * Defaults to 1, which guarantees bit-exact reproducibility.
 */
int workers();

void set_workers(int n);

/**
 * Splits `[0, n)` into contiguous chunks and runs `fun(begin, end)` on each chunk,
 * one chunk per worker. Runs inline when only one worker is configured.
 */
void parallel_ranges(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fun, int num_workers = workers());

}

#endif
