#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace mmc::detail {

inline constexpr std::size_t kReduceBlock = 1024;

/// Splits [0, n) into fixed blocks, reduces each block with `block_sum(begin, end)`, then
/// combines the block results in a fixed pairwise tree. The result depends only on n,
/// never on how blocks are scheduled.
template <class T, class BlockSum, class Combine>
T blocked_reduce(std::size_t n, BlockSum&& block_sum, Combine&& combine) {
    if (n == 0) return block_sum(0, 0);
    std::vector<T> partial;
    partial.reserve(n / kReduceBlock + 1);
    for (std::size_t begin = 0; begin < n; begin += kReduceBlock) {
        partial.push_back(block_sum(begin, std::min(n, begin + kReduceBlock)));
    }
    while (partial.size() > 1) {
        std::size_t out = 0;
        for (std::size_t i = 0; i + 1 < partial.size(); i += 2) {
            combine(partial[i], partial[i + 1]);
            if (out != i) partial[out] = std::move(partial[i]);
            ++out;
        }
        if (partial.size() % 2 == 1) partial[out++] = std::move(partial.back());
        partial.resize(out);
    }
    return std::move(partial.front());
}

template <class Range>
double pairwise_sum(const Range& values) {
    if (values.size() == 0) return 0.0;
    return blocked_reduce<double>(
        values.size(),
        [&](std::size_t b, std::size_t e) {
            double s = 0.0;
            for (std::size_t i = b; i < e; ++i) s += values[i];
            return s;
        },
        [](double& a, double b) { a += b; });
}

}  // namespace mmc::detail
