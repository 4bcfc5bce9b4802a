#include "wulffflow/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace wulffflow {

namespace {

int threads_from_env()
{
    const char* s = std::getenv("WULFFFLOW_THREADS");
    if (!s) return 1;
    try {
        int v = std::stoi(s);
        return v > 0 ? v : 1;
    } catch (...) {
        return 1;
    }
}

std::atomic<int>& thread_cap()
{
    static std::atomic<int> cap{threads_from_env()};
    return cap;
}

}  // namespace

int num_threads() { return thread_cap().load(); }

void set_num_threads(int n) { thread_cap().store(std::max(1, n)); }

void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn)
{
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    const int t = std::min<int>(num_threads(), static_cast<int>(nblocks));
    if (t <= 1) {
        for (std::size_t b = 0; b < nblocks; ++b) fn(b * kBlock, std::min(n, (b + 1) * kBlock));
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t b = next++; b < nblocks; b = next++) fn(b * kBlock, std::min(n, (b + 1) * kBlock));
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(t - 1));
    for (int i = 1; i < t; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

double pairwise_sum(const double* x, std::size_t n)
{
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

double blocked_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& block_fn)
{
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_blocks(n, [&](std::size_t b, std::size_t e) { partial[b / kBlock] = block_fn(b, e); });
    return pairwise_sum(partial);
}

namespace detail {

// |x| < 2^e1 and n ≤ 2^L. With s1 = 2^(e1+L+1) every q1 is a multiple of
// ulp(s1)/2 and n of them stay below s1, so their sum is exact; the
// remainders are below 2^(e1+L-51) and the same argument applies to s2.
FoldPlan fold_plan(double max_abs, std::size_t n)
{
    const int e1 = std::ilogb(max_abs) + 1;
    const int L = static_cast<int>(std::bit_width(n - 1));
    const int k1 = e1 + L + 1;
    const int k2 = (e1 + L - 51) + L + 1;
    FoldPlan p;
    p.exact = k1 <= 1020 && k2 >= -1020;
    if (p.exact) {
        p.s1 = std::ldexp(1.0, k1);
        p.s2 = std::ldexp(1.0, k2);
    }
    return p;
}

}  // namespace detail

}  // namespace wulffflow
