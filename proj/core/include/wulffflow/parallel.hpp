#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace wulffflow {

// Cap on internal data parallelism. Defaults to WULFFFLOW_THREADS if set,
// otherwise 1. Results never depend on this value: work is cut into fixed
// blocks and reductions combine block partials in a fixed order.
int num_threads();
void set_num_threads(int n);

inline constexpr std::size_t kBlock = 4096;

// Calls fn(begin, end) for consecutive blocks of size kBlock covering [0, n).
void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// Deterministic reduction: each block produces a partial, partials are
// combined pairwise in block order.
double blocked_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& block_fn);

double pairwise_sum(const double* x, std::size_t n);

namespace detail {
// Extraction boundaries for reproducible_sum; exact == false when the
// magnitudes are too close to the overflow or underflow range.
struct FoldPlan {
    double s1 = 0.0, s2 = 0.0;
    bool exact = false;
};
FoldPlan fold_plan(double max_abs, std::size_t n);
}  // namespace detail

// Order-independent sum of value(k), k in [0, n): the result depends only on
// the multiset of values, so permuted or mirrored data give bitwise-equal
// sums. Each value is split against two power-of-two boundaries derived from
// max|value| and n; the split parts add exactly, the remainder (below
// n·2^-100·max|value|) is dropped. Non-finite values propagate.
template <class F>
double reproducible_sum(std::size_t n, F&& value)
{
    if (n == 0) return 0.0;
    const std::size_t nb = (n + kBlock - 1) / kBlock;
    std::vector<double> p1(nb), p2(nb);
    parallel_blocks(n, [&](std::size_t b, std::size_t e) {
        double m[4] = {0.0, 0.0, 0.0, 0.0};
        std::size_t k = b;
        for (; k + 4 <= e; k += 4)
            for (int j = 0; j < 4; ++j) {
                const double a = std::abs(value(k + j));
                if (!(a <= m[j])) m[j] = a;
            }
        for (; k < e; ++k) {
            const double a = std::abs(value(k));
            if (!(a <= m[0])) m[0] = a;
        }
        for (int j = 1; j < 4; ++j)
            if (!(m[j] <= m[0])) m[0] = m[j];
        p1[b / kBlock] = m[0];
    });
    double m = 0.0;
    for (double v : p1)
        if (!(v <= m)) m = v;
    if (m == 0.0) return 0.0;
    const detail::FoldPlan plan = std::isfinite(m) ? detail::fold_plan(m, n) : detail::FoldPlan{};
    if (!plan.exact) {
        parallel_blocks(n, [&](std::size_t b, std::size_t e) {
            double acc = 0.0;
            for (std::size_t k = b; k < e; ++k) acc += value(k);
            p1[b / kBlock] = acc;
        });
        return pairwise_sum(p1.data(), nb);
    }
    const double s1 = plan.s1, s2 = plan.s2;
    parallel_blocks(n, [&](std::size_t b, std::size_t e) {
        // The extracted parts add exactly, so independent accumulators are
        // free to split the dependency chain.
        double a1[4] = {0.0, 0.0, 0.0, 0.0}, a2[4] = {0.0, 0.0, 0.0, 0.0};
        auto fold = [&](int j, double x) {
            const double q1 = (s1 + x) - s1;
            const double r = x - q1;
            a1[j] += q1;
            a2[j] += (s2 + r) - s2;
        };
        std::size_t k = b;
        for (; k + 4 <= e; k += 4)
            for (int j = 0; j < 4; ++j) fold(j, value(k + j));
        for (; k < e; ++k) fold(0, value(k));
        p1[b / kBlock] = (a1[0] + a1[1]) + (a1[2] + a1[3]);
        p2[b / kBlock] = (a2[0] + a2[1]) + (a2[2] + a2[3]);
    });
    double t1 = 0.0, t2 = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
        t1 += p1[b];
        t2 += p2[b];
    }
    return t1 + t2;
}
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

}  // namespace wulffflow
