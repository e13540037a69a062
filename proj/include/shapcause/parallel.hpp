#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace shapcause::par {

namespace detail {

// Exceptions must not escape an OpenMP region; the first one is captured and
// rethrown after the join.
class ErrorCapture {
public:
    template <class F>
    void run(F&& f) {
        if (armed_.load(std::memory_order_relaxed)) return;
        try {
            f();
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical(shapcause_error_capture)
#endif
            {
                if (!error_) error_ = std::current_exception();
            }
            armed_.store(true, std::memory_order_relaxed);
        }
    }

    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::exception_ptr error_ = nullptr;
    std::atomic<bool> armed_{false};
};

}  // namespace detail

/// Number of threads parallel kernels may use. Resolution order: programmatic
/// override, then the SHAPCAUSE_THREADS environment variable, then the OpenMP
/// default. Always >= 1.
int thread_limit();

/// Overrides the thread limit (0 clears the override). Used by tests and the
/// benchmark to pin worker counts.
void set_thread_limit(int n);

/// Kahan compensated accumulator.
struct KahanSum {
    double sum = 0.0;
    double c = 0.0;

    void add(double x) {
        const double y = x - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

/// Streaming mean/variance (Welford). Merging two accumulators is exact in
/// the same sense as the sequential update, so block-wise computation keeps
/// results independent of thread count.
struct MeanVar {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const MeanVar& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(other.count);
        const double delta = other.mean - mean;
        const double n = na + nb;
        mean += delta * nb / n;
        m2 += other.m2 + delta * delta * na * nb / n;
        count += other.count;
    }

    double variance() const {  // sample variance, n-1 denominator
        return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
    }

    double std_error() const;
};

// Fixed block size for all deterministic reductions. The block structure
// depends only on n, never on the thread count, so partial results and their
// sequential combination are identical for any parallel schedule.
inline constexpr std::size_t kBlock = 2048;

/// Deterministic parallel sum of term(i) for i in [0, n): Kahan within each
/// fixed-size block, blocks in parallel, sequential Kahan over block partials.
template <class F>
double blocked_sum(std::size_t n, F&& term) {
    if (n == 0) return 0.0;
    const std::ptrdiff_t n_blocks =
        static_cast<std::ptrdiff_t>((n + kBlock - 1) / kBlock);
    std::vector<double> partial(static_cast<std::size_t>(n_blocks));
    detail::ErrorCapture errors;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(thread_limit())
#endif
    for (std::ptrdiff_t b = 0; b < n_blocks; ++b) {
        errors.run([&, b] {
            const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
            const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
            KahanSum acc;
            for (std::size_t i = lo; i < hi; ++i) acc.add(term(i));
            partial[static_cast<std::size_t>(b)] = acc.sum;
        });
    }
    errors.rethrow();
    KahanSum total;
    for (double p : partial) total.add(p);
    return total.sum;
}

template <class F>
double blocked_mean(std::size_t n, F&& term) {
    return blocked_sum(n, term) / static_cast<double>(n);
}

/// Deterministic parallel mean/variance with the same block structure.
template <class F>
MeanVar blocked_mean_var(std::size_t n, F&& term) {
    MeanVar total;
    if (n == 0) return total;
    const std::ptrdiff_t n_blocks =
        static_cast<std::ptrdiff_t>((n + kBlock - 1) / kBlock);
    std::vector<MeanVar> partial(static_cast<std::size_t>(n_blocks));
    detail::ErrorCapture errors;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(thread_limit())
#endif
    for (std::ptrdiff_t b = 0; b < n_blocks; ++b) {
        errors.run([&, b] {
            const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
            const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
            MeanVar acc;
            for (std::size_t i = lo; i < hi; ++i) acc.add(term(i));
            partial[static_cast<std::size_t>(b)] = acc;
        });
    }
    errors.rethrow();
    for (const auto& p : partial) total.merge(p);
    return total;
}

/// Runs body(i) for i in [0, n) in parallel. body must write only to
/// i-indexed slots; iterations may not share mutable state.
template <class F>
void parallel_for(std::size_t n, F&& body) {
    const std::ptrdiff_t sn = static_cast<std::ptrdiff_t>(n);
    detail::ErrorCapture errors;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(thread_limit())
#endif
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
        errors.run([&, i] { body(static_cast<std::size_t>(i)); });
    }
    errors.rethrow();
}

}  // namespace shapcause::par
