// Timing comparison of the OpenMP kernels against their serial reference
// implementations, with an agreement check on every pair.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "shapcause/gaussian.hpp"
#include "shapcause/model.hpp"
#include "shapcause/parallel.hpp"
#include "shapcause/reference.hpp"
#include "shapcause/rng.hpp"
#include "shapcause/shapley.hpp"
#include "shapcause/value_function.hpp"

using namespace shapcause;

namespace {

double time_seconds(const std::function<void()>& f) {
    const auto start = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
}

void report(const std::string& name, double serial_s, double parallel_s,
            double max_diff) {
    std::printf("%-28s serial %8.1f ms   parallel %8.1f ms   speedup %4.2fx   max|diff| %.3g\n",
                name.c_str(), serial_s * 1e3, parallel_s * 1e3,
                serial_s / parallel_s, max_diff);
}

}  // namespace

int main() {
    const int threads = par::thread_limit();
    std::printf("threads: %d (cap with SHAPCAUSE_THREADS)\n\n", threads);

    {
        const std::size_t n = 2000000;
        const int m = 8;
        Rng rng(1);
        RowMatrix rows(static_cast<Eigen::Index>(n), m);
        for (Eigen::Index i = 0; i < rows.rows(); ++i)
            for (int j = 0; j < m; ++j) rows(i, j) = rng.uniform(-1.0, 1.0);
        const ModelFunction model(InteractionModel{
            0.5, {1.0, -2.0, 0.5, 0.25, -1.0, 0.75, 2.0, -0.5}, {{0, 7, 0.3}, {2, 4, -0.6}}});

        double serial_result = 0.0, parallel_result = 0.0;
        const double serial_s =
            time_seconds([&] { serial_result = reference::batch_mean(model, rows); });
        const double parallel_s =
            time_seconds([&] { parallel_result = batch_mean(model, rows); });
        report("batch_mean (2e6 x 8)", serial_s, parallel_s,
               std::abs(serial_result - parallel_result));
    }

    {
        const std::size_t n = 1000000;
        const GaussianDistribution g = GaussianDistribution::equicorrelated(4, 0.4);
        RowMatrix serial_rows, parallel_rows;
        par::set_thread_limit(1);
        const double serial_s =
            time_seconds([&] { serial_rows = gaussian_sample(g, n, 9); });
        par::set_thread_limit(0);
        const double parallel_s =
            time_seconds([&] { parallel_rows = gaussian_sample(g, n, 9); });
        report("gaussian_sample (1e6 x 4)", serial_s, parallel_s,
               (serial_rows - parallel_rows).cwiseAbs().maxCoeff());
    }

    {
        const int m = 8;
        const ModelFunction model(LinearModel{0.0, {1, -2, 3, -1, 2, 0.5, -0.5, 1.5}});
        std::vector<double> x_star(m, 1.0);
        const ConditionalGaussianMcValue v(model, x_star,
                                           GaussianDistribution::equicorrelated(m, 0.3),
                                           4000, 11);
        // Separate instances so the second run cannot reuse the memo table.
        const ConditionalGaussianMcValue v2(model, x_star,
                                            GaussianDistribution::equicorrelated(m, 0.3),
                                            4000, 11);
        AttributionResult serial_result, parallel_result;
        const double serial_s =
            time_seconds([&] { serial_result = reference::shapley_exact(v); });
        const double parallel_s =
            time_seconds([&] { parallel_result = shapley_exact(v2); });
        double max_diff = 0.0;
        for (int j = 0; j < m; ++j)
            max_diff = std::max(max_diff,
                                std::abs(serial_result.phi[j] - parallel_result.phi[j]));
        report("shapley_exact (m=8, MC v)", serial_s, parallel_s, max_diff);
    }

    {
        const TableValueFunction v = TableValueFunction::random(12, 5);
        AttributionResult serial_result, parallel_result;
        const double serial_s = time_seconds(
            [&] { serial_result = reference::shapley_permutation_sampling(v, 100000, 3); });
        const double parallel_s = time_seconds(
            [&] { parallel_result = shapley_permutation_sampling(v, 100000, 3); });
        double max_diff = 0.0;
        for (int j = 0; j < 12; ++j)
            max_diff = std::max(max_diff,
                                std::abs(serial_result.phi[j] - parallel_result.phi[j]));
        report("permutation sampling (m=12)", serial_s, parallel_s, max_diff);
    }

    return 0;
}
