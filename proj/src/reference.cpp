#include "shapcause/reference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "shapcause/errors.hpp"
#include "shapcause/rng.hpp"
#include "shapcause/shapley.hpp"

namespace shapcause::reference {

double batch_mean(const ModelFunction& model, const RowMatrix& rows) {
    if (rows.rows() == 0)
        throw std::invalid_argument("reference::batch_mean: empty sample matrix");
    double sum = 0.0, c = 0.0;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const double y = model.evaluate(row_span(rows, i)) - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(rows.rows());
}

AttributionResult shapley_exact(const ValueFunction& v) {
    const int m = v.dim();
    const std::uint32_t n = 1u << m;
    auto payoff = [&](std::uint32_t mask) {
        const double x = v.value(Coalition(mask, m));
        if (!std::isfinite(x))
            throw EvaluationError("non-finite payoff for coalition " +
                                  Coalition(mask, m).to_string());
        return x;
    };

    AttributionResult result;
    result.method = Method::exact;
    result.phi.assign(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < m; ++j) {
        const std::uint32_t bit = 1u << j;
        double acc = 0.0;
        for (std::uint32_t mask = 0; mask < n; ++mask) {
            if (mask & bit) continue;
            acc += shapley_weight(std::popcount(mask), m) *
                   (payoff(mask | bit) - payoff(mask));
        }
        result.phi[static_cast<std::size_t>(j)] = acc;
    }
    result.phi0 = payoff(0);
    double total = 0.0;
    for (double p : result.phi) total += p;
    result.efficiency_residual = payoff(n - 1) - result.phi0 - total;
    return result;
}

AttributionResult shapley_permutation_sampling(const ValueFunction& v,
                                               int n_permutations,
                                               std::uint64_t seed) {
    const int m = v.dim();
    if (n_permutations < 2)
        throw std::invalid_argument("reference sampler: need at least 2 permutations");

    std::vector<std::vector<double>> pair_avg(
        static_cast<std::size_t>(n_permutations),
        std::vector<double>(static_cast<std::size_t>(m)));
    std::vector<int> order(static_cast<std::size_t>(m));
    for (int i = 0; i < n_permutations; ++i) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        std::iota(order.begin(), order.end(), 0);
        for (int k = m - 1; k > 0; --k)
            std::swap(order[static_cast<std::size_t>(k)],
                      order[rng.below(static_cast<std::uint64_t>(k) + 1)]);
        for (int pass = 0; pass < 2; ++pass) {
            Coalition s = Coalition::empty(m);
            double prev = v.value(s);
            for (int k = 0; k < m; ++k) {
                const int j = pass == 0 ? order[static_cast<std::size_t>(k)]
                                        : order[static_cast<std::size_t>(m - 1 - k)];
                s = s.with(j);
                const double cur = v.value(s);
                auto& slot = pair_avg[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                slot = pass == 0 ? cur - prev : 0.5 * (slot + (cur - prev));
                prev = cur;
            }
        }
    }

    AttributionResult result;
    result.method = Method::permutation_sampling;
    result.seed = seed;
    result.phi.assign(static_cast<std::size_t>(m), 0.0);
    result.std_errors.emplace(static_cast<std::size_t>(m), 0.0);
    const double n = static_cast<double>(n_permutations);
    for (int j = 0; j < m; ++j) {
        double mean = 0.0;
        for (const auto& row : pair_avg) mean += row[static_cast<std::size_t>(j)];
        mean /= n;
        double ss = 0.0;
        for (const auto& row : pair_avg) {
            const double d = row[static_cast<std::size_t>(j)] - mean;
            ss += d * d;
        }
        result.phi[static_cast<std::size_t>(j)] = mean;
        (*result.std_errors)[static_cast<std::size_t>(j)] =
            std::sqrt(ss / (n - 1.0) / n);
    }
    result.phi0 = v.value(Coalition::empty(m));
    double total = 0.0;
    for (double p : result.phi) total += p;
    result.efficiency_residual =
        v.value(Coalition::full(m)) - result.phi0 - total;
    return result;
}

}  // namespace shapcause::reference
