#include "shapcause/shapley.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "shapcause/errors.hpp"
#include "shapcause/parallel.hpp"
#include "shapcause/rng.hpp"

namespace shapcause {

namespace {

constexpr double kStructureTol = 1e-12;  // payoff-equality tolerance for axiom structure detection

double checked_value(const ValueFunction& v, std::uint32_t bits, int m) {
    const double x = v.value(Coalition(bits, m));
    if (!std::isfinite(x))
        throw EvaluationError("value function returned non-finite payoff for coalition " +
                              Coalition(bits, m).to_string());
    return x;
}

std::vector<double> weights_by_size(int m) {
    std::vector<double> w(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) w[static_cast<std::size_t>(k)] = shapley_weight(k, m);
    return w;
}

}  // namespace

double shapley_weight(int subset_size, int m) {
    if (m < 1) throw std::invalid_argument("shapley_weight: m must be >= 1");
    if (subset_size < 0 || subset_size > m - 1)
        throw std::invalid_argument("shapley_weight: subset size " +
                                    std::to_string(subset_size) +
                                    " out of range [0, m-1] for m=" + std::to_string(m));
    double w = 1.0 / static_cast<double>(m);
    for (int s = 1; s <= subset_size; ++s)
        w *= static_cast<double>(s) / static_cast<double>(m - s);
    return w;
}

AttributionResult shapley_exact(const ValueFunction& v, const ExactOptions& options) {
    const int m = v.dim();
    if (m < 1) throw std::invalid_argument("shapley_exact: empty feature set");
    if (m > options.enumeration_cap)
        throw CapacityError("shapley_exact: m=" + std::to_string(m) +
                            " exceeds enumeration cap " +
                            std::to_string(options.enumeration_cap) +
                            "; use permutation sampling");

    const std::uint32_t n = 1u << m;
    std::vector<double> table;
    if (options.cache_values) {
        table.resize(n);
        par::parallel_for(n, [&](std::size_t mask) {
            table[mask] = v.value(Coalition(static_cast<std::uint32_t>(mask), m));
        });
        for (std::uint32_t mask = 0; mask < n; ++mask)
            if (!std::isfinite(table[mask]))
                throw EvaluationError(
                    "value function returned non-finite payoff for coalition " +
                    Coalition(mask, m).to_string());
    }
    auto payoff = [&](std::uint32_t mask) {
        return options.cache_values ? table[mask] : checked_value(v, mask, m);
    };

    const std::vector<double> w = weights_by_size(m);
    std::vector<double> phi(static_cast<std::size_t>(m), 0.0);
    // Ascending-mask accumulation per feature; identical order with or
    // without the cache and at any thread count.
    par::parallel_for(static_cast<std::size_t>(m), [&](std::size_t j) {
        const std::uint32_t bit = 1u << j;
        par::KahanSum acc;
        for (std::uint32_t mask = 0; mask < n; ++mask) {
            if (mask & bit) continue;
            const int s = std::popcount(mask);
            acc.add(w[static_cast<std::size_t>(s)] * (payoff(mask | bit) - payoff(mask)));
        }
        phi[j] = acc.sum;
    });

    AttributionResult result;
    result.phi = std::move(phi);
    result.phi0 = payoff(0);
    result.method = Method::exact;
    par::KahanSum total;
    for (double p : result.phi) total.add(p);
    result.efficiency_residual = payoff(n - 1) - result.phi0 - total.sum;
    return result;
}

AttributionResult shapley_permutation_sampling(const ValueFunction& v,
                                               int n_permutations,
                                               std::uint64_t seed) {
    const int m = v.dim();
    if (m < 1) throw std::invalid_argument("permutation sampling: empty feature set");
    if (n_permutations < 2)
        throw std::invalid_argument("permutation sampling: need at least 2 permutations");

    const std::size_t n_pairs = static_cast<std::size_t>(n_permutations);
    constexpr std::size_t kPairBlock = 64;
    const std::size_t n_blocks = (n_pairs + kPairBlock - 1) / kPairBlock;
    // Per-block, per-feature streaming moments over the pair averages.
    std::vector<std::vector<par::MeanVar>> block_stats(
        n_blocks, std::vector<par::MeanVar>(static_cast<std::size_t>(m)));

    par::parallel_for(n_blocks, [&](std::size_t b) {
        const std::size_t lo = b * kPairBlock;
        const std::size_t hi = std::min(lo + kPairBlock, n_pairs);
        std::vector<int> order(static_cast<std::size_t>(m));
        std::vector<double> contrib(static_cast<std::size_t>(m));
        auto& stats = block_stats[b];
        for (std::size_t i = lo; i < hi; ++i) {
            Rng rng(mix_seed(seed, i));
            std::iota(order.begin(), order.end(), 0);
            for (int k = m - 1; k > 0; --k)  // Fisher-Yates
                std::swap(order[static_cast<std::size_t>(k)],
                          order[rng.below(static_cast<std::uint64_t>(k) + 1)]);

            // Forward walk plus the reversed walk of the same ordering.
            for (int pass = 0; pass < 2; ++pass) {
                Coalition s = Coalition::empty(m);
                double prev = checked_value(v, s.bits(), m);
                for (int k = 0; k < m; ++k) {
                    const int j = pass == 0 ? order[static_cast<std::size_t>(k)]
                                            : order[static_cast<std::size_t>(m - 1 - k)];
                    s = s.with(j);
                    const double cur = checked_value(v, s.bits(), m);
                    const double marginal = cur - prev;
                    if (pass == 0)
                        contrib[static_cast<std::size_t>(j)] = marginal;
                    else
                        contrib[static_cast<std::size_t>(j)] =
                            0.5 * (contrib[static_cast<std::size_t>(j)] + marginal);
                    prev = cur;
                }
            }
            for (int j = 0; j < m; ++j)
                stats[static_cast<std::size_t>(j)].add(contrib[static_cast<std::size_t>(j)]);
        }
    });

    AttributionResult result;
    result.phi.assign(static_cast<std::size_t>(m), 0.0);
    result.std_errors.emplace(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < m; ++j) {
        par::MeanVar total;
        for (std::size_t b = 0; b < n_blocks; ++b)
            total.merge(block_stats[b][static_cast<std::size_t>(j)]);
        result.phi[static_cast<std::size_t>(j)] = total.mean;
        (*result.std_errors)[static_cast<std::size_t>(j)] = total.std_error();
    }
    result.phi0 = checked_value(v, 0, m);
    result.method = Method::permutation_sampling;
    result.seed = seed;
    const double v_full = checked_value(v, (1u << m) - 1u, m);
    par::KahanSum total;
    for (double p : result.phi) total.add(p);
    result.efficiency_residual = v_full - result.phi0 - total.sum;
    return result;
}

AxiomReport check_axioms(const TableValueFunction& v1, const TableValueFunction& v2,
                         double tol) {
    if (v1.dim() != v2.dim())
        throw std::invalid_argument("check_axioms: games have different feature counts");
    const int m = v1.dim();
    const std::uint32_t n = 1u << m;

    const AttributionResult r1 = shapley_exact(v1);
    const AttributionResult r2 = shapley_exact(v2);
    AxiomReport report;

    {
        par::KahanSum s;
        for (double p : r1.phi) s.add(p);
        const double target = v1.value_at(n - 1) - v1.value_at(0);
        report.efficiency.worst = std::abs(s.sum - target);
        report.efficiency.pass = report.efficiency.worst <= tol;
        report.efficiency.detail = "sum(phi) vs v(full) - v(empty)";
    }

    for (int j = 0; j < m; ++j) {
        const std::uint32_t bit = 1u << j;
        bool is_dummy = true;
        for (std::uint32_t mask = 0; mask < n && is_dummy; ++mask) {
            if (mask & bit) continue;
            if (std::abs(v1.value_at(mask | bit) - v1.value_at(mask)) > kStructureTol)
                is_dummy = false;
        }
        if (is_dummy) {
            report.dummy_players.push_back(j);
            const double dev = std::abs(r1.phi[static_cast<std::size_t>(j)]);
            report.dummy.worst = std::max(report.dummy.worst, dev);
        }
    }
    report.dummy.pass = report.dummy.worst <= tol;
    report.dummy.detail =
        std::to_string(report.dummy_players.size()) + " dummy player(s) detected";

    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const std::uint32_t bi = 1u << i;
            const std::uint32_t bj = 1u << j;
            bool symmetric = true;
            for (std::uint32_t mask = 0; mask < n && symmetric; ++mask) {
                if (mask & (bi | bj)) continue;
                if (std::abs(v1.value_at(mask | bi) - v1.value_at(mask | bj)) >
                    kStructureTol)
                    symmetric = false;
            }
            if (symmetric) {
                report.symmetric_pairs.emplace_back(i, j);
                const double dev = std::abs(r1.phi[static_cast<std::size_t>(i)] -
                                            r1.phi[static_cast<std::size_t>(j)]);
                report.symmetry.worst = std::max(report.symmetry.worst, dev);
            }
        }
    }
    report.symmetry.pass = report.symmetry.worst <= tol;
    report.symmetry.detail =
        std::to_string(report.symmetric_pairs.size()) + " symmetric pair(s) detected";

    {
        const AttributionResult rsum = shapley_exact(v1 + v2);
        double worst = 0.0;
        for (int j = 0; j < m; ++j)
            worst = std::max(worst,
                             std::abs(rsum.phi[static_cast<std::size_t>(j)] -
                                      r1.phi[static_cast<std::size_t>(j)] -
                                      r2.phi[static_cast<std::size_t>(j)]));
        report.additivity.worst = worst;
        report.additivity.pass = worst <= tol;
        report.additivity.detail = "phi(v1+v2) vs phi(v1) + phi(v2)";
    }

    return report;
}

}  // namespace shapcause
