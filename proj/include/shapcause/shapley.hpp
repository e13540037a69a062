#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shapcause/attribution.hpp"
#include "shapcause/game.hpp"

namespace shapcause {

/// Ordering weight |S|! (m-|S|-1)! / m! for a coalition of the given size,
/// computed by the multiplicative recurrence w(s) = w(s-1) * s / (m-s) from
/// w(0) = 1/m. No factorials are ever formed, so there is no overflow and the
/// relative error stays below ~1e-14 up to m = 20.
double shapley_weight(int subset_size, int m);

struct ExactOptions {
    // Hard cap on exact enumeration: 2^cap payoff evaluations.
    int enumeration_cap = 20;
    // Evaluate each coalition once into a table (default). Off recomputes
    // v(S) per marginal term; results are identical either way.
    bool cache_values = true;
};

/// Exact attribution: phi[j] = sum over S not containing j of
/// weight(|S|, m) * (v(S + j) - v(S)), phi0 = v(empty).
/// Per-feature accumulation runs in ascending bitmask order with compensated
/// sums, so the result does not depend on the thread count.
AttributionResult shapley_exact(const ValueFunction& v,
                                const ExactOptions& options = {});

/// Monte Carlo estimate from sampled feature orderings. n_permutations
/// orderings are drawn; each one also contributes its reverse (antithetic
/// pairing), so 2*n_permutations orderings enter the estimate and the
/// reported standard errors are computed over the n_permutations pair
/// averages. Pair i draws from the sub-stream mix_seed(seed, i); results are
/// bit-identical for a fixed (seed, n_permutations) at any thread count.
AttributionResult shapley_permutation_sampling(const ValueFunction& v,
                                               int n_permutations,
                                               std::uint64_t seed);

/// One axiom's verdict: worst observed deviation vs. the tolerance.
struct AxiomCheck {
    bool pass = true;
    double worst = 0.0;
    std::string detail;
};

struct AxiomReport {
    AxiomCheck efficiency;
    AxiomCheck dummy;
    AxiomCheck symmetry;
    AxiomCheck additivity;
    std::vector<int> dummy_players;                 // detected in v1
    std::vector<std::pair<int, int>> symmetric_pairs;  // detected in v1

    bool all_pass() const {
        return efficiency.pass && dummy.pass && symmetry.pass && additivity.pass;
    }
};

/// Checks the four attribution axioms on exact Shapley values of v1 (and
/// v1+v2 for additivity). Dummy players and symmetric pairs are detected by
/// comparing payoffs with tolerance 1e-12 before asserting the consequence
/// at `tol`; absent such structure those two checks pass vacuously.
AxiomReport check_axioms(const TableValueFunction& v1,
                         const TableValueFunction& v2, double tol);

}  // namespace shapcause
