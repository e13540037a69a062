#pragma once

#include <cstdint>

#include "shapcause/attribution.hpp"
#include "shapcause/game.hpp"
#include "shapcause/matrix.hpp"
#include "shapcause/model.hpp"

// Plain single-threaded implementations of the parallel kernels. They share
// no reduction code with the OpenMP versions, so tests can cross-check the
// kernels and the benchmark can measure the speedup against an honest serial
// baseline.
namespace shapcause::reference {

/// Sequential Kahan mean over rows.
double batch_mean(const ModelFunction& model, const RowMatrix& rows);

/// Direct double loop over features and subsets; evaluates v per marginal
/// term with no caching.
AttributionResult shapley_exact(const ValueFunction& v);

/// Sequential permutation sampler. Same sub-stream derivation and antithetic
/// pairing as the parallel kernel, naive accumulation.
AttributionResult shapley_permutation_sampling(const ValueFunction& v,
                                               int n_permutations,
                                               std::uint64_t seed);

}  // namespace shapcause::reference
