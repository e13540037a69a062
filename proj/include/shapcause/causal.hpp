#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "shapcause/attribution.hpp"
#include "shapcause/coalition.hpp"
#include "shapcause/game.hpp"
#include "shapcause/gaussian.hpp"
#include "shapcause/matrix.hpp"
#include "shapcause/model.hpp"

namespace shapcause {

/// Directed acyclic graph over feature indices. Construction rejects cycles.
class CausalDag {
public:
    CausalDag(int node_count, std::vector<std::pair<int, int>> edges);

    int node_count() const { return m_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<int>& topological_order() const { return topo_; }
    std::vector<int> parents(int node) const;
    bool has_edge(int parent, int child) const;

    static CausalDag empty(int node_count) { return CausalDag(node_count, {}); }
    /// 0 -> 1 -> ... -> m-1
    static CausalDag chain(int node_count);

private:
    int m_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<int> topo_;
};

// Exhaustive ordering enumeration cap: at most max_nodes! permutations.
inline constexpr int kOrderingCap = 8;

/// All permutations of 0..m-1 that are topological orders of the DAG, in
/// lexicographic order. The empty DAG yields all m! permutations.
std::vector<std::vector<int>> consistent_orderings(const CausalDag& dag,
                                                   int max_nodes = kOrderingCap);

/// Attribution averaging each feature's marginal contribution over only the
/// orderings consistent with the DAG. Over the empty DAG this is the plain
/// Shapley value; over a single-ordering DAG it is that ordering's telescoping
/// contributions.
AttributionResult ordering_restricted_shapley(const ValueFunction& v,
                                              const CausalDag& dag,
                                              int max_nodes = kOrderingCap);

/// Componentwise mean of two ordering-restricted attributions with equal
/// feature count and reference value.
AttributionResult symmetric_causal_average(const AttributionResult& right,
                                           const AttributionResult& left);

/// Linear-Gaussian structural model over features: node j is
/// mean_j + sum_p coefficient_jp * X_p + noise_sd_j * eps_j with independent
/// standard normal eps. Each feature reads exactly one cause, so the
/// observational joint is Gaussian and available in closed form.
class Scm {
public:
    struct ParentCoefficient {
        int parent = 0;
        double weight = 0.0;
    };

    Scm(CausalDag dag, std::vector<std::vector<ParentCoefficient>> coefficients,
        std::vector<double> noise_sd, std::vector<double> node_means);

    int feature_count() const { return dag_.node_count(); }
    const CausalDag& dag() const { return dag_; }
    const std::vector<std::vector<ParentCoefficient>>& coefficients() const {
        return coefficients_;
    }
    const std::vector<double>& noise_sd() const { return noise_sd_; }
    const std::vector<double>& node_means() const { return node_means_; }

    /// Closed-form observational distribution implied by the structural
    /// equations.
    GaussianDistribution observational_distribution() const;

    /// Two standardized features with correlation rho generated as a chain
    /// 0 -> 1 (X1 = rho*X0 + sqrt(1-rho^2)*eps).
    static Scm standardized_chain(double rho);

private:
    CausalDag dag_;
    std::vector<std::vector<ParentCoefficient>> coefficients_;
    std::vector<double> noise_sd_;
    std::vector<double> node_means_;
};

/// A structural intervention: the targeted nodes are pinned to the given
/// values (ascending coalition order) and their own equations are discarded.
struct Intervention {
    Coalition targets;
    std::vector<double> values;
};

/// Ancestral sampling, one row per draw from sub-stream mix_seed(seed, row).
/// Under an intervention the pinned values feed downstream equations while
/// upstream nodes are untouched (incoming arrows cut). Noise draws are made
/// for every node in index order, so a row's exogenous noise is identical
/// with and without an intervention.
RowMatrix scm_sample(const Scm& scm, std::size_t n, std::uint64_t seed,
                     const std::optional<Intervention>& intervention = std::nullopt);

struct DoExpectation {
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo expectation of the model when the coalition's feature inputs
/// are pinned to x_s at the prediction stage: the causes keep their
/// observational joint and only the model sees the pinned values. This is
/// the interventional (marginal) average; it is not scm_sample's structural
/// intervention, which propagates downstream.
DoExpectation do_expectation(const Scm& scm, const ModelFunction& model,
                             const Coalition& s, std::span<const double> x_s,
                             std::size_t n, std::uint64_t seed);

}  // namespace shapcause
