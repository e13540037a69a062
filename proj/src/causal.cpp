#include "shapcause/causal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "shapcause/errors.hpp"
#include "shapcause/parallel.hpp"
#include "shapcause/rng.hpp"

namespace shapcause {

CausalDag::CausalDag(int node_count, std::vector<std::pair<int, int>> edges)
    : m_(node_count), edges_(std::move(edges)) {
    if (m_ < 1 || m_ > kMaxFeatures)
        throw std::invalid_argument("CausalDag: node count out of range");
    for (auto [p, c] : edges_) {
        if (p < 0 || p >= m_ || c < 0 || c >= m_)
            throw std::invalid_argument("CausalDag: edge index out of range");
        if (p == c) throw std::invalid_argument("CausalDag: self-loop on node " +
                                                std::to_string(p));
    }
    // Kahn's algorithm; leftover nodes mean a cycle.
    std::vector<int> indegree(static_cast<std::size_t>(m_), 0);
    for (auto [p, c] : edges_) ++indegree[static_cast<std::size_t>(c)];
    std::vector<int> ready;
    for (int j = 0; j < m_; ++j)
        if (indegree[static_cast<std::size_t>(j)] == 0) ready.push_back(j);
    topo_.reserve(static_cast<std::size_t>(m_));
    while (!ready.empty()) {
        // Smallest-index first keeps the order deterministic.
        const auto it = std::min_element(ready.begin(), ready.end());
        const int j = *it;
        ready.erase(it);
        topo_.push_back(j);
        for (auto [p, c] : edges_)
            if (p == j && --indegree[static_cast<std::size_t>(c)] == 0)
                ready.push_back(c);
    }
    if (static_cast<int>(topo_.size()) != m_)
        throw std::invalid_argument("CausalDag: graph has a cycle");
}

std::vector<int> CausalDag::parents(int node) const {
    std::vector<int> out;
    for (auto [p, c] : edges_)
        if (c == node) out.push_back(p);
    std::sort(out.begin(), out.end());
    return out;
}

bool CausalDag::has_edge(int parent, int child) const {
    return std::find(edges_.begin(), edges_.end(), std::make_pair(parent, child)) !=
           edges_.end();
}

CausalDag CausalDag::chain(int node_count) {
    std::vector<std::pair<int, int>> edges;
    for (int j = 0; j + 1 < node_count; ++j) edges.emplace_back(j, j + 1);
    return CausalDag(node_count, std::move(edges));
}

std::vector<std::vector<int>> consistent_orderings(const CausalDag& dag,
                                                   int max_nodes) {
    const int m = dag.node_count();
    if (m > max_nodes)
        throw CapacityError("consistent_orderings: " + std::to_string(m) +
                            " nodes would enumerate " + std::to_string(m) +
                            "! permutations; cap is " + std::to_string(max_nodes));
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> position(static_cast<std::size_t>(m));
    std::vector<std::vector<int>> out;
    do {
        for (int k = 0; k < m; ++k)
            position[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])] = k;
        bool ok = true;
        for (auto [p, c] : dag.edges()) {
            if (position[static_cast<std::size_t>(p)] >
                position[static_cast<std::size_t>(c)]) {
                ok = false;
                break;
            }
        }
        if (ok) out.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

AttributionResult ordering_restricted_shapley(const ValueFunction& v,
                                              const CausalDag& dag, int max_nodes) {
    const int m = v.dim();
    if (m != dag.node_count())
        throw std::invalid_argument(
            "ordering_restricted_shapley: value function and DAG disagree on the "
            "feature count");
    const auto orderings = consistent_orderings(dag, max_nodes);

    auto payoff = [&](const Coalition& s) {
        const double x = v.value(s);
        if (!std::isfinite(x))
            throw EvaluationError(
                "value function returned non-finite payoff for coalition " +
                s.to_string());
        return x;
    };

    std::vector<par::KahanSum> acc(static_cast<std::size_t>(m));
    for (const auto& order : orderings) {
        Coalition s = Coalition::empty(m);
        double prev = payoff(s);
        for (int j : order) {
            s = s.with(j);
            const double cur = payoff(s);
            acc[static_cast<std::size_t>(j)].add(cur - prev);
            prev = cur;
        }
    }

    AttributionResult result;
    result.method = Method::exact;
    result.phi.resize(static_cast<std::size_t>(m));
    const double count = static_cast<double>(orderings.size());
    for (int j = 0; j < m; ++j)
        result.phi[static_cast<std::size_t>(j)] =
            acc[static_cast<std::size_t>(j)].sum / count;
    result.phi0 = payoff(Coalition::empty(m));
    par::KahanSum total;
    for (double p : result.phi) total.add(p);
    result.efficiency_residual =
        payoff(Coalition::full(m)) - result.phi0 - total.sum;
    return result;
}

AttributionResult symmetric_causal_average(const AttributionResult& right,
                                           const AttributionResult& left) {
    if (right.dim() != left.dim())
        throw std::invalid_argument("symmetric_causal_average: dimension mismatch");
    if (right.phi0 != left.phi0)
        throw std::invalid_argument(
            "symmetric_causal_average: attributions have different reference values");
    AttributionResult out;
    out.method = Method::exact;
    out.phi0 = right.phi0;
    out.phi.resize(right.phi.size());
    for (std::size_t j = 0; j < out.phi.size(); ++j)
        out.phi[j] = 0.5 * (right.phi[j] + left.phi[j]);
    out.efficiency_residual =
        0.5 * (right.efficiency_residual + left.efficiency_residual);
    return out;
}

// ---------------------------------------------------------------------------
// SCM

Scm::Scm(CausalDag dag, std::vector<std::vector<ParentCoefficient>> coefficients,
         std::vector<double> noise_sd, std::vector<double> node_means)
    : dag_(std::move(dag)),
      coefficients_(std::move(coefficients)),
      noise_sd_(std::move(noise_sd)),
      node_means_(std::move(node_means)) {
    const auto m = static_cast<std::size_t>(dag_.node_count());
    if (coefficients_.size() != m || noise_sd_.size() != m || node_means_.size() != m)
        throw std::invalid_argument("Scm: per-node parameter lists must have one "
                                    "entry per node");
    for (std::size_t j = 0; j < m; ++j) {
        if (!(noise_sd_[j] > 0.0) || !std::isfinite(noise_sd_[j]))
            throw std::invalid_argument(
                "Scm: noise SD of node " + std::to_string(j) +
                " must be positive (a degenerate joint is out of domain)");
        if (!std::isfinite(node_means_[j]))
            throw std::invalid_argument("Scm: non-finite node mean");
        std::vector<int> declared;
        for (const auto& pc : coefficients_[j]) {
            if (!std::isfinite(pc.weight))
                throw std::invalid_argument("Scm: non-finite coefficient");
            if (!dag_.has_edge(pc.parent, static_cast<int>(j)))
                throw std::invalid_argument("Scm: coefficient for node " +
                                            std::to_string(j) + " refers to " +
                                            std::to_string(pc.parent) +
                                            ", which is not a parent in the DAG");
            declared.push_back(pc.parent);
        }
        std::sort(declared.begin(), declared.end());
        if (std::adjacent_find(declared.begin(), declared.end()) != declared.end())
            throw std::invalid_argument("Scm: duplicate coefficient for one parent");
        if (declared != dag_.parents(static_cast<int>(j)))
            throw std::invalid_argument("Scm: node " + std::to_string(j) +
                                        " must declare exactly one coefficient per "
                                        "DAG parent");
    }
}

GaussianDistribution Scm::observational_distribution() const {
    const int m = dag_.node_count();
    // X = b + W X + D eps  =>  mean = (I-W)^{-1} b,
    // cov = (I-W)^{-1} D^2 (I-W)^{-T}.
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd b(m);
    Eigen::VectorXd d(m);
    for (int j = 0; j < m; ++j) {
        b(j) = node_means_[static_cast<std::size_t>(j)];
        d(j) = noise_sd_[static_cast<std::size_t>(j)];
        for (const auto& pc : coefficients_[static_cast<std::size_t>(j)])
            w(j, pc.parent) = pc.weight;
    }
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m) - w;
    // A is a permuted unit-triangular matrix, hence always invertible.
    const Eigen::MatrixXd a_inv = a.partialPivLu().inverse();
    Eigen::VectorXd mean = a_inv * b;
    Eigen::MatrixXd cov = a_inv * d.array().square().matrix().asDiagonal() *
                          a_inv.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
    return GaussianDistribution(std::move(mean), std::move(cov));
}

Scm Scm::standardized_chain(double rho) {
    if (!(std::abs(rho) < 1.0))
        throw std::invalid_argument("standardized_chain: |rho| must be < 1");
    CausalDag dag(2, {{0, 1}});
    std::vector<std::vector<ParentCoefficient>> coef(2);
    coef[1].push_back({0, rho});
    return Scm(std::move(dag), std::move(coef), {1.0, std::sqrt(1.0 - rho * rho)},
               {0.0, 0.0});
}

RowMatrix scm_sample(const Scm& scm, std::size_t n, std::uint64_t seed,
                     const std::optional<Intervention>& intervention) {
    if (n < 1) throw std::invalid_argument("scm_sample: n must be >= 1");
    const int m = scm.feature_count();
    std::vector<char> pinned(static_cast<std::size_t>(m), 0);
    std::vector<double> pinned_value(static_cast<std::size_t>(m), 0.0);
    if (intervention.has_value()) {
        if (intervention->targets.dim() != m)
            throw std::invalid_argument("scm_sample: intervention dimension mismatch");
        const std::vector<int> idx = intervention->targets.indices();
        if (intervention->values.size() != idx.size())
            throw std::invalid_argument("scm_sample: one value per intervened node "
                                        "required");
        for (std::size_t a = 0; a < idx.size(); ++a) {
            if (!std::isfinite(intervention->values[a]))
                throw std::invalid_argument("scm_sample: non-finite intervention value");
            pinned[static_cast<std::size_t>(idx[a])] = 1;
            pinned_value[static_cast<std::size_t>(idx[a])] = intervention->values[a];
        }
    }

    const std::vector<int>& topo = scm.dag().topological_order();
    RowMatrix out(static_cast<Eigen::Index>(n), m);
    par::parallel_for(n, [&](std::size_t i) {
        Rng rng(mix_seed(seed, i));
        auto row = out.row(static_cast<Eigen::Index>(i));
        // Noise drawn for every node in index order so the exogenous draw is
        // shared between the observational and any intervened run.
        double eps[kMaxFeatures];
        for (int j = 0; j < m; ++j) eps[j] = rng.normal();
        for (int j : topo) {
            const auto ju = static_cast<std::size_t>(j);
            if (pinned[ju]) {
                row(j) = pinned_value[ju];
                continue;
            }
            double x = scm.node_means()[ju] + scm.noise_sd()[ju] * eps[j];
            for (const auto& pc : scm.coefficients()[ju]) x += pc.weight * row(pc.parent);
            row(j) = x;
        }
    });
    return out;
}

DoExpectation do_expectation(const Scm& scm, const ModelFunction& model,
                             const Coalition& s, std::span<const double> x_s,
                             std::size_t n, std::uint64_t seed) {
    const int m = scm.feature_count();
    if (s.dim() != m)
        throw std::invalid_argument("do_expectation: coalition dimension mismatch");
    if (model.dim() != m)
        throw std::invalid_argument("do_expectation: model dimension mismatch");
    const std::vector<int> idx = s.indices();
    if (x_s.size() != idx.size())
        throw std::invalid_argument("do_expectation: x_s length mismatch");

    if (s.is_full()) {
        std::vector<double> x(x_s.begin(), x_s.end());
        return {model.evaluate(x), 0.0};
    }
    // Observational causes; the pinned values exist only at the model input.
    RowMatrix rows = scm_sample(scm, n, seed);
    for (std::size_t a = 0; a < idx.size(); ++a)
        rows.col(idx[a]).setConstant(x_s[a]);
    const par::MeanVar stats = batch_stats(model, rows);
    return {stats.mean, stats.std_error()};
}

}  // namespace shapcause
