#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "shapcause/dataset.hpp"
#include "shapcause/game.hpp"
#include "shapcause/gaussian.hpp"
#include "shapcause/model.hpp"

namespace shapcause {

// The five ways of averaging the model over out-of-coalition features.
// Marginal backends splice the explicand into draws from the unconditional
// distribution; conditional backends average over the distribution of the
// out-of-coalition features given the in-coalition values. Each name below
// is stable CLI vocabulary.
enum class Backend {
    marginal_empirical,
    marginal_gaussian,
    conditional_gaussian_closed,
    conditional_gaussian_mc,
    conditional_empirical,
};

Backend backend_from_name(std::string_view name);
std::string_view backend_name(Backend backend);

struct McValue {
    double value = 0.0;
    double std_error = 0.0;
};

struct MatchedValue {
    double value = 0.0;
    std::size_t match_count = 0;
    double std_error = 0.0;
};

namespace detail {

// Per-coalition memo: shared reads, exclusive insertion. Values are
// deterministic per coalition, so a racing recompute stores the same number.
template <class V>
class CoalitionCache {
public:
    template <class F>
    V get_or_compute(std::uint32_t key, F&& compute) const {
        {
            std::shared_lock lock(mutex_);
            auto it = map_.find(key);
            if (it != map_.end()) return it->second;
        }
        V v = compute();
        std::unique_lock lock(mutex_);
        return map_.emplace(key, v).first->second;
    }

private:
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<std::uint32_t, V> map_;
};

}  // namespace detail

/// Base for model/explicand-bound backends. One instance is one computation
/// context: model, explicand, data source and memo table. All backends keep
/// the two boundary identities v(full) = f(x*) exactly and v(empty)
/// independent of the explicand.
class ExplicandValueFunction : public ValueFunction {
public:
    ExplicandValueFunction(ModelFunction model, std::vector<double> explicand,
                           int source_dim);

    int dim() const override { return static_cast<int>(explicand_.size()); }
    const ModelFunction& model() const { return model_; }
    const std::vector<double>& explicand() const { return explicand_; }

protected:
    /// Explicand values at the coalition's indices, ascending.
    std::vector<double> explicand_at(const Coalition& s) const;
    double model_at_explicand() const;
    /// Requires the model to be linear; throws UnsupportedBackendError.
    const LinearModel& require_linear(const char* backend) const;

    ModelFunction model_;
    std::vector<double> explicand_;
};

/// v(S) = mean over the sample of f with the coalition columns pinned to the
/// explicand. The reported std_error is the Monte Carlo error of that mean
/// (0 for the full coalition).
class MarginalEmpiricalValue final : public ExplicandValueFunction {
public:
    MarginalEmpiricalValue(ModelFunction model, std::vector<double> explicand,
                           TabularDataset data);

    McValue evaluate(const Coalition& s) const;
    double value(const Coalition& s) const override { return evaluate(s).value; }
    const TabularDataset& data() const { return data_; }

private:
    TabularDataset data_;
    detail::CoalitionCache<McValue> cache_;
};

/// Closed form of the marginal average for a linear model over a Gaussian
/// source: beta0 + sum_in beta_j x*_j + sum_out beta_j mu_j. Ignores
/// correlations by construction.
class MarginalGaussianValue final : public ExplicandValueFunction {
public:
    MarginalGaussianValue(ModelFunction model, std::vector<double> explicand,
                          GaussianDistribution source);

    double evaluate(const Coalition& s) const;
    double value(const Coalition& s) const override { return evaluate(s); }
    const GaussianDistribution& source() const { return source_; }

private:
    GaussianDistribution source_;
};

/// Closed form of the conditional average for a linear model over a Gaussian
/// source: the out-of-coalition features contribute through their
/// conditional mean given X_S = x*_S.
class ConditionalGaussianClosedValue final : public ExplicandValueFunction {
public:
    ConditionalGaussianClosedValue(ModelFunction model, std::vector<double> explicand,
                                   GaussianDistribution source);

    double evaluate(const Coalition& s) const;
    double value(const Coalition& s) const override { return evaluate(s); }
    const GaussianDistribution& source() const { return source_; }

private:
    GaussianDistribution source_;
    detail::CoalitionCache<double> cache_;
};

/// Monte Carlo conditional average for arbitrary models: draws the
/// out-of-coalition features from the conditional Gaussian, splices in the
/// explicand and averages the model. Coalition S uses the sub-stream
/// mix_seed(seed, S's bitmask), so every v(S) is deterministic in isolation.
class ConditionalGaussianMcValue final : public ExplicandValueFunction {
public:
    ConditionalGaussianMcValue(ModelFunction model, std::vector<double> explicand,
                               GaussianDistribution source, int mc_samples,
                               std::uint64_t seed);

    McValue evaluate(const Coalition& s) const;
    double value(const Coalition& s) const override { return evaluate(s).value; }

private:
    GaussianDistribution source_;
    int mc_samples_;
    std::uint64_t seed_;
    detail::CoalitionCache<McValue> cache_;
};

/// Empirical conditional average: restrict to rows matching x*_S (exactly on
/// discrete columns, within tol_continuous sample SDs on continuous ones),
/// pin the coalition columns to the explicand, and average the model over
/// the matched rows. Zero matches throw ConditioningInfeasibleError.
/// With use_raw_matched the matched rows are averaged as-is, which trades
/// the exact v(full) = f(x*) identity for unmodified data.
class ConditionalEmpiricalValue final : public ExplicandValueFunction {
public:
    ConditionalEmpiricalValue(ModelFunction model, std::vector<double> explicand,
                              TabularDataset data, double tol_continuous,
                              bool use_raw_matched = false);

    MatchedValue evaluate(const Coalition& s) const;
    double value(const Coalition& s) const override { return evaluate(s).value; }
    const TabularDataset& data() const { return data_; }

private:
    TabularDataset data_;
    double tol_continuous_;
    bool use_raw_matched_;
    detail::CoalitionCache<MatchedValue> cache_;
};

/// Everything needed to build one backend instance. `data` backs the
/// empirical backends, `gaussian` the Gaussian ones.
struct ValueFunctionSpec {
    Backend backend = Backend::marginal_empirical;
    ModelFunction model;
    std::vector<double> explicand;
    std::optional<TabularDataset> data;
    std::optional<GaussianDistribution> gaussian;
    int mc_samples = 10000;
    std::uint64_t seed = 0;
    double tol_continuous = 0.1;  // in per-column sample SDs
    bool use_raw_matched = false;
};

std::unique_ptr<ValueFunction> make_value_function(ValueFunctionSpec spec);

}  // namespace shapcause
