#include "shapcause/value_function.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "shapcause/errors.hpp"
#include "shapcause/rng.hpp"

namespace shapcause {

Backend backend_from_name(std::string_view name) {
    if (name == "marginal_empirical") return Backend::marginal_empirical;
    if (name == "marginal_gaussian") return Backend::marginal_gaussian;
    if (name == "conditional_gaussian_closed") return Backend::conditional_gaussian_closed;
    if (name == "conditional_gaussian_mc") return Backend::conditional_gaussian_mc;
    if (name == "conditional_empirical") return Backend::conditional_empirical;
    throw std::invalid_argument("unknown backend: " + std::string(name));
}

std::string_view backend_name(Backend backend) {
    switch (backend) {
        case Backend::marginal_empirical: return "marginal_empirical";
        case Backend::marginal_gaussian: return "marginal_gaussian";
        case Backend::conditional_gaussian_closed: return "conditional_gaussian_closed";
        case Backend::conditional_gaussian_mc: return "conditional_gaussian_mc";
        case Backend::conditional_empirical: return "conditional_empirical";
    }
    return "unknown";
}

ExplicandValueFunction::ExplicandValueFunction(ModelFunction model,
                                               std::vector<double> explicand,
                                               int source_dim)
    : model_(std::move(model)), explicand_(std::move(explicand)) {
    const int m = static_cast<int>(explicand_.size());
    if (m < 1) throw std::invalid_argument("value function: empty explicand");
    if (m != model_.dim())
        throw std::invalid_argument("value function: explicand has " +
                                    std::to_string(m) + " features, model expects " +
                                    std::to_string(model_.dim()));
    if (m != source_dim)
        throw std::invalid_argument("value function: explicand has " +
                                    std::to_string(m) + " features, source has " +
                                    std::to_string(source_dim));
    for (double x : explicand_)
        if (!std::isfinite(x))
            throw std::invalid_argument("value function: non-finite explicand");
}

std::vector<double> ExplicandValueFunction::explicand_at(const Coalition& s) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(s.size()));
    for (int j : s.indices()) out.push_back(explicand_[static_cast<std::size_t>(j)]);
    return out;
}

double ExplicandValueFunction::model_at_explicand() const {
    return model_.evaluate(explicand_);
}

const LinearModel& ExplicandValueFunction::require_linear(const char* backend) const {
    const LinearModel* lm = model_.linear();
    if (lm == nullptr)
        throw UnsupportedBackendError(std::string(backend) +
                                      " requires a linear model, got " +
                                      model_kind_name(model_.kind()));
    return *lm;
}

// ---------------------------------------------------------------------------
// marginal_empirical

MarginalEmpiricalValue::MarginalEmpiricalValue(ModelFunction model,
                                               std::vector<double> explicand,
                                               TabularDataset data)
    : ExplicandValueFunction(std::move(model), std::move(explicand),
                             data.feature_count()),
      data_(std::move(data)) {}

McValue MarginalEmpiricalValue::evaluate(const Coalition& s) const {
    if (s.dim() != dim())
        throw std::invalid_argument("marginal_empirical: coalition dimension mismatch");
    return cache_.get_or_compute(s.bits(), [&]() -> McValue {
        if (s.is_full()) return {model_at_explicand(), 0.0};
        const RowMatrix spliced = replace_columns(data_, s, explicand_at(s));
        const par::MeanVar stats = batch_stats(model_, spliced);
        return {stats.mean, stats.std_error()};
    });
}

// ---------------------------------------------------------------------------
// marginal_gaussian

MarginalGaussianValue::MarginalGaussianValue(ModelFunction model,
                                             std::vector<double> explicand,
                                             GaussianDistribution source)
    : ExplicandValueFunction(std::move(model), std::move(explicand), source.dim()),
      source_(std::move(source)) {
    require_linear("marginal_gaussian");
}

double MarginalGaussianValue::evaluate(const Coalition& s) const {
    if (s.dim() != dim())
        throw std::invalid_argument("marginal_gaussian: coalition dimension mismatch");
    const LinearModel& lm = *model_.linear();
    double v = lm.beta0;
    for (int j = 0; j < dim(); ++j) {
        const auto ju = static_cast<std::size_t>(j);
        v += lm.beta[ju] * (s.contains(j) ? explicand_[ju] : source_.mean()(j));
    }
    return v;
}

// ---------------------------------------------------------------------------
// conditional_gaussian_closed

ConditionalGaussianClosedValue::ConditionalGaussianClosedValue(
    ModelFunction model, std::vector<double> explicand, GaussianDistribution source)
    : ExplicandValueFunction(std::move(model), std::move(explicand), source.dim()),
      source_(std::move(source)) {
    require_linear("conditional_gaussian_closed");
}

double ConditionalGaussianClosedValue::evaluate(const Coalition& s) const {
    if (s.dim() != dim())
        throw std::invalid_argument(
            "conditional_gaussian_closed: coalition dimension mismatch");
    return cache_.get_or_compute(s.bits(), [&]() -> double {
        const LinearModel& lm = *model_.linear();
        if (s.is_full()) return model_at_explicand();
        if (s.is_empty()) {
            double v = lm.beta0;
            for (int j = 0; j < dim(); ++j)
                v += lm.beta[static_cast<std::size_t>(j)] * source_.mean()(j);
            return v;
        }
        const GaussianDistribution cond =
            gaussian_conditional(source_, s, explicand_at(s));
        double v = lm.beta0;
        for (int j : s.indices())
            v += lm.beta[static_cast<std::size_t>(j)] *
                 explicand_[static_cast<std::size_t>(j)];
        const std::vector<int> out = s.complement().indices();
        for (std::size_t a = 0; a < out.size(); ++a)
            v += lm.beta[static_cast<std::size_t>(out[a])] *
                 cond.mean()(static_cast<Eigen::Index>(a));
        return v;
    });
}

// ---------------------------------------------------------------------------
// conditional_gaussian_mc

ConditionalGaussianMcValue::ConditionalGaussianMcValue(ModelFunction model,
                                                       std::vector<double> explicand,
                                                       GaussianDistribution source,
                                                       int mc_samples,
                                                       std::uint64_t seed)
    : ExplicandValueFunction(std::move(model), std::move(explicand), source.dim()),
      source_(std::move(source)),
      mc_samples_(mc_samples),
      seed_(seed) {
    if (mc_samples_ < 100)
        throw std::invalid_argument(
            "conditional_gaussian_mc: needs at least 100 samples, got " +
            std::to_string(mc_samples_));
}

McValue ConditionalGaussianMcValue::evaluate(const Coalition& s) const {
    if (s.dim() != dim())
        throw std::invalid_argument("conditional_gaussian_mc: coalition dimension mismatch");
    return cache_.get_or_compute(s.bits(), [&]() -> McValue {
        if (s.is_full()) return {model_at_explicand(), 0.0};
        const std::uint64_t sub_seed = mix_seed(seed_, s.bits());
        const std::size_t n = static_cast<std::size_t>(mc_samples_);
        RowMatrix spliced;
        if (s.is_empty()) {
            spliced = gaussian_sample(source_, n, sub_seed);
        } else {
            const GaussianDistribution cond =
                gaussian_conditional(source_, s, explicand_at(s));
            const RowMatrix draws = gaussian_sample(cond, n, sub_seed);
            spliced.resize(static_cast<Eigen::Index>(n), dim());
            const std::vector<int> in = s.indices();
            const std::vector<int> out = s.complement().indices();
            for (std::size_t a = 0; a < in.size(); ++a)
                spliced.col(in[a]).setConstant(
                    explicand_[static_cast<std::size_t>(in[a])]);
            for (std::size_t a = 0; a < out.size(); ++a)
                spliced.col(out[a]) = draws.col(static_cast<Eigen::Index>(a));
        }
        const par::MeanVar stats = batch_stats(model_, spliced);
        return {stats.mean, stats.std_error()};
    });
}

// ---------------------------------------------------------------------------
// conditional_empirical

ConditionalEmpiricalValue::ConditionalEmpiricalValue(ModelFunction model,
                                                     std::vector<double> explicand,
                                                     TabularDataset data,
                                                     double tol_continuous,
                                                     bool use_raw_matched)
    : ExplicandValueFunction(std::move(model), std::move(explicand),
                             data.feature_count()),
      data_(std::move(data)),
      tol_continuous_(tol_continuous),
      use_raw_matched_(use_raw_matched) {
    if (tol_continuous_ < 0.0)
        throw std::invalid_argument("conditional_empirical: negative tolerance");
}

MatchedValue ConditionalEmpiricalValue::evaluate(const Coalition& s) const {
    if (s.dim() != dim())
        throw std::invalid_argument("conditional_empirical: coalition dimension mismatch");
    return cache_.get_or_compute(s.bits(), [&]() -> MatchedValue {
        const auto n_rows = static_cast<std::size_t>(data_.row_count());
        if (s.is_empty()) {
            const par::MeanVar stats = batch_stats(model_, data_.rows());
            return {stats.mean, n_rows, stats.std_error()};
        }
        const std::vector<double> x_s = explicand_at(s);
        const std::vector<Eigen::Index> matched =
            restrict_rows(data_, s, x_s, tol_continuous_);
        if (s.is_full()) {
            // No averaging remains; the value is the prediction itself and the
            // match count is reported for diagnostics only.
            return {model_at_explicand(), matched.size(), 0.0};
        }
        if (matched.empty())
            throw ConditioningInfeasibleError(
                "conditional_empirical: no rows match coalition " + s.to_string() +
                " at tolerance " + std::to_string(tol_continuous_) + " sample SDs");

        RowMatrix rows(static_cast<Eigen::Index>(matched.size()),
                       data_.feature_count());
        for (std::size_t i = 0; i < matched.size(); ++i)
            rows.row(static_cast<Eigen::Index>(i)) = data_.rows().row(matched[i]);
        if (!use_raw_matched_) {
            // Pin the coalition columns so v(full) = f(x*) survives tolerance
            // matching.
            const std::vector<int> in = s.indices();
            for (std::size_t a = 0; a < in.size(); ++a)
                rows.col(in[a]).setConstant(x_s[a]);
        }
        const par::MeanVar stats = batch_stats(model_, rows);
        return {stats.mean, matched.size(), stats.std_error()};
    });
}

// ---------------------------------------------------------------------------

std::unique_ptr<ValueFunction> make_value_function(ValueFunctionSpec spec) {
    const bool needs_data = spec.backend == Backend::marginal_empirical ||
                            spec.backend == Backend::conditional_empirical;
    if (needs_data && !spec.data.has_value())
        throw std::invalid_argument(std::string(backend_name(spec.backend)) +
                                    " requires a tabular dataset source");
    if (!needs_data && !spec.gaussian.has_value())
        throw std::invalid_argument(std::string(backend_name(spec.backend)) +
                                    " requires a Gaussian source");

    switch (spec.backend) {
        case Backend::marginal_empirical:
            return std::make_unique<MarginalEmpiricalValue>(
                std::move(spec.model), std::move(spec.explicand), std::move(*spec.data));
        case Backend::marginal_gaussian:
            return std::make_unique<MarginalGaussianValue>(std::move(spec.model),
                                                           std::move(spec.explicand),
                                                           std::move(*spec.gaussian));
        case Backend::conditional_gaussian_closed:
            return std::make_unique<ConditionalGaussianClosedValue>(
                std::move(spec.model), std::move(spec.explicand),
                std::move(*spec.gaussian));
        case Backend::conditional_gaussian_mc:
            return std::make_unique<ConditionalGaussianMcValue>(
                std::move(spec.model), std::move(spec.explicand),
                std::move(*spec.gaussian), spec.mc_samples, spec.seed);
        case Backend::conditional_empirical:
            return std::make_unique<ConditionalEmpiricalValue>(
                std::move(spec.model), std::move(spec.explicand), std::move(*spec.data),
                spec.tol_continuous, spec.use_raw_matched);
    }
    throw std::invalid_argument("unknown backend");
}

}  // namespace shapcause
