#include "shapcause/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace shapcause {

namespace {

void validate_coeffs(double beta0, const std::vector<double>& beta,
                     const char* what) {
    if (beta.empty())
        throw std::invalid_argument(std::string(what) + ": needs at least one feature");
    if (!std::isfinite(beta0))
        throw std::invalid_argument(std::string(what) + ": non-finite intercept");
    for (double b : beta)
        if (!std::isfinite(b))
            throw std::invalid_argument(std::string(what) + ": non-finite coefficient");
}

struct Evaluator {
    std::span<const double> x;

    double operator()(const LinearModel& m) const {
        double y = m.beta0;
        for (std::size_t j = 0; j < m.beta.size(); ++j) y += m.beta[j] * x[j];
        return y;
    }

    double operator()(const InteractionModel& m) const {
        double y = m.beta0;
        for (std::size_t j = 0; j < m.beta.size(); ++j) y += m.beta[j] * x[j];
        for (const auto& t : m.gamma)
            y += t.weight * x[static_cast<std::size_t>(t.i)] *
                 x[static_cast<std::size_t>(t.j)];
        return y;
    }

    double operator()(const LookupModel& m) const {
        double best = std::numeric_limits<double>::infinity();
        Eigen::Index best_row = 0;
        for (Eigen::Index r = 0; r < m.points.rows(); ++r) {
            double d2 = 0.0;
            for (Eigen::Index c = 0; c < m.points.cols(); ++c) {
                const double d = x[static_cast<std::size_t>(c)] - m.points(r, c);
                d2 += d * d;
            }
            if (d2 < best) {
                best = d2;
                best_row = r;
            }
        }
        return m.values[static_cast<std::size_t>(best_row)];
    }
};

}  // namespace

ModelFunction::ModelFunction(LinearModel m) : impl_(std::move(m)) {
    const auto& lm = std::get<LinearModel>(impl_);
    validate_coeffs(lm.beta0, lm.beta, "LinearModel");
}

ModelFunction::ModelFunction(InteractionModel m) : impl_(std::move(m)) {
    const auto& im = std::get<InteractionModel>(impl_);
    validate_coeffs(im.beta0, im.beta, "InteractionModel");
    for (const auto& t : im.gamma) {
        if (t.i < 0 || t.i >= im.dim() || t.j < 0 || t.j >= im.dim())
            throw std::invalid_argument("InteractionModel: term index out of range");
        if (!std::isfinite(t.weight))
            throw std::invalid_argument("InteractionModel: non-finite term weight");
    }
}

ModelFunction::ModelFunction(LookupModel m) : impl_(std::move(m)) {
    const auto& lm = std::get<LookupModel>(impl_);
    if (lm.points.rows() == 0 || lm.points.cols() == 0)
        throw std::invalid_argument("LookupModel: empty table");
    if (lm.values.size() != static_cast<std::size_t>(lm.points.rows()))
        throw std::invalid_argument("LookupModel: one value per table row required");
    if (!lm.points.allFinite())
        throw std::invalid_argument("LookupModel: non-finite table point");
    for (double v : lm.values)
        if (!std::isfinite(v))
            throw std::invalid_argument("LookupModel: non-finite table value");
}

ModelKind ModelFunction::kind() const {
    if (std::holds_alternative<LinearModel>(impl_)) return ModelKind::linear;
    if (std::holds_alternative<InteractionModel>(impl_)) return ModelKind::interaction;
    return ModelKind::lookup;
}

int ModelFunction::dim() const {
    return std::visit([](const auto& m) { return m.dim(); }, impl_);
}

double ModelFunction::evaluate(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim())
        throw std::invalid_argument("ModelFunction: input has length " +
                                    std::to_string(x.size()) + ", model expects " +
                                    std::to_string(dim()));
    for (double xi : x)
        if (!std::isfinite(xi))
            throw std::invalid_argument("ModelFunction: non-finite input");
    return std::visit(Evaluator{x}, impl_);
}

const char* model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::linear: return "linear";
        case ModelKind::interaction: return "interaction";
        case ModelKind::lookup: return "lookup";
    }
    return "unknown";
}

double batch_mean(const ModelFunction& model, const RowMatrix& rows) {
    if (rows.rows() == 0) throw std::invalid_argument("batch_mean: empty sample matrix");
    return par::blocked_mean(static_cast<std::size_t>(rows.rows()), [&](std::size_t i) {
        return model.evaluate(row_span(rows, static_cast<Eigen::Index>(i)));
    });
}

par::MeanVar batch_stats(const ModelFunction& model, const RowMatrix& rows) {
    if (rows.rows() == 0) throw std::invalid_argument("batch_stats: empty sample matrix");
    return par::blocked_mean_var(static_cast<std::size_t>(rows.rows()), [&](std::size_t i) {
        return model.evaluate(row_span(rows, static_cast<Eigen::Index>(i)));
    });
}

}  // namespace shapcause
