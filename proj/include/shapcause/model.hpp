#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shapcause/matrix.hpp"
#include "shapcause/parallel.hpp"

namespace shapcause {

/// f(x) = beta0 + beta . x
struct LinearModel {
    double beta0 = 0.0;
    std::vector<double> beta;

    int dim() const { return static_cast<int>(beta.size()); }
};

struct InteractionTerm {
    int i = 0;
    int j = 0;
    double weight = 0.0;
};

/// f(x) = beta0 + beta . x + sum_k weight_k * x_i(k) * x_j(k)
struct InteractionModel {
    double beta0 = 0.0;
    std::vector<double> beta;
    std::vector<InteractionTerm> gamma;

    int dim() const { return static_cast<int>(beta.size()); }
};

/// Nearest-neighbor lookup over a fixed table: f(x) = y of the closest point
/// (squared Euclidean distance, first match on ties). Piecewise constant, so
/// it extrapolates poorly off the table's support.
struct LookupModel {
    RowMatrix points;       // one row per table entry
    std::vector<double> values;

    int dim() const { return static_cast<int>(points.cols()); }
};

enum class ModelKind { linear, interaction, lookup };

/// A deterministic prediction function over m features. Immutable after
/// construction; safe to evaluate concurrently.
class ModelFunction {
public:
    explicit ModelFunction(LinearModel m);
    explicit ModelFunction(InteractionModel m);
    explicit ModelFunction(LookupModel m);

    ModelKind kind() const;
    int dim() const;

    /// Rejects length mismatches and non-finite inputs.
    double evaluate(std::span<const double> x) const;

    /// The wrapped linear model, or nullptr for other kinds. The Gaussian
    /// closed-form backends require this.
    const LinearModel* linear() const { return std::get_if<LinearModel>(&impl_); }
    const InteractionModel* interaction() const {
        return std::get_if<InteractionModel>(&impl_);
    }

private:
    std::variant<LinearModel, InteractionModel, LookupModel> impl_;
};

const char* model_kind_name(ModelKind kind);

/// Mean of the model over the rows of a sample matrix, via the deterministic
/// blocked compensated reduction. Throws on an empty matrix.
double batch_mean(const ModelFunction& model, const RowMatrix& rows);

/// Mean plus sampling spread of the model over the rows.
par::MeanVar batch_stats(const ModelFunction& model, const RowMatrix& rows);

}  // namespace shapcause
