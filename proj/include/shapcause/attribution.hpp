#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace shapcause {

enum class Method { exact, permutation_sampling };

inline const char* method_name(Method m) {
    return m == Method::exact ? "exact" : "permutation_sampling";
}

/// Attribution of a prediction to features: reference value phi0 = v(empty)
/// plus one phi per feature. efficiency_residual = v(full) - v(empty) - sum(phi);
/// it is ~0 for exact computation and diagnostic for sampled estimates.
/// std_errors are present exactly when method == permutation_sampling.
struct AttributionResult {
    double phi0 = 0.0;
    std::vector<double> phi;
    double efficiency_residual = 0.0;
    std::optional<std::vector<double>> std_errors;
    Method method = Method::exact;
    std::optional<std::uint64_t> seed;

    int dim() const { return static_cast<int>(phi.size()); }

    double phi_total() const {
        double s = 0.0;
        for (double p : phi) s += p;
        return s;
    }
};

}  // namespace shapcause
