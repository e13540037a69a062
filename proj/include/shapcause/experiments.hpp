#pragma once

#include <cstdint>
#include <iosfwd>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapcause/dataset.hpp"
#include "shapcause/model.hpp"
#include "shapcause/value_function.hpp"

namespace shapcause {

/// Closed-form attribution for the two-feature linear model over a
/// standardized source with correlation rho:
///   phi1 = beta1*x1 + (rho/2) * (beta2*x1 - beta1*x2)
///   phi2 = beta2*x2 + (rho/2) * (beta1*x2 - beta2*x1)
/// with phi0 = beta0. The pair sums to f(x) - beta0 by construction; the
/// function verifies that identity before returning.
struct BivariateClosedForm {
    double phi0 = 0.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
};

BivariateClosedForm correlated_pair_closed_form(double beta0, double beta1,
                                                double beta2, double rho, double x1,
                                                double x2);

/// One comparison in an experiment: an expected and a computed number, their
/// absolute difference, and the tolerance the difference was held to.
struct ExperimentRow {
    std::string label;
    double expected = 0.0;
    double computed = 0.0;
    double abs_diff = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct ExperimentReport {
    std::string name;
    std::string grid;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    std::vector<ExperimentRow> rows;

    bool all_pass() const;
    std::size_t failed_count() const;
};

/// Optional knobs; zero/empty fields fall back to each experiment's default.
struct ExperimentParams {
    std::vector<double> rho_grid;
    std::size_t samples = 0;
};

/// Known names: eq36, dummy-violation, eq44, do-equivalence, rho-zero,
/// marginal-linear, extrapolation. Unknown names throw invalid_argument.
ExperimentReport run_experiment(const std::string& name, const ExperimentParams& params,
                                std::uint64_t seed);

const std::vector<std::string>& experiment_names();

void print_report(const ExperimentReport& report, std::ostream& out);
nlohmann::json report_to_json(const ExperimentReport& report);
std::string report_to_csv(const ExperimentReport& report);

/// Standard error of an exact-enumeration attribution when each coalition
/// value carries an independent Monte Carlo error (se_by_mask indexed by
/// coalition bitmask). With independent=false the bound is the conservative
/// sum of absolute coefficients, for backends whose coalition values share
/// sample rows.
double propagate_attribution_se(int feature, int m,
                                const std::vector<double>& se_by_mask,
                                bool independent);

/// Mean and spread of the per-row attribution of `feature` under the
/// marginal-empirical backend: every coalition value is a mean over the same
/// rows, so the attribution itself is the mean of a per-row quantity and its
/// standard error follows from that quantity's spread.
par::MeanVar per_row_marginal_attribution(const ModelFunction& model,
                                          const TabularDataset& data,
                                          std::span<const double> explicand,
                                          int feature);

/// The marginal evaluation sample for one explicand/coalition: the data with
/// coalition columns pinned, plus extrapolation flags for each row.
struct EvalSampleEmission {
    RowMatrix eval_rows;
    ExtrapolationReport report;
};

EvalSampleEmission emit_eval_samples(const TabularDataset& data,
                                     std::span<const double> explicand,
                                     const Coalition& s,
                                     std::optional<double> threshold = std::nullopt);

std::string eval_samples_to_csv(const TabularDataset& data,
                                const EvalSampleEmission& emission);

}  // namespace shapcause
