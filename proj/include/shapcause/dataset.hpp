#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapcause/coalition.hpp"
#include "shapcause/matrix.hpp"

namespace shapcause {

enum class ColumnKind { continuous, discrete };

/// An in-memory tabular sample: one observation per row, with a declared
/// (never inferred) kind per column. Discrete columns match exactly in
/// restrict_rows; continuous ones match within a scale-aware band.
class TabularDataset {
public:
    explicit TabularDataset(RowMatrix rows, std::vector<ColumnKind> kinds = {},
                            std::vector<std::string> names = {});

    int feature_count() const { return static_cast<int>(rows_.cols()); }
    Eigen::Index row_count() const { return rows_.rows(); }
    const RowMatrix& rows() const { return rows_; }
    const std::vector<ColumnKind>& column_kinds() const { return kinds_; }
    const std::vector<std::string>& column_names() const { return names_; }

    const Eigen::VectorXd& column_means() const { return means_; }
    /// Per-column sample standard deviation (n-1 denominator; 0 for n = 1).
    const Eigen::VectorXd& column_std_devs() const { return sds_; }

    /// CSV layout: a header row of column names, an optional second row of
    /// column kinds (`continuous` / `discrete`), then numeric rows.
    static TabularDataset from_csv(const std::string& path);
    static TabularDataset from_csv_stream(std::istream& in, const std::string& origin);
    void to_csv(const std::string& path) const;
    void to_csv_stream(std::ostream& out) const;

private:
    RowMatrix rows_;
    std::vector<ColumnKind> kinds_;
    std::vector<std::string> names_;
    Eigen::VectorXd means_;
    Eigen::VectorXd sds_;
};

/// Indices (in original order) of rows matching x_s on the coalition columns.
/// Discrete columns compare exactly; continuous columns match within
/// tol_continuous * column sample SD. An empty result is a legal return.
std::vector<Eigen::Index> restrict_rows(const TabularDataset& data, const Coalition& s,
                                        std::span<const double> x_s,
                                        double tol_continuous);

/// Copy of the rows with the coalition columns overwritten by x_s. The
/// source dataset is untouched.
RowMatrix replace_columns(const TabularDataset& data, const Coalition& s,
                          std::span<const double> x_s);
RowMatrix replace_columns(const RowMatrix& rows, const Coalition& s,
                          std::span<const double> x_s);

/// Squared Mahalanobis distances of evaluation rows to the data's empirical
/// mean/covariance, with a flag per row marking distances beyond the
/// threshold.
struct ExtrapolationReport {
    Eigen::VectorXd mahalanobis_sq;
    std::vector<char> flagged;
    double threshold = 0.0;  // applied to the squared distance

    std::size_t flagged_count() const;
    double flagged_fraction() const;
};

/// Default threshold: 99th percentile of chi-squared with one degree of
/// freedom per feature. Requires n > m rows and a positive-definite
/// empirical covariance.
ExtrapolationReport extrapolation_flags(const TabularDataset& data,
                                        const RowMatrix& eval_rows,
                                        std::optional<double> threshold = std::nullopt);

double chi_squared_quantile(double p, int dof);

const char* column_kind_name(ColumnKind kind);

}  // namespace shapcause
