#include "shapcause/dataset.hpp"

#include <Eigen/Cholesky>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "shapcause/errors.hpp"

namespace shapcause {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

TabularDataset::TabularDataset(RowMatrix rows, std::vector<ColumnKind> kinds,
                               std::vector<std::string> names)
    : rows_(std::move(rows)), kinds_(std::move(kinds)), names_(std::move(names)) {
    if (rows_.rows() < 1 || rows_.cols() < 1)
        throw std::invalid_argument("TabularDataset: needs at least one row and column");
    if (!rows_.allFinite())
        throw std::invalid_argument("TabularDataset: non-finite entry");
    const auto m = static_cast<std::size_t>(rows_.cols());
    if (kinds_.empty()) kinds_.assign(m, ColumnKind::continuous);
    if (kinds_.size() != m)
        throw std::invalid_argument("TabularDataset: one column kind per column required");
    if (names_.empty()) {
        names_.reserve(m);
        for (std::size_t j = 0; j < m; ++j) names_.push_back("x" + std::to_string(j));
    }
    if (names_.size() != m)
        throw std::invalid_argument("TabularDataset: one column name per column required");

    means_ = rows_.colwise().mean();
    const auto n = rows_.rows();
    if (n > 1) {
        Eigen::VectorXd var =
            (rows_.rowwise() - means_.transpose()).colwise().squaredNorm() /
            static_cast<double>(n - 1);
        sds_ = var.cwiseSqrt();
    } else {
        sds_ = Eigen::VectorXd::Zero(rows_.cols());
    }
}

TabularDataset TabularDataset::from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open dataset file: " + path);
    return from_csv_stream(in, path);
}

TabularDataset TabularDataset::from_csv_stream(std::istream& in,
                                               const std::string& origin) {
    std::string line;
    if (!std::getline(in, line))
        throw InputError(origin + ": empty file, expected a header row");
    std::vector<std::string> names;
    for (auto& c : split_csv_line(line)) names.push_back(trim(c));
    const std::size_t m = names.size();
    if (m == 0) throw InputError(origin + ": header row has no columns");

    std::vector<ColumnKind> kinds;
    std::vector<std::vector<double>> data;
    std::size_t line_no = 1;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (first_data_line) {
            // An optional second header row declares column kinds.
            bool all_kinds = true;
            for (const auto& c : cells) {
                const std::string t = trim(c);
                if (t != "continuous" && t != "discrete") {
                    all_kinds = false;
                    break;
                }
            }
            if (all_kinds && !cells.empty()) {
                if (cells.size() != m)
                    throw InputError(origin + ":2: kinds row has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(m));
                for (const auto& c : cells)
                    kinds.push_back(trim(c) == "discrete" ? ColumnKind::discrete
                                                          : ColumnKind::continuous);
                first_data_line = false;
                continue;
            }
            first_data_line = false;
        }
        if (cells.size() != m)
            throw InputError(origin + ":" + std::to_string(line_no) + ": row has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(m));
        std::vector<double> row(m);
        for (std::size_t j = 0; j < m; ++j) {
            const std::string cell = trim(cells[j]);
            char* end = nullptr;
            row[j] = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size())
                throw InputError(origin + ":" + std::to_string(line_no) +
                                 ": column '" + names[j] + "': not a number: '" +
                                 cell + "'");
        }
        data.push_back(std::move(row));
    }
    if (data.empty()) throw InputError(origin + ": no data rows");

    RowMatrix rows(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t j = 0; j < m; ++j)
            rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i][j];
    return TabularDataset(std::move(rows), std::move(kinds), std::move(names));
}

void TabularDataset::to_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write dataset file: " + path);
    to_csv_stream(out);
}

void TabularDataset::to_csv_stream(std::ostream& out) const {
    const auto m = names_.size();
    for (std::size_t j = 0; j < m; ++j)
        out << names_[j] << (j + 1 < m ? "," : "\n");
    for (std::size_t j = 0; j < m; ++j)
        out << column_kind_name(kinds_[j]) << (j + 1 < m ? "," : "\n");
    for (Eigen::Index i = 0; i < rows_.rows(); ++i)
        for (Eigen::Index j = 0; j < rows_.cols(); ++j)
            out << format_double(rows_(i, j)) << (j + 1 < rows_.cols() ? "," : "\n");
}

std::vector<Eigen::Index> restrict_rows(const TabularDataset& data, const Coalition& s,
                                        std::span<const double> x_s,
                                        double tol_continuous) {
    if (s.dim() != data.feature_count())
        throw std::invalid_argument("restrict_rows: coalition dimension mismatch");
    const std::vector<int> idx = s.indices();
    if (x_s.size() != idx.size())
        throw std::invalid_argument("restrict_rows: x_s length mismatch");
    if (tol_continuous < 0.0)
        throw std::invalid_argument("restrict_rows: negative tolerance");

    std::vector<Eigen::Index> matches;
    const RowMatrix& rows = data.rows();
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        bool ok = true;
        for (std::size_t a = 0; a < idx.size() && ok; ++a) {
            const int j = idx[a];
            const double cell = rows(i, j);
            if (data.column_kinds()[static_cast<std::size_t>(j)] == ColumnKind::discrete) {
                ok = cell == x_s[a];
            } else {
                const double band = tol_continuous * data.column_std_devs()(j);
                ok = std::abs(cell - x_s[a]) <= band;
            }
        }
        if (ok) matches.push_back(i);
    }
    return matches;
}

RowMatrix replace_columns(const RowMatrix& rows, const Coalition& s,
                          std::span<const double> x_s) {
    const std::vector<int> idx = s.indices();
    if (x_s.size() != idx.size())
        throw std::invalid_argument("replace_columns: x_s length mismatch");
    if (s.dim() != static_cast<int>(rows.cols()))
        throw std::invalid_argument("replace_columns: coalition dimension mismatch");
    RowMatrix out = rows;
    for (std::size_t a = 0; a < idx.size(); ++a)
        out.col(idx[a]).setConstant(x_s[a]);
    return out;
}

RowMatrix replace_columns(const TabularDataset& data, const Coalition& s,
                          std::span<const double> x_s) {
    return replace_columns(data.rows(), s, x_s);
}

std::size_t ExtrapolationReport::flagged_count() const {
    std::size_t c = 0;
    for (char f : flagged) c += f != 0;
    return c;
}

double ExtrapolationReport::flagged_fraction() const {
    return flagged.empty() ? 0.0
                           : static_cast<double>(flagged_count()) /
                                 static_cast<double>(flagged.size());
}

double chi_squared_quantile(double p, int dof) {
    if (dof < 1) throw std::invalid_argument("chi_squared_quantile: dof must be >= 1");
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("chi_squared_quantile: p must be in (0,1)");
    return boost::math::quantile(boost::math::chi_squared(dof), p);
}

ExtrapolationReport extrapolation_flags(const TabularDataset& data,
                                        const RowMatrix& eval_rows,
                                        std::optional<double> threshold) {
    const int m = data.feature_count();
    if (data.row_count() <= m)
        throw std::invalid_argument(
            "extrapolation_flags: need more rows than features for an empirical "
            "covariance");
    if (eval_rows.cols() != m)
        throw std::invalid_argument("extrapolation_flags: evaluation rows have wrong width");

    const Eigen::VectorXd mu = data.column_means();
    const Eigen::MatrixXd centered =
        data.rows().rowwise() - mu.transpose();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(data.row_count() - 1);

    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    bool singular = llt.info() != Eigen::Success;
    if (!singular) {
        // Exactly collinear columns can slip past LLT with a pivot at
        // rounding level; reject them by relative pivot size.
        const Eigen::MatrixXd lmat = llt.matrixL();
        const double pivot_min = lmat.diagonal().minCoeff();
        const double pivot_max = lmat.diagonal().maxCoeff();
        singular = !(pivot_min > 1e-7 * pivot_max);
    }
    if (singular)
        throw LinearAlgebraError(
            "extrapolation_flags: empirical covariance is singular");

    ExtrapolationReport report;
    report.threshold = threshold.value_or(chi_squared_quantile(0.99, m));
    report.mahalanobis_sq.resize(eval_rows.rows());
    report.flagged.resize(static_cast<std::size_t>(eval_rows.rows()));
    for (Eigen::Index i = 0; i < eval_rows.rows(); ++i) {
        const Eigen::VectorXd d = eval_rows.row(i).transpose() - mu;
        const double dist_sq = d.dot(llt.solve(d));
        report.mahalanobis_sq(i) = dist_sq;
        report.flagged[static_cast<std::size_t>(i)] = dist_sq > report.threshold ? 1 : 0;
    }
    return report;
}

const char* column_kind_name(ColumnKind kind) {
    return kind == ColumnKind::discrete ? "discrete" : "continuous";
}

}  // namespace shapcause
