#pragma once

#include <Eigen/Dense>
#include <span>

namespace shapcause {

// Sample matrices are row-major: one observation per contiguous row, so a row
// can be handed to model evaluation as a span without copying.
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const RowMatrix& m, Eigen::Index i) {
    return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

}  // namespace shapcause
