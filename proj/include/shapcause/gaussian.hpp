#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "shapcause/coalition.hpp"
#include "shapcause/matrix.hpp"

namespace shapcause {

/// Multivariate normal with positive-definite covariance. The covariance is
/// validated at construction (symmetry to 1e-12, Cholesky succeeds); the
/// lower Cholesky factor is kept for sampling. No implicit regularization:
/// a non-PD covariance throws LinearAlgebraError.
class GaussianDistribution {
public:
    GaussianDistribution(Eigen::VectorXd mu, Eigen::MatrixXd sigma);

    int dim() const { return static_cast<int>(mu_.size()); }
    const Eigen::VectorXd& mean() const { return mu_; }
    const Eigen::MatrixXd& covariance() const { return sigma_; }
    const Eigen::MatrixXd& cholesky_factor() const { return chol_lower_; }

    /// If the distribution has zero mean, unit variances and one common
    /// off-diagonal correlation (to 1e-12), returns that correlation.
    std::optional<double> common_correlation() const;

    /// Zero-mean bivariate with unit variances and correlation rho, |rho| < 1.
    static GaussianDistribution standardized_pair(double rho);

    /// Zero-mean m-variate, unit variances, all off-diagonals equal to rho.
    static GaussianDistribution equicorrelated(int m, double rho);

    /// Explicit opt-in regularization for a near-singular covariance:
    /// ridge * I is added before validation. Nothing in the library applies a
    /// ridge on the caller's behalf.
    static GaussianDistribution with_ridge(Eigen::VectorXd mu, Eigen::MatrixXd sigma,
                                           double ridge);

private:
    Eigen::VectorXd mu_;
    Eigen::MatrixXd sigma_;
    Eigen::MatrixXd chol_lower_;
};

/// Distribution of the out-of-coalition coordinates given X_S = x_s, in
/// ascending index order of the complement. x_s follows the ascending order
/// of s. Solved through the Cholesky factor of Sigma_SS; a singular block
/// throws LinearAlgebraError, an empty or full s throws invalid_argument.
GaussianDistribution gaussian_conditional(const GaussianDistribution& dist,
                                          const Coalition& s,
                                          std::span<const double> x_s);

/// n i.i.d. draws, one per row. Row i is generated from the sub-stream
/// mix_seed(seed, i), so the matrix is reproducible at any thread count and
/// any prefix of rows is stable under growing n.
RowMatrix gaussian_sample(const GaussianDistribution& dist, std::size_t n,
                          std::uint64_t seed);

}  // namespace shapcause
