#include "shapcause/gaussian.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "shapcause/errors.hpp"
#include "shapcause/parallel.hpp"
#include "shapcause/rng.hpp"

namespace shapcause {

namespace {
constexpr double kSymmetryTol = 1e-12;
}

GaussianDistribution::GaussianDistribution(Eigen::VectorXd mu, Eigen::MatrixXd sigma)
    : mu_(std::move(mu)), sigma_(std::move(sigma)) {
    const auto d = mu_.size();
    if (d < 1) throw std::invalid_argument("GaussianDistribution: empty mean vector");
    if (sigma_.rows() != d || sigma_.cols() != d)
        throw std::invalid_argument("GaussianDistribution: covariance must be " +
                                    std::to_string(d) + "x" + std::to_string(d));
    if (!mu_.allFinite() || !sigma_.allFinite())
        throw std::invalid_argument("GaussianDistribution: non-finite parameter");
    const double asym = (sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol)
        throw std::invalid_argument(
            "GaussianDistribution: covariance asymmetric by " + std::to_string(asym));

    Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
    if (llt.info() != Eigen::Success)
        throw LinearAlgebraError(
            "GaussianDistribution: covariance is not positive-definite "
            "(Cholesky failed)");
    chol_lower_ = llt.matrixL();
    // Guard against semi-definite matrices that slip through LLT rounding.
    for (Eigen::Index i = 0; i < d; ++i)
        if (!(chol_lower_(i, i) > 0.0))
            throw LinearAlgebraError(
                "GaussianDistribution: covariance is singular (zero Cholesky pivot)");
}

std::optional<double> GaussianDistribution::common_correlation() const {
    if (mu_.cwiseAbs().maxCoeff() > kSymmetryTol) return std::nullopt;
    const int d = dim();
    for (int i = 0; i < d; ++i)
        if (std::abs(sigma_(i, i) - 1.0) > kSymmetryTol) return std::nullopt;
    if (d == 1) return 0.0;
    const double rho = sigma_(0, 1);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j && std::abs(sigma_(i, j) - rho) > kSymmetryTol)
                return std::nullopt;
    return rho;
}

GaussianDistribution GaussianDistribution::standardized_pair(double rho) {
    return equicorrelated(2, rho);
}

GaussianDistribution GaussianDistribution::equicorrelated(int m, double rho) {
    if (m < 1) throw std::invalid_argument("equicorrelated: m must be >= 1");
    if (!(std::abs(rho) < 1.0))
        throw std::invalid_argument("equicorrelated: |rho| must be < 1, got " +
                                    std::to_string(rho));
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(m, m, rho);
    sigma.diagonal().setOnes();
    return GaussianDistribution(Eigen::VectorXd::Zero(m), std::move(sigma));
}

GaussianDistribution GaussianDistribution::with_ridge(Eigen::VectorXd mu,
                                                      Eigen::MatrixXd sigma,
                                                      double ridge) {
    if (!(ridge >= 0.0) || !std::isfinite(ridge))
        throw std::invalid_argument("with_ridge: ridge must be finite and >= 0");
    sigma.diagonal().array() += ridge;
    return GaussianDistribution(std::move(mu), std::move(sigma));
}

GaussianDistribution gaussian_conditional(const GaussianDistribution& dist,
                                          const Coalition& s,
                                          std::span<const double> x_s) {
    if (s.dim() != dist.dim())
        throw std::invalid_argument("gaussian_conditional: coalition dimension mismatch");
    if (s.is_empty() || s.is_full())
        throw std::invalid_argument(
            "gaussian_conditional: coalition must be a proper non-empty subset");
    const std::vector<int> in = s.indices();
    const std::vector<int> out = s.complement().indices();
    if (x_s.size() != in.size())
        throw std::invalid_argument("gaussian_conditional: x_s has length " +
                                    std::to_string(x_s.size()) + ", coalition has " +
                                    std::to_string(in.size()) + " members");

    const auto ns = static_cast<Eigen::Index>(in.size());
    const auto nc = static_cast<Eigen::Index>(out.size());
    const Eigen::MatrixXd& sigma = dist.covariance();
    const Eigen::VectorXd& mu = dist.mean();

    Eigen::MatrixXd sigma_ss(ns, ns), sigma_sc(ns, nc), sigma_cc(nc, nc);
    Eigen::VectorXd mu_s(ns), mu_c(nc), delta(ns);
    for (Eigen::Index a = 0; a < ns; ++a) {
        mu_s(a) = mu(in[static_cast<std::size_t>(a)]);
        delta(a) = x_s[static_cast<std::size_t>(a)] - mu_s(a);
        for (Eigen::Index b = 0; b < ns; ++b)
            sigma_ss(a, b) = sigma(in[static_cast<std::size_t>(a)],
                                   in[static_cast<std::size_t>(b)]);
        for (Eigen::Index b = 0; b < nc; ++b)
            sigma_sc(a, b) = sigma(in[static_cast<std::size_t>(a)],
                                   out[static_cast<std::size_t>(b)]);
    }
    for (Eigen::Index a = 0; a < nc; ++a) {
        mu_c(a) = mu(out[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b < nc; ++b)
            sigma_cc(a, b) = sigma(out[static_cast<std::size_t>(a)],
                                   out[static_cast<std::size_t>(b)]);
    }

    Eigen::LLT<Eigen::MatrixXd> llt(sigma_ss);
    if (llt.info() != Eigen::Success)
        throw LinearAlgebraError(
            "gaussian_conditional: Sigma_SS for coalition " + s.to_string() +
            " is singular or not positive-definite");
    // K = Sigma_SS^{-1} Sigma_SC via the factorization; no explicit inverse.
    const Eigen::MatrixXd k = llt.solve(sigma_sc);
    Eigen::VectorXd cond_mean = mu_c + k.transpose() * delta;
    Eigen::MatrixXd cond_cov = sigma_cc - sigma_sc.transpose() * k;
    cond_cov = 0.5 * (cond_cov + cond_cov.transpose()).eval();  // exact symmetrization

    return GaussianDistribution(std::move(cond_mean), std::move(cond_cov));
}

RowMatrix gaussian_sample(const GaussianDistribution& dist, std::size_t n,
                          std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gaussian_sample: n must be >= 1");
    const int d = dist.dim();
    const Eigen::MatrixXd& chol = dist.cholesky_factor();
    const Eigen::VectorXd& mu = dist.mean();

    RowMatrix out(static_cast<Eigen::Index>(n), d);
    par::parallel_for(n, [&](std::size_t i) {
        Rng rng(mix_seed(seed, i));
        auto row = out.row(static_cast<Eigen::Index>(i));
        for (int j = 0; j < d; ++j) row(j) = rng.normal();
        // In-place mu + L*z, descending so each slot is read before overwrite.
        for (int j = d - 1; j >= 0; --j) {
            double x = mu(j);
            for (int k = 0; k <= j; ++k) x += chol(j, k) * row(k);
            row(j) = x;
        }
    });
    return out;
}

}  // namespace shapcause
