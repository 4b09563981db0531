#include "zib/glm.hpp"

#include <cmath>
#include <stdexcept>

#include "zib/model.hpp"

namespace zib {

LogisticFit fit_logistic(const std::vector<int>& y, const Eigen::MatrixXd& W) {
    const auto n = W.rows();
    const auto m = W.cols();
    if (static_cast<Eigen::Index>(y.size()) != n) {
        throw std::invalid_argument("fit_logistic: outcome length must match design rows");
    }
    if (n < m) throw std::invalid_argument("fit_logistic: more columns than observations");
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) {
            throw std::invalid_argument("fit_logistic: outcome must be 0 or 1 (row " +
                                        std::to_string(i + 1) + ")");
        }
    }

    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[static_cast<std::size_t>(i)];

    LogisticFit fit;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd info(m, m);

    constexpr double kScoreTol = 1e-8;
    constexpr double kSeparationBound = 30.0;
    constexpr int kMaxIter = 100;

    // a vanishing score alone does not certify an interior MLE: along a
    // separated path the score decays while the steps stay large
    double last_step = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= kMaxIter; ++it) {
        fit.n_iterations = it;
        const Eigen::VectorXd eta = W * beta;
        Eigen::VectorXd mu(n), wgt(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            mu(i) = inv_logit(eta(i));
            wgt(i) = mu(i) * (1.0 - mu(i));
        }
        const Eigen::VectorXd score = W.transpose() * (yv - mu);
        info = W.transpose() * wgt.asDiagonal() * W;

        if (score.lpNorm<Eigen::Infinity>() < kScoreTol && last_step < 1e-4) {
            fit.converged = true;
            break;
        }
        const Eigen::VectorXd delta = info.ldlt().solve(score);
        if (!delta.allFinite()) {
            fit.message = "fit_logistic: information matrix is singular";
            break;
        }
        beta += delta;
        last_step = delta.lpNorm<Eigen::Infinity>();
        if (beta.lpNorm<Eigen::Infinity>() > kSeparationBound) {
            fit.separation = true;
            fit.message = "fit_logistic: perfect separation detected (diverging coefficients)";
            break;
        }
    }
    if (!fit.converged && fit.message.empty()) {
        fit.message = "fit_logistic: IRLS did not converge within 100 iterations";
    }

    fit.coefficients = beta;
    fit.standard_errors = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::quiet_NaN());
    if (fit.converged) {
        const Eigen::MatrixXd cov = info.inverse();
        fit.standard_errors = cov.diagonal().array().sqrt();
    }
    fit.ci95.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) {
        fit.ci95.emplace_back(beta(j) - 1.96 * fit.standard_errors(j),
                              beta(j) + 1.96 * fit.standard_errors(j));
    }
    return fit;
}

} // namespace zib
