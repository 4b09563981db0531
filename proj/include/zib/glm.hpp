#ifndef ZIB_GLM_HPP
#define ZIB_GLM_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace zib {

struct LogisticFit {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    std::vector<std::pair<double, double>> ci95; // coefficient +/- 1.96 * SE, exactly
    bool converged = false;
    int n_iterations = 0;
    bool separation = false;
    std::string message;
};

// Maximum-likelihood logistic regression via iteratively reweighted least
// squares. W must already contain the intercept column. Converges when the
// max absolute score drops below 1e-8 (at most 100 iterations); diverging
// coefficients (|coef| > 30) are reported as separation.
LogisticFit fit_logistic(const std::vector<int>& y, const Eigen::MatrixXd& W);

} // namespace zib

#endif // ZIB_GLM_HPP
