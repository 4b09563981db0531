#ifndef ZIB_MODEL_HPP
#define ZIB_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace zib {

// Logit link and its inverse. logit throws std::domain_error at x in {0, 1}.
double logit(double x);
double inv_logit(double t);
// log(inv_logit(t)), stable for large |t|.
double log_sigmoid(double t);

// Exposure probability omega and conditional success probability p.
struct ZibParams {
    double omega;
    double p;
};

enum class SigmaMode { fixed, hyperprior };

struct PriorConfig {
    double omega_lo = 0.0;
    double omega_hi = 0.5;
    double p_lo = 0.5;
    double p_hi = 1.0;
    double coef_sigma_theta = 5.0;
    double coef_sigma_beta = 5.0;
    SigmaMode sigma_mode = SigmaMode::fixed;
    double hyper_scale = 2.5; // half-normal scale when sigma_mode == hyperprior

    void validate() const;
};

// Sample size n and success count s (0 <= s <= n).
struct SufficientStats {
    std::int64_t n = 0;
    std::int64_t s = 0;

    void validate() const;
};

// Binary outcomes plus covariate blocks: X drives the zero-inflated part
// (omega side), Z the non-zero-inflated part (p side). Intercepts are
// implicit and always prepended by consumers.
struct Dataset {
    std::vector<int> y;
    Eigen::MatrixXd X;
    Eigen::MatrixXd Z;
    std::vector<std::string> x_names;
    std::vector<std::string> z_names;

    Eigen::Index n() const { return static_cast<Eigen::Index>(y.size()); }
    Eigen::Index k() const { return X.cols(); }
    Eigen::Index q() const { return Z.cols(); }
    void validate() const;
    SufficientStats stats() const;
};

// theta: length k+1 (intercept first, omega side); beta: length q+1 (p side).
struct CoefVector {
    Eigen::VectorXd theta;
    Eigen::VectorXd beta;
};

struct PosteriorSummary {
    double median = 0.0;
    double q025 = 0.0;
    double q975 = 0.0;
    double mean = 0.0;
};

// P(Y = y) under the mixture: (1-omega) + omega(1-p) for y=0, omega*p for y=1.
double mass(const ZibParams& params, int y);

// s*ln(omega p) + (n-s)*ln(1 - omega p); returns -inf when the likelihood is
// exactly zero.
double loglik_nocov(const SufficientStats& stats, const ZibParams& params);

// Log-posterior of the covariate model: dual logit links with normal
// coefficient priors. Coordinates are the flattened vector
// [theta, beta(, log sigma_theta, log sigma_beta)] — the log-scale
// coordinates (with Jacobian) are appended when sigma_mode == hyperprior.
class CovariateModel {
public:
    CovariateModel(const Dataset& data, const PriorConfig& prior);

    Eigen::Index dim() const { return dim_; }
    const std::vector<std::string>& param_names() const { return names_; }

    double log_posterior(const Eigen::VectorXd& v) const;
    Eigen::VectorXd grad(const Eigen::VectorXd& v) const;

    // Flatten/unflatten between CoefVector and the coordinate vector.
    Eigen::VectorXd pack(const CoefVector& coefs) const;
    CoefVector unpack(const Eigen::VectorXd& v) const;

    bool hyperprior() const { return prior_.sigma_mode == SigmaMode::hyperprior; }
    Eigen::Index n_theta() const { return xd_.cols(); }
    Eigen::Index n_beta() const { return zd_.cols(); }

private:
    Eigen::MatrixXd xd_; // n x (k+1), leading column of ones
    Eigen::MatrixXd zd_; // n x (q+1)
    Eigen::VectorXd y_;
    PriorConfig prior_;
    Eigen::Index dim_;
    std::vector<std::string> names_;
};

double log_posterior_cov(const Dataset& data, const CoefVector& coefs,
                         const PriorConfig& prior);
Eigen::VectorXd grad_log_posterior_cov(const Dataset& data, const CoefVector& coefs,
                                       const PriorConfig& prior);

} // namespace zib

#endif // ZIB_MODEL_HPP
