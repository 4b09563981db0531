#include "zib/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace zib {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093454836;

double log_sum_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

void check_probability(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::domain_error(std::string(name) + " must lie in [0, 1]");
    }
}

} // namespace

double logit(double x) {
    if (!(x > 0.0 && x < 1.0)) {
        throw std::domain_error("logit: argument must lie strictly inside (0, 1)");
    }
    return std::log(x / (1.0 - x));
}

double inv_logit(double t) {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double log_sigmoid(double t) {
    if (t >= 0.0) return -std::log1p(std::exp(-t));
    return t - std::log1p(std::exp(t));
}

void PriorConfig::validate() const {
    if (!(omega_lo >= 0.0 && omega_lo < omega_hi && omega_hi <= 1.0)) {
        throw std::invalid_argument("PriorConfig: omega prior requires 0 <= lo < hi <= 1");
    }
    if (!(p_lo >= 0.0 && p_lo < p_hi && p_hi <= 1.0)) {
        throw std::invalid_argument("PriorConfig: p prior requires 0 <= lo < hi <= 1");
    }
    if (!(coef_sigma_theta > 0.0 && coef_sigma_beta > 0.0 && hyper_scale > 0.0)) {
        throw std::invalid_argument("PriorConfig: scale parameters must be strictly positive");
    }
}

void SufficientStats::validate() const {
    if (n < 0 || s < 0 || s > n) {
        throw std::invalid_argument("SufficientStats: requires 0 <= s <= n");
    }
}

void Dataset::validate() const {
    // n = 0 is allowed here so prior-only posteriors stay well defined;
    // ingestion layers reject empty data before it reaches the models.
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != 0 && y[i] != 1) {
            throw std::invalid_argument("Dataset: outcome must be 0 or 1 (row " +
                                        std::to_string(i + 1) + ")");
        }
    }
    const auto rows = n();
    if (X.rows() != rows || Z.rows() != rows) {
        throw std::invalid_argument("Dataset: covariate row counts must match the outcome length");
    }
    if (!X.allFinite() || !Z.allFinite()) {
        throw std::invalid_argument("Dataset: covariate entries must be finite");
    }
}

SufficientStats Dataset::stats() const {
    SufficientStats st;
    st.n = static_cast<std::int64_t>(y.size());
    for (int v : y) st.s += v;
    return st;
}

double mass(const ZibParams& params, int y) {
    check_probability(params.omega, "mass: omega");
    check_probability(params.p, "mass: p");
    if (y != 0 && y != 1) throw std::domain_error("mass: y must be 0 or 1");
    const double p1 = params.omega * params.p;
    return y == 1 ? p1 : 1.0 - p1;
}

double loglik_nocov(const SufficientStats& stats, const ZibParams& params) {
    stats.validate();
    check_probability(params.omega, "loglik_nocov: omega");
    check_probability(params.p, "loglik_nocov: p");
    const double t = params.omega * params.p;
    double ll = 0.0;
    if (stats.s > 0) {
        if (t == 0.0) return kNegInf;
        ll += static_cast<double>(stats.s) * std::log(t);
    }
    if (stats.n > stats.s) {
        if (t == 1.0) return kNegInf;
        ll += static_cast<double>(stats.n - stats.s) * std::log1p(-t);
    }
    return ll;
}

CovariateModel::CovariateModel(const Dataset& data, const PriorConfig& prior)
    : prior_(prior) {
    data.validate();
    prior.validate();
    const auto n = data.n();
    xd_.resize(n, data.k() + 1);
    xd_.col(0).setOnes();
    if (data.k() > 0) xd_.rightCols(data.k()) = data.X;
    zd_.resize(n, data.q() + 1);
    zd_.col(0).setOnes();
    if (data.q() > 0) zd_.rightCols(data.q()) = data.Z;
    y_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) y_(i) = data.y[static_cast<std::size_t>(i)];

    names_.push_back("theta0");
    for (Eigen::Index j = 0; j < data.k(); ++j) {
        names_.push_back(j < static_cast<Eigen::Index>(data.x_names.size())
                             ? "theta_" + data.x_names[static_cast<std::size_t>(j)]
                             : "theta" + std::to_string(j + 1));
    }
    names_.push_back("beta0");
    for (Eigen::Index j = 0; j < data.q(); ++j) {
        names_.push_back(j < static_cast<Eigen::Index>(data.z_names.size())
                             ? "beta_" + data.z_names[static_cast<std::size_t>(j)]
                             : "beta" + std::to_string(j + 1));
    }
    dim_ = xd_.cols() + zd_.cols();
    if (hyperprior()) {
        names_.push_back("log_sigma_theta");
        names_.push_back("log_sigma_beta");
        dim_ += 2;
    }
}

Eigen::VectorXd CovariateModel::pack(const CoefVector& coefs) const {
    if (coefs.theta.size() != xd_.cols() || coefs.beta.size() != zd_.cols()) {
        throw std::invalid_argument("CovariateModel: coefficient dimensions do not match the data");
    }
    Eigen::VectorXd v(dim_);
    v.head(xd_.cols()) = coefs.theta;
    v.segment(xd_.cols(), zd_.cols()) = coefs.beta;
    if (hyperprior()) {
        v(dim_ - 2) = std::log(prior_.coef_sigma_theta);
        v(dim_ - 1) = std::log(prior_.coef_sigma_beta);
    }
    return v;
}

CoefVector CovariateModel::unpack(const Eigen::VectorXd& v) const {
    if (v.size() != dim_) {
        throw std::invalid_argument("CovariateModel: coordinate vector has wrong dimension");
    }
    CoefVector c;
    c.theta = v.head(xd_.cols());
    c.beta = v.segment(xd_.cols(), zd_.cols());
    return c;
}

double CovariateModel::log_posterior(const Eigen::VectorXd& v) const {
    if (v.size() != dim_) {
        throw std::invalid_argument("CovariateModel: coordinate vector has wrong dimension");
    }
    const auto kt = xd_.cols();
    const auto kb = zd_.cols();
    const Eigen::VectorXd eta_w = xd_ * v.head(kt);
    const Eigen::VectorXd eta_p = zd_ * v.segment(kt, kb);

    double ll = 0.0;
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
        const double lw = log_sigmoid(eta_w(i));
        const double lp = log_sigmoid(eta_p(i));
        if (y_(i) > 0.5) {
            ll += lw + lp;
        } else {
            // 1 - wp = (1-w) + w(1-p), kept positive for a stable log
            ll += log_sum_exp(log_sigmoid(-eta_w(i)), lw + log_sigmoid(-eta_p(i)));
        }
    }

    const double sig_t = hyperprior() ? std::exp(v(dim_ - 2)) : prior_.coef_sigma_theta;
    const double sig_b = hyperprior() ? std::exp(v(dim_ - 1)) : prior_.coef_sigma_beta;

    double lprior = 0.0;
    lprior += -0.5 * v.head(kt).squaredNorm() / (sig_t * sig_t) -
              static_cast<double>(kt) * (std::log(sig_t) + 0.5 * kLogTwoPi);
    lprior += -0.5 * v.segment(kt, kb).squaredNorm() / (sig_b * sig_b) -
              static_cast<double>(kb) * (std::log(sig_b) + 0.5 * kLogTwoPi);

    if (hyperprior()) {
        const double s = prior_.hyper_scale;
        const double c = 0.5 * std::log(2.0 / M_PI) - std::log(s);
        // half-normal on each sigma plus the log-scale Jacobian
        lprior += c - 0.5 * sig_t * sig_t / (s * s) + v(dim_ - 2);
        lprior += c - 0.5 * sig_b * sig_b / (s * s) + v(dim_ - 1);
    }
    return ll + lprior;
}

Eigen::VectorXd CovariateModel::grad(const Eigen::VectorXd& v) const {
    if (v.size() != dim_) {
        throw std::invalid_argument("CovariateModel: coordinate vector has wrong dimension");
    }
    const auto kt = xd_.cols();
    const auto kb = zd_.cols();
    const Eigen::VectorXd eta_w = xd_ * v.head(kt);
    const Eigen::VectorXd eta_p = zd_ * v.segment(kt, kb);

    Eigen::VectorXd w_theta(y_.size());
    Eigen::VectorXd w_beta(y_.size());
    for (Eigen::Index i = 0; i < y_.size(); ++i) {
        const double w = inv_logit(eta_w(i));
        const double p = inv_logit(eta_p(i));
        if (y_(i) > 0.5) {
            w_theta(i) = 1.0 - w;
            w_beta(i) = 1.0 - p;
        } else {
            double denom = inv_logit(-eta_w(i)) + w * inv_logit(-eta_p(i));
            denom = std::max(denom, std::numeric_limits<double>::min());
            w_theta(i) = -p * w * (1.0 - w) / denom;
            w_beta(i) = -w * p * (1.0 - p) / denom;
        }
    }

    const double sig_t = hyperprior() ? std::exp(v(dim_ - 2)) : prior_.coef_sigma_theta;
    const double sig_b = hyperprior() ? std::exp(v(dim_ - 1)) : prior_.coef_sigma_beta;

    Eigen::VectorXd g(dim_);
    g.head(kt) = xd_.transpose() * w_theta - v.head(kt) / (sig_t * sig_t);
    g.segment(kt, kb) = zd_.transpose() * w_beta - v.segment(kt, kb) / (sig_b * sig_b);
    if (hyperprior()) {
        const double s2 = prior_.hyper_scale * prior_.hyper_scale;
        g(dim_ - 2) = v.head(kt).squaredNorm() / (sig_t * sig_t) - static_cast<double>(kt) +
                      1.0 - sig_t * sig_t / s2;
        g(dim_ - 1) = v.segment(kt, kb).squaredNorm() / (sig_b * sig_b) - static_cast<double>(kb) +
                      1.0 - sig_b * sig_b / s2;
    }
    return g;
}

double log_posterior_cov(const Dataset& data, const CoefVector& coefs,
                         const PriorConfig& prior) {
    const CovariateModel model(data, prior);
    return model.log_posterior(model.pack(coefs));
}

Eigen::VectorXd grad_log_posterior_cov(const Dataset& data, const CoefVector& coefs,
                                       const PriorConfig& prior) {
    const CovariateModel model(data, prior);
    return model.grad(model.pack(coefs));
}

} // namespace zib
