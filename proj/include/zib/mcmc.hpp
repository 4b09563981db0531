#ifndef ZIB_MCMC_HPP
#define ZIB_MCMC_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "zib/model.hpp"

namespace zib {

// Per-coordinate support: finite box, half line, or the whole real line.
struct Support {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static Support box(double lo, double hi) { return {lo, hi}; }
    static Support positive() { return {0.0, std::numeric_limits<double>::infinity()}; }
    static Support real() { return {}; }
    bool bounded_below() const { return std::isfinite(lo); }
    bool bounded_above() const { return std::isfinite(hi); }
};

struct ChainConfig {
    int n_chains = 4;
    int iterations = 2000; // post-warmup draws per chain
    int warmup = 1000;
    std::uint64_t seed = 0;
    double target_accept = 0.30;
    double init_jitter = 0.5;
    int threads = 1; // chains run concurrently when > 1; results identical either way

    void validate() const;
};

struct ChainDraws {
    std::vector<std::string> param_names;
    std::vector<Eigen::MatrixXd> chains; // per chain: iterations x n_params, constrained scale
    std::vector<double> accept_rate;     // post-warmup, per chain
    std::vector<bool> adaptation_frozen; // instrumentation: proposal unchanged after warmup
    std::vector<Eigen::MatrixXd> proposal_cov; // frozen proposal covariance per chain

    int n_chains() const { return static_cast<int>(chains.size()); }
    Eigen::Index iterations() const { return chains.empty() ? 0 : chains[0].rows(); }
    Eigen::Index n_params() const { return chains.empty() ? 0 : chains[0].cols(); }
    // draws of one parameter pooled across chains in chain order
    Eigen::VectorXd pooled(Eigen::Index param) const;
};

struct Diagnostics {
    std::vector<double> rhat;
    std::vector<double> ess;
    std::vector<bool> constant_param;
    std::vector<bool> divergent_or_stuck; // per chain: acceptance < 0.05 or > 0.95

    double max_rhat() const;
    double min_ess() const;
};

// Scaled-logit bijection per coordinate (log/identity on half-open and open
// supports). Boundary values are rejected with std::domain_error.
Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& x, const std::vector<Support>& supports);
Eigen::VectorXd from_unconstrained(const Eigen::VectorXd& u, const std::vector<Support>& supports);
// log |d x / d u| of the inverse transform, summed over coordinates.
double log_jacobian_from_unconstrained(const Eigen::VectorXd& u,
                                       const std::vector<Support>& supports);

using LogDensity = std::function<double(const Eigen::VectorXd&)>;

// Adaptive random-walk Metropolis on the unconstrained scale. The proposal
// covariance is adapted from the running empirical covariance during warmup
// (Haario-style, scaled by 2.38^2/d with an acceptance-targeting step size)
// and frozen afterwards. Each chain uses an independent stream derived from
// (config.seed, chain index); identical inputs give identical draws.
ChainDraws sample(const LogDensity& target_log_density, const std::vector<Support>& supports,
                  const std::vector<std::string>& param_names, const ChainConfig& config,
                  const std::optional<Eigen::VectorXd>& init = std::nullopt);

// Split R-hat and initial-positive-sequence ESS.
Diagnostics diagnose(const ChainDraws& draws);

// Pooled median and 2.5/97.5 percentiles (linear interpolation between order
// statistics), one summary per parameter.
std::vector<PosteriorSummary> summarize_draws(const ChainDraws& draws);

struct MapResult {
    Eigen::VectorXd x;
    double value = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Gradient ascent with backtracking line search (Barzilai-Borwein initial
// step), used to initialize chains near the posterior mode.
MapResult find_map(const std::function<double(const Eigen::VectorXd&)>& f,
                   const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                   Eigen::VectorXd x0, int max_steps = 500, double tol = 1e-8);

} // namespace zib

#endif // ZIB_MCMC_HPP
