#ifndef ZIB_FIT_HPP
#define ZIB_FIT_HPP

#include <string>
#include <vector>

#include "zib/analytic.hpp"
#include "zib/mcmc.hpp"
#include "zib/model.hpp"

namespace zib {

struct ParamFit {
    std::string name;
    PosteriorSummary summary;
    double rhat = 1.0;
    double ess = 0.0;
};

struct FitResult {
    std::string method; // "analytic" or "mcmc"
    std::vector<ParamFit> params;
    std::vector<double> accept_rate;
    double max_rhat = 1.0;
    double min_ess = 0.0;
    bool converged = true; // mcmc: max rhat <= 1.1
};

// Closed-form no-covariate fit: marginal posteriors of omega and p.
FitResult fit_analytic_nocov(const SufficientStats& stats, const PriorConfig& prior);

// Sampler-based no-covariate fit on the (omega, p) prior box.
FitResult fit_mcmc_nocov(const SufficientStats& stats, const PriorConfig& prior,
                         const ChainConfig& config);

// Covariate-model fit: MAP-initialized adaptive random-walk Metropolis over
// the coefficient space. In hyperprior mode the sigma summaries are reported
// on the positive scale.
FitResult fit_mcmc_cov(const Dataset& data, const PriorConfig& prior,
                       const ChainConfig& config);

} // namespace zib

#endif // ZIB_FIT_HPP
