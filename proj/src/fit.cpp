#include "zib/fit.hpp"

#include <cmath>

namespace zib {

namespace {

FitResult from_draws(ChainDraws draws) {
    FitResult res;
    res.method = "mcmc";
    const Diagnostics diag = diagnose(draws);
    const auto summaries = summarize_draws(draws);
    for (std::size_t p = 0; p < summaries.size(); ++p) {
        res.params.push_back({draws.param_names[p], summaries[p], diag.rhat[p], diag.ess[p]});
    }
    res.accept_rate = draws.accept_rate;
    res.max_rhat = diag.max_rhat();
    res.min_ess = diag.min_ess();
    res.converged = res.max_rhat <= 1.1;
    return res;
}

} // namespace

FitResult fit_analytic_nocov(const SufficientStats& stats, const PriorConfig& prior) {
    FitResult res;
    res.method = "analytic";
    const MarginalPosterior mw = build_marginal(stats, prior, ParamKind::omega);
    const MarginalPosterior mp = build_marginal(stats, prior, ParamKind::p);
    res.params.push_back({"omega", summarize(mw), 1.0, 0.0});
    res.params.push_back({"p", summarize(mp), 1.0, 0.0});
    return res;
}

FitResult fit_mcmc_nocov(const SufficientStats& stats, const PriorConfig& prior,
                         const ChainConfig& config) {
    stats.validate();
    prior.validate();
    const std::vector<Support> supports = {Support::box(prior.omega_lo, prior.omega_hi),
                                           Support::box(prior.p_lo, prior.p_hi)};
    auto target = [stats](const Eigen::VectorXd& v) {
        return loglik_nocov(stats, {v(0), v(1)});
    };
    return from_draws(sample(target, supports, {"omega", "p"}, config));
}

FitResult fit_mcmc_cov(const Dataset& data, const PriorConfig& prior,
                       const ChainConfig& config) {
    const CovariateModel model(data, prior);
    auto f = [&model](const Eigen::VectorXd& v) { return model.log_posterior(v); };
    auto g = [&model](const Eigen::VectorXd& v) { return model.grad(v); };
    const MapResult map = find_map(f, g, Eigen::VectorXd::Zero(model.dim()));

    const std::vector<Support> supports(static_cast<std::size_t>(model.dim()), Support::real());
    ChainDraws draws = sample(f, supports, model.param_names(), config,
                              std::optional<Eigen::VectorXd>(map.x));

    if (model.hyperprior()) {
        // report the scales on the positive scale
        const auto d = model.dim();
        for (auto& chain : draws.chains) {
            chain.col(d - 2) = chain.col(d - 2).array().exp();
            chain.col(d - 1) = chain.col(d - 1).array().exp();
        }
        draws.param_names[static_cast<std::size_t>(d - 2)] = "sigma_theta";
        draws.param_names[static_cast<std::size_t>(d - 1)] = "sigma_beta";
    }
    return from_draws(std::move(draws));
}

} // namespace zib
