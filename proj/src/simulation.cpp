#include "zib/simulation.hpp"

#include <charconv>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "zib/parallel.hpp"

namespace zib {

namespace {

std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct ReplicateOutcome {
    bool failed = true;
    std::vector<PosteriorSummary> summaries;
};

} // namespace

void SimScenario::validate() const {
    if (n < 1) throw std::invalid_argument("SimScenario: n must be >= 1");
    if (replicates < 1) throw std::invalid_argument("SimScenario: replicates must be >= 1");
    if (mode == SimMode::nocovariate) {
        if (!(true_params.omega >= 0.0 && true_params.omega <= 1.0 &&
              true_params.p >= 0.0 && true_params.p <= 1.0)) {
            throw std::invalid_argument("SimScenario: omega and p must lie in [0, 1]");
        }
    } else {
        if (true_coefs.theta.size() < 1 || true_coefs.beta.size() < 1) {
            throw std::invalid_argument("SimScenario: covariate mode needs intercepts in both blocks");
        }
    }
}

Dataset generate_zib_cov(const CoefVector& coefs, int n, Rng& rng) {
    const auto k = coefs.theta.size() - 1;
    const auto q = coefs.beta.size() - 1;
    Dataset data;
    data.y.resize(static_cast<std::size_t>(n));
    data.X.resize(n, k);
    data.Z.resize(n, q);
    for (Eigen::Index j = 0; j < k; ++j) data.x_names.push_back("x" + std::to_string(j + 1));
    for (Eigen::Index j = 0; j < q; ++j) data.z_names.push_back("x" + std::to_string(k + j + 1));

    for (int i = 0; i < n; ++i) {
        double eta_w = coefs.theta(0);
        for (Eigen::Index j = 0; j < k; ++j) {
            const double v = rng.normal();
            data.X(i, j) = v;
            eta_w += coefs.theta(j + 1) * v;
        }
        double eta_p = coefs.beta(0);
        for (Eigen::Index j = 0; j < q; ++j) {
            const double v = rng.normal();
            data.Z(i, j) = v;
            eta_p += coefs.beta(j + 1) * v;
        }
        // outcome draw happens unconditionally to keep the stream aligned
        const bool exposed = rng.bernoulli(inv_logit(eta_w));
        const bool event = rng.bernoulli(inv_logit(eta_p));
        data.y[static_cast<std::size_t>(i)] = (exposed && event) ? 1 : 0;
    }
    return data;
}

SufficientStats generate_zib_nocov(const ZibParams& params, int n, Rng& rng) {
    SufficientStats st;
    st.n = n;
    st.s = rng.binomial(n, params.omega * params.p);
    return st;
}

SimResult run_scenario(const SimScenario& scenario, const ChainConfig& fit_config) {
    scenario.validate();

    SimResult result;
    result.scenario = scenario;
    if (scenario.mode == SimMode::nocovariate) {
        result.param_names = {"omega", "p"};
        result.truth = {scenario.true_params.omega, scenario.true_params.p};
    } else {
        for (Eigen::Index j = 0; j < scenario.true_coefs.theta.size(); ++j) {
            result.param_names.push_back("theta" + std::to_string(j));
            result.truth.push_back(scenario.true_coefs.theta(j));
        }
        for (Eigen::Index j = 0; j < scenario.true_coefs.beta.size(); ++j) {
            result.param_names.push_back("beta" + std::to_string(j));
            result.truth.push_back(scenario.true_coefs.beta(j));
        }
    }
    const std::size_t n_params = result.param_names.size();

    std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(scenario.replicates));
    parallel_for(scenario.replicates, scenario.threads, [&](int r) {
        auto& out = outcomes[static_cast<std::size_t>(r)];
        Rng data_rng(derive_seed(scenario.seed, 2 * static_cast<std::uint64_t>(r)));
        try {
            if (scenario.mode == SimMode::nocovariate) {
                const SufficientStats stats =
                    generate_zib_nocov(scenario.true_params, scenario.n, data_rng);
                const FitResult fit = fit_analytic_nocov(stats, scenario.prior);
                for (const auto& p : fit.params) out.summaries.push_back(p.summary);
                out.failed = false;
            } else {
                const Dataset data = generate_zib_cov(scenario.true_coefs, scenario.n, data_rng);
                ChainConfig cfg = fit_config;
                cfg.seed = derive_seed(scenario.seed, 2 * static_cast<std::uint64_t>(r) + 1);
                cfg.threads = 1;
                const FitResult fit = fit_mcmc_cov(data, scenario.prior, cfg);
                if (!fit.converged) {
                    std::cerr << "warning: replicate " << r
                              << " flagged non-converged (max rhat " << fit.max_rhat
                              << "), excluded from averages\n";
                } else {
                    for (const auto& p : fit.params) out.summaries.push_back(p.summary);
                    out.failed = false;
                }
            }
        } catch (const std::exception& e) {
            std::cerr << "warning: replicate " << r << " failed (" << e.what()
                      << "), excluded from averages\n";
        }
    });

    result.avg_median.assign(n_params, 0.0);
    result.avg_q025.assign(n_params, 0.0);
    result.avg_q975.assign(n_params, 0.0);
    result.coverage95.assign(n_params, 0.0);
    int ok = 0;
    for (const auto& out : outcomes) {
        if (out.failed) {
            ++result.n_failed;
            continue;
        }
        ++ok;
        for (std::size_t p = 0; p < n_params; ++p) {
            result.avg_median[p] += out.summaries[p].median;
            result.avg_q025[p] += out.summaries[p].q025;
            result.avg_q975[p] += out.summaries[p].q975;
            if (out.summaries[p].q025 <= result.truth[p] && result.truth[p] <= out.summaries[p].q975) {
                result.coverage95[p] += 1.0;
            }
        }
    }
    if (ok > 0) {
        for (std::size_t p = 0; p < n_params; ++p) {
            result.avg_median[p] /= ok;
            result.avg_q025[p] /= ok;
            result.avg_q975[p] /= ok;
            result.coverage95[p] /= ok;
        }
    }
    return result;
}

std::vector<SimResult> run_grid(const CovGrid& grid, const ChainConfig& fit_config,
                                const GridProgress& progress) {
    for (const auto* values : {&grid.beta0, &grid.beta1, &grid.beta2, &grid.theta0,
                               &grid.theta1, &grid.theta2}) {
        if (values->empty()) throw std::invalid_argument("run_grid: empty parameter value list");
    }
    if (grid.sizes.empty()) throw std::invalid_argument("run_grid: empty sample size list");

    std::vector<SimScenario> cells;
    std::uint64_t cell = 0;
    for (int n : grid.sizes) {
        for (double b0 : grid.beta0)
            for (double b1 : grid.beta1)
                for (double b2 : grid.beta2)
                    for (double t0 : grid.theta0)
                        for (double t1 : grid.theta1)
                            for (double t2 : grid.theta2) {
                                SimScenario sc;
                                sc.mode = SimMode::covariate;
                                sc.true_coefs.theta = Eigen::Vector3d(t0, t1, t2);
                                sc.true_coefs.beta = Eigen::Vector3d(b0, b1, b2);
                                sc.n = n;
                                sc.replicates = grid.replicates;
                                sc.seed = derive_seed(grid.seed, cell++);
                                sc.threads = grid.threads;
                                sc.prior = grid.prior;
                                cells.push_back(sc);
                            }
    }
    std::vector<SimResult> results;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        results.push_back(run_scenario(cells[i], fit_config));
        if (progress) progress(results.back(), i, cells.size());
    }
    return results;
}

std::vector<SimResult> run_grid(const NocovGrid& grid, const ChainConfig& fit_config,
                                const GridProgress& progress) {
    if (grid.omega.empty() || grid.p.empty()) {
        throw std::invalid_argument("run_grid: empty parameter value list");
    }
    if (grid.sizes.empty()) throw std::invalid_argument("run_grid: empty sample size list");

    std::vector<SimScenario> cells;
    std::uint64_t cell = 0;
    for (int n : grid.sizes) {
        for (double omega : grid.omega)
            for (double p : grid.p) {
                SimScenario sc;
                sc.mode = SimMode::nocovariate;
                sc.true_params = {omega, p};
                sc.n = n;
                sc.replicates = grid.replicates;
                sc.seed = derive_seed(grid.seed, cell++);
                sc.threads = grid.threads;
                sc.prior = grid.prior;
                cells.push_back(sc);
            }
    }
    std::vector<SimResult> results;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        results.push_back(run_scenario(cells[i], fit_config));
        if (progress) progress(results.back(), i, cells.size());
    }
    return results;
}

std::string sim_results_csv(const std::vector<SimResult>& results) {
    if (results.empty()) throw std::invalid_argument("sim_results_csv: no results");
    const auto& names = results.front().param_names;

    std::ostringstream os;
    os << "mode,n,replicates";
    for (const auto& p : names) os << ",true_" << p;
    for (const auto& p : names) os << "," << p << "_avg_median";
    for (const auto& p : names) os << "," << p << "_avg_q025";
    for (const auto& p : names) os << "," << p << "_avg_q975";
    for (const auto& p : names) os << "," << p << "_coverage95";
    os << ",n_failed\n";

    for (const auto& r : results) {
        if (r.param_names != names) {
            throw std::invalid_argument("sim_results_csv: mixed grids in one table");
        }
        os << (r.scenario.mode == SimMode::covariate ? "covariate" : "nocovariate");
        os << ',' << r.scenario.n << ',' << r.scenario.replicates;
        for (double v : r.truth) os << ',' << fmt_double(v);
        for (double v : r.avg_median) os << ',' << fmt_double(v);
        for (double v : r.avg_q025) os << ',' << fmt_double(v);
        for (double v : r.avg_q975) os << ',' << fmt_double(v);
        for (double v : r.coverage95) os << ',' << fmt_double(v);
        os << ',' << r.n_failed << '\n';
    }
    return os.str();
}

} // namespace zib
