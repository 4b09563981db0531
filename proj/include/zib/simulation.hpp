#ifndef ZIB_SIMULATION_HPP
#define ZIB_SIMULATION_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "zib/fit.hpp"
#include "zib/mcmc.hpp"
#include "zib/model.hpp"
#include "zib/rng.hpp"

namespace zib {

enum class SimMode { covariate, nocovariate };

// One cell of the factorial simulation grid.
struct SimScenario {
    SimMode mode = SimMode::nocovariate;
    CoefVector true_coefs; // covariate mode
    ZibParams true_params{0.0, 0.0}; // no-covariate mode
    int n = 1500;
    int replicates = 100;
    std::uint64_t seed = 0;
    int threads = 1;
    PriorConfig prior{}; // prior used by the per-replicate fits

    void validate() const;
};

struct SimResult {
    SimScenario scenario;
    std::vector<std::string> param_names;
    std::vector<double> truth;
    std::vector<double> avg_median;
    std::vector<double> avg_q025;
    std::vector<double> avg_q975;
    std::vector<double> coverage95;
    int n_failed = 0;
};

// Covariate-mode generator: standard-normal covariates, latent Bernoulli
// exposure from the theta logit, outcome from the beta logit among exposed.
// Only y is observed; the latent exposure is discarded.
Dataset generate_zib_cov(const CoefVector& coefs, int n, Rng& rng);

// No-covariate generator: s ~ Binomial(n, omega * p).
SufficientStats generate_zib_nocov(const ZibParams& params, int n, Rng& rng);

// Runs all replicates of one scenario (analytic fit in no-covariate mode,
// MCMC in covariate mode), averages medians and interval endpoints, and
// records 95% coverage against the truth. Failed replicates are counted and
// excluded from the averages.
SimResult run_scenario(const SimScenario& scenario, const ChainConfig& fit_config);

struct CovGrid {
    std::vector<double> beta0, beta1, beta2;
    std::vector<double> theta0, theta1, theta2;
    std::vector<int> sizes;
    int replicates = 100;
    std::uint64_t seed = 0;
    int threads = 1;
    PriorConfig prior{};
};

struct NocovGrid {
    std::vector<double> omega, p;
    std::vector<int> sizes;
    int replicates = 100;
    std::uint64_t seed = 0;
    int threads = 1;
    PriorConfig prior{};
};

// Called after each completed cell with (result, cell index, cell count).
using GridProgress = std::function<void(const SimResult&, std::size_t, std::size_t)>;

// Cartesian products in deterministic grid order; each cell gets a seed
// derived from (grid seed, cell index).
std::vector<SimResult> run_grid(const CovGrid& grid, const ChainConfig& fit_config,
                                const GridProgress& progress = {});
std::vector<SimResult> run_grid(const NocovGrid& grid, const ChainConfig& fit_config,
                                const GridProgress& progress = {});

// CSV table mirroring the paper layout: one row per cell.
std::string sim_results_csv(const std::vector<SimResult>& results);

} // namespace zib

#endif // ZIB_SIMULATION_HPP
