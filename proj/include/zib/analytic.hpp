#ifndef ZIB_ANALYTIC_HPP
#define ZIB_ANALYTIC_HPP

#include <vector>

#include "zib/model.hpp"

namespace zib {

enum class ParamKind { omega, p };

// Normalized marginal posterior of one parameter on its prior support,
// tabulated on an adaptively refined grid. Nodes at even indices are cell
// boundaries, odd indices are cell midpoints.
struct MarginalPosterior {
    ParamKind kind = ParamKind::omega;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> x;
    std::vector<double> density;
    std::vector<double> cdf_tab;
    double log_norm_const = 0.0;

    double norm_const() const;
    double density_at(double v) const;
    double cdf(double v) const;
    double quantile(double q) const;
};

// Unnormalized marginal kernels from the closed-form posterior: differences
// of the Beta(s+1, n-s+1) CDF over the substituted integration range,
// divided by the parameter value. Domain error at arguments <= 0.
double unnorm_marginal_omega(const SufficientStats& stats, const PriorConfig& prior,
                             double omega);
double unnorm_marginal_p(const SufficientStats& stats, const PriorConfig& prior, double p);
double log_unnorm_marginal_omega(const SufficientStats& stats, const PriorConfig& prior,
                                 double omega);
double log_unnorm_marginal_p(const SufficientStats& stats, const PriorConfig& prior,
                             double p);

MarginalPosterior build_marginal(const SufficientStats& stats, const PriorConfig& prior,
                                 ParamKind which);

PosteriorSummary summarize(const MarginalPosterior& marg);

struct DensityGridRow {
    ParamKind param;
    double value;
    double prior_density;
    double posterior_density;
};

// Aligned prior/posterior density columns over each support, dense enough
// that a trapezoid rule integrates each column to 1 within 1e-6.
std::vector<DensityGridRow> density_grids_for_plotting(const SufficientStats& stats,
                                                       const PriorConfig& prior);

} // namespace zib

#endif // ZIB_ANALYTIC_HPP
