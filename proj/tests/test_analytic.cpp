#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "zib/analytic.hpp"
#include "zib/rng.hpp"
#include "zib/specfun.hpp"

using namespace zib;

namespace {

// log of the exact 1-D integral of the joint kernel over the other
// parameter's box, by composite Simpson in log space
double log_marginal_oracle(const SufficientStats& st, double r_lo, double r_hi, double v,
                           long panels = 4096) {
    auto log_joint = [&](double other) {
        const double t = other * v;
        double l = 0.0;
        if (st.s > 0) l += static_cast<double>(st.s) * std::log(t);
        if (st.n > st.s) l += static_cast<double>(st.n - st.s) * std::log1p(-t);
        return l;
    };
    return oracles::log_simpson(log_joint, r_lo, r_hi, panels);
}

// max over a grid of |ratio - 1| between the implementation kernel and the
// oracle, after matching one global constant at the grid midpoint
double max_ratio_error(const SufficientStats& st, const PriorConfig& prior, ParamKind kind,
                       int grid_points = 101) {
    const bool is_omega = kind == ParamKind::omega;
    const double lo = is_omega ? prior.omega_lo : prior.p_lo;
    const double hi = is_omega ? prior.omega_hi : prior.p_hi;
    const double r_lo = is_omega ? prior.p_lo : prior.omega_lo;
    const double r_hi = is_omega ? prior.p_hi : prior.omega_hi;

    std::vector<double> impl(static_cast<std::size_t>(grid_points));
    std::vector<double> orac(static_cast<std::size_t>(grid_points));
    for (int i = 0; i < grid_points; ++i) {
        const double v = lo + (hi - lo) * (i + 0.5) / grid_points;
        impl[static_cast<std::size_t>(i)] =
            is_omega ? log_unnorm_marginal_omega(st, prior, v)
                     : log_unnorm_marginal_p(st, prior, v);
        orac[static_cast<std::size_t>(i)] = log_marginal_oracle(st, r_lo, r_hi, v);
    }
    const std::size_t mid = static_cast<std::size_t>(grid_points / 2);
    const double shift = impl[mid] - orac[mid];
    double worst = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        worst = std::max(worst, std::abs(std::expm1(impl[iu] - orac[iu] - shift)));
    }
    return worst;
}

} // namespace

TEST_CASE("unnormalized omega marginal closed forms") {
    const PriorConfig prior;
    // no data: flat kernel, value (p_hi - p_lo) F'(...) / 1 = 1/2 everywhere
    for (double w : {0.05, 0.3, 0.45}) {
        CHECK(unnorm_marginal_omega({0, 0}, prior, w) == doctest::Approx(0.5).epsilon(1e-10));
    }
    CHECK_THROWS_AS(unnorm_marginal_omega({0, 0}, prior, 0.0), std::domain_error);
    CHECK_THROWS_AS(unnorm_marginal_omega({0, 0}, prior, -0.2), std::domain_error);

    // all-ones data pushes omega up: strictly increasing kernel
    double prev = 0.0;
    for (int i = 1; i <= 60; ++i) {
        const double w = 0.5 * i / 60.0;
        const double v = unnorm_marginal_omega({10, 10}, prior, w);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("unnormalized p marginal closed forms") {
    const PriorConfig prior;
    for (double p : {0.55, 0.7, 0.95}) {
        CHECK(unnorm_marginal_p({0, 0}, prior, p) == doctest::Approx(0.5).epsilon(1e-10));
    }
    CHECK_THROWS_AS(unnorm_marginal_p({0, 0}, prior, 0.0), std::domain_error);

    // all-zeros data penalizes large p: strictly decreasing on [0.5, 1]
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 60; ++i) {
        const double p = 0.5 + 0.5 * i / 60.0;
        const double v = unnorm_marginal_p({5, 0}, prior, p);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("kernels match the quadrature oracle on the real-data stats") {
    const PriorConfig prior;
    const SufficientStats st{1564, 433};
    CHECK(max_ratio_error(st, prior, ParamKind::omega) <= 1e-6);
    CHECK(max_ratio_error(st, prior, ParamKind::p) <= 1e-6);
}

TEST_CASE("kernels match the quadrature oracle on a small lattice") {
    const PriorConfig prior;
    for (long n : {1, 3, 7, 20, 50}) {
        for (long s : {0L, n / 3, n}) {
            const SufficientStats st{n, s};
            CHECK(max_ratio_error(st, prior, ParamKind::omega, 41) <= 1e-6);
            CHECK(max_ratio_error(st, prior, ParamKind::p, 41) <= 1e-6);
        }
    }
}

TEST_CASE("kernels match the oracle under a non-default prior box") {
    PriorConfig prior;
    prior.omega_lo = 0.1;
    prior.omega_hi = 0.8;
    prior.p_lo = 0.2;
    prior.p_hi = 0.9;
    const SufficientStats st{120, 31};
    CHECK(max_ratio_error(st, prior, ParamKind::omega, 41) <= 1e-6);
    CHECK(max_ratio_error(st, prior, ParamKind::p, 41) <= 1e-6);
}

TEST_CASE("build_marginal recovers the prior with no data") {
    const PriorConfig prior;
    const MarginalPosterior mw = build_marginal({0, 0}, prior, ParamKind::omega);
    CHECK(mw.lo == 0.0);
    CHECK(mw.hi == 0.5);
    for (double v : {0.0, 0.1, 0.25, 0.49, 0.5}) {
        CHECK(mw.density_at(v) == doctest::Approx(2.0).epsilon(1e-9));
    }
    const MarginalPosterior mp = build_marginal({0, 0}, prior, ParamKind::p);
    for (double v : {0.5, 0.6, 0.99, 1.0}) {
        CHECK(mp.density_at(v) == doctest::Approx(2.0).epsilon(1e-9));
    }
    const PosteriorSummary s = summarize(mw);
    CHECK(s.median == doctest::Approx(0.25).epsilon(1e-7));
    CHECK(s.q025 == doctest::Approx(0.0125).epsilon(1e-6));
    CHECK(s.q975 == doctest::Approx(0.4875).epsilon(1e-6));
    CHECK(s.mean == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("build_marginal normalization and mode on the real-data stats") {
    const PriorConfig prior;
    const SufficientStats st{1564, 433};
    const MarginalPosterior mw = build_marginal(st, prior, ParamKind::omega);

    // density integrates to 1 (Simpson over the tabulated cells)
    double mass = 0.0;
    for (std::size_t i = 0; i + 2 < mw.x.size(); i += 2) {
        mass += (mw.x[i + 2] - mw.x[i]) *
                (mw.density[i] + 4.0 * mw.density[i + 1] + mw.density[i + 2]) / 6.0;
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));

    // mode inside the paper's interval
    std::size_t arg = 0;
    for (std::size_t i = 0; i < mw.density.size(); ++i) {
        if (mw.density[i] > mw.density[arg]) arg = i;
    }
    CHECK(mw.x[arg] > 0.27);
    CHECK(mw.x[arg] < 0.49);

    CHECK(mw.cdf_tab.front() == 0.0);
    CHECK(mw.cdf_tab.back() == 1.0);
    for (std::size_t i = 1; i < mw.cdf_tab.size(); ++i) {
        CHECK(mw.cdf_tab[i] >= mw.cdf_tab[i - 1]);
    }
}

TEST_CASE("tabulated CDF matches independent cumulative Simpson") {
    const PriorConfig prior;
    const SufficientStats st{20, 10};
    const MarginalPosterior mp = build_marginal(st, prior, ParamKind::p);

    auto log_kernel = [&](double p) { return log_unnorm_marginal_p(st, prior, p); };
    for (double v : {0.55, 0.625, 0.75, 0.9, 0.99}) {
        const double piece = std::exp(oracles::log_simpson(log_kernel, 0.5, v, 20000) -
                                      mp.log_norm_const);
        CHECK(mp.cdf(v) == doctest::Approx(piece).epsilon(1e-7));
    }
}

TEST_CASE("summaries reproduce the reported real-data estimates") {
    const PriorConfig prior;
    const SufficientStats st{1564, 433};
    const PosteriorSummary sw = summarize(build_marginal(st, prior, ParamKind::omega));
    CHECK(std::abs(sw.median - 0.37) <= 0.01);
    CHECK(std::abs(sw.q025 - 0.27) <= 0.01);
    CHECK(std::abs(sw.q975 - 0.49) <= 0.01);
    const PosteriorSummary sp = summarize(build_marginal(st, prior, ParamKind::p));
    CHECK(std::abs(sp.median - 0.74) <= 0.02);
    CHECK(std::abs(sp.q025 - 0.55) <= 0.02);
    CHECK(std::abs(sp.q975 - 0.99) <= 0.02);
}

TEST_CASE("quantile consistency") {
    const PriorConfig prior;
    for (const SufficientStats st : {SufficientStats{1564, 433}, SufficientStats{37, 5}}) {
        for (ParamKind kind : {ParamKind::omega, ParamKind::p}) {
            const MarginalPosterior m = build_marginal(st, prior, kind);
            const PosteriorSummary s = summarize(m);
            CHECK(m.cdf(s.median) == doctest::Approx(0.5).epsilon(1e-8));
            CHECK(m.cdf(s.q025) == doctest::Approx(0.025).epsilon(1e-6));
            CHECK(m.cdf(s.q975) == doctest::Approx(0.975).epsilon(1e-6));
            CHECK(s.q025 <= s.median);
            CHECK(s.median <= s.q975);
            CHECK(s.q025 >= m.lo);
            CHECK(s.q975 <= m.hi);
        }
    }
}

TEST_CASE("omega interval width shrinks with n") {
    // data at the expected count for truth (0.3, 0.8): binomial noise in s/n
    // would otherwise mask the small width decrease between large n
    const PriorConfig prior;
    std::vector<double> widths;
    for (long n : {500L, 5000L, 50000L}) {
        const SufficientStats st{n, std::lround(0.24 * static_cast<double>(n))};
        const PosteriorSummary s = summarize(build_marginal(st, prior, ParamKind::omega));
        widths.push_back(s.q975 - s.q025);
    }
    CHECK(widths[1] < widths[0]);
    CHECK(widths[2] < widths[1]);
}

TEST_CASE("density grids for plotting") {
    const PriorConfig prior;

    // no data: prior and posterior columns identical
    for (const auto& row : density_grids_for_plotting({0, 0}, prior)) {
        CHECK(row.posterior_density == doctest::Approx(row.prior_density).epsilon(1e-12));
    }

    const auto rows = density_grids_for_plotting({1564, 433}, prior);
    double tv = 0.0;        // total variation via trapezoid of |post - prior|
    double post_mass = 0.0; // trapezoid of the posterior column
    double prior_mass = 0.0;
    for (ParamKind kind : {ParamKind::omega, ParamKind::p}) {
        double tv_k = 0.0, post_k = 0.0, prior_k = 0.0;
        const DensityGridRow* prev = nullptr;
        for (const auto& row : rows) {
            CHECK(row.posterior_density >= 0.0);
            if (row.param != kind) continue;
            if (prev != nullptr) {
                const double h = row.value - prev->value;
                CHECK(h > 0.0);
                tv_k += 0.5 * h *
                        (std::abs(prev->posterior_density - prev->prior_density) +
                         std::abs(row.posterior_density - row.prior_density));
                post_k += 0.5 * h * (prev->posterior_density + row.posterior_density);
                prior_k += 0.5 * h * (prev->prior_density + row.prior_density);
            }
            prev = &row;
        }
        CHECK(post_k == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(prior_k == doctest::Approx(1.0).epsilon(1e-6));
        tv = std::max(tv, 0.5 * tv_k);
        post_mass = post_k;
        prior_mass = prior_k;
    }
    CHECK(tv > 0.1);
    (void)post_mass;
    (void)prior_mass;
}
