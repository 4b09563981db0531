#include "zib/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>

#include "zib/specfun.hpp"

namespace zib {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kEdgeGuard = 1e-12; // removable 1/x singularity at the support edge

// log of the shared kernel [F(r_hi x) - F(r_lo x)] / x with F the
// Beta(s+1, n-s+1) CDF; (r_lo, r_hi) is the prior box of the other parameter.
double log_kernel(const SufficientStats& stats, double r_lo, double r_hi, double v) {
    const double ve = std::max(v, kEdgeGuard);
    const BetaShape shape(static_cast<double>(stats.s) + 1.0,
                          static_cast<double>(stats.n - stats.s) + 1.0);
    return log_reg_inc_beta_diff(r_lo * ve, r_hi * ve, shape) - std::log(ve);
}

struct Cell {
    double x0, x1;
    double f0, fm, f1;   // scaled kernel at ends and midpoint
    double fq1, fq3;     // quarter points
    double s1, s2, err;  // one- and two-panel Simpson, Richardson error
};

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) * (fa + 4.0 * fm + fb) / 6.0;
}

template <typename F>
Cell make_cell(double x0, double x1, double f0, double fm, double f1, const F& g) {
    Cell c;
    c.x0 = x0;
    c.x1 = x1;
    c.f0 = f0;
    c.fm = fm;
    c.f1 = f1;
    const double m = 0.5 * (x0 + x1);
    c.fq1 = g(0.5 * (x0 + m));
    c.fq3 = g(0.5 * (m + x1));
    c.s1 = simpson(x0, x1, f0, fm, f1);
    c.s2 = simpson(x0, m, f0, c.fq1, fm) + simpson(m, x1, fm, c.fq3, f1);
    c.err = (c.s2 - c.s1) / 15.0;
    return c;
}

} // namespace

double log_unnorm_marginal_omega(const SufficientStats& stats, const PriorConfig& prior,
                                 double omega) {
    stats.validate();
    prior.validate();
    if (!(omega > 0.0)) throw std::domain_error("unnorm_marginal_omega: omega must be > 0");
    return log_kernel(stats, prior.p_lo, prior.p_hi, omega);
}

double log_unnorm_marginal_p(const SufficientStats& stats, const PriorConfig& prior,
                             double p) {
    stats.validate();
    prior.validate();
    if (!(p > 0.0)) throw std::domain_error("unnorm_marginal_p: p must be > 0");
    return log_kernel(stats, prior.omega_lo, prior.omega_hi, p);
}

double unnorm_marginal_omega(const SufficientStats& stats, const PriorConfig& prior,
                             double omega) {
    return std::exp(log_unnorm_marginal_omega(stats, prior, omega));
}

double unnorm_marginal_p(const SufficientStats& stats, const PriorConfig& prior, double p) {
    return std::exp(log_unnorm_marginal_p(stats, prior, p));
}

double MarginalPosterior::norm_const() const {
    return std::exp(log_norm_const);
}

double MarginalPosterior::density_at(double v) const {
    if (v < lo || v > hi) return 0.0;
    const auto it = std::upper_bound(x.begin(), x.end(), v);
    if (it == x.begin()) return density.front();
    if (it == x.end()) return density.back();
    const auto j = static_cast<std::size_t>(it - x.begin());
    const double t = (v - x[j - 1]) / (x[j] - x[j - 1]);
    return density[j - 1] + t * (density[j] - density[j - 1]);
}

double MarginalPosterior::cdf(double v) const {
    if (v <= lo) return 0.0;
    if (v >= hi) return 1.0;
    const auto it = std::upper_bound(x.begin(), x.end(), v);
    if (it == x.begin()) return 0.0;
    if (it == x.end()) return 1.0;
    const auto j = static_cast<std::size_t>(it - x.begin());
    const double t = (v - x[j - 1]) / (x[j] - x[j - 1]);
    return cdf_tab[j - 1] + t * (cdf_tab[j] - cdf_tab[j - 1]);
}

double MarginalPosterior::quantile(double q) const {
    return invert_monotone([this](double v) { return cdf(v); }, q, lo, hi);
}

MarginalPosterior build_marginal(const SufficientStats& stats, const PriorConfig& prior,
                                 ParamKind which) {
    stats.validate();
    prior.validate();

    const bool is_omega = which == ParamKind::omega;
    const double lo = is_omega ? prior.omega_lo : prior.p_lo;
    const double hi = is_omega ? prior.omega_hi : prior.p_hi;
    const double r_lo = is_omega ? prior.p_lo : prior.omega_lo;
    const double r_hi = is_omega ? prior.p_hi : prior.omega_hi;

    auto logk = [&](double v) { return log_kernel(stats, r_lo, r_hi, std::max(v, kEdgeGuard)); };

    // scale by the grid maximum of the log kernel
    constexpr int kBaseCells = 2048;
    const double h = (hi - lo) / kBaseCells;
    std::vector<double> boundary_logk(kBaseCells + 1);
    std::vector<double> mid_logk(kBaseCells);
    double shift = kNegInf;
    for (int i = 0; i <= kBaseCells; ++i) {
        boundary_logk[static_cast<std::size_t>(i)] = logk(lo + i * h);
        shift = std::max(shift, boundary_logk[static_cast<std::size_t>(i)]);
    }
    for (int i = 0; i < kBaseCells; ++i) {
        mid_logk[static_cast<std::size_t>(i)] = logk(lo + (i + 0.5) * h);
        shift = std::max(shift, mid_logk[static_cast<std::size_t>(i)]);
    }
    if (shift == kNegInf) {
        throw QuadratureError("build_marginal: kernel vanished on the whole support", 0.0, 0.0);
    }
    auto g = [&](double v) {
        const double l = logk(v);
        return l == kNegInf ? 0.0 : std::exp(l - shift);
    };

    // normalization constant via adaptive quadrature at the spec tolerance,
    // run per base cell so sharp peaks are always sampled
    double z_scaled = 0.0;
    for (int i = 0; i < kBaseCells; ++i) {
        z_scaled += integrate(g, lo + i * h, (i == kBaseCells - 1) ? hi : lo + (i + 1) * h,
                              1e-10 / kBaseCells);
    }
    if (!(z_scaled > 0.0)) {
        throw QuadratureError("build_marginal: normalization constant is not positive",
                              z_scaled, 0.0);
    }

    // tabulation grid: 2048 uniform cells refined where the Simpson error
    // concentrates (near the mode) until the grid normalization is stable
    std::deque<Cell> cells;
    double z_grid = 0.0;
    double err_total = 0.0;
    for (int i = 0; i < kBaseCells; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        Cell c = make_cell(lo + i * h, lo + (i + 1) * h, std::exp(boundary_logk[iu] - shift),
                           std::exp(mid_logk[iu] - shift),
                           std::exp(boundary_logk[iu + 1] - shift), g);
        z_grid += c.s2;
        err_total += std::abs(c.err);
        cells.push_back(c);
    }

    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry> heap;
    for (std::size_t i = 0; i < cells.size(); ++i) heap.push({std::abs(cells[i].err), i});

    constexpr std::size_t kMaxCells = 1u << 16;
    const double target = 1e-10 * z_scaled;
    while (err_total > target && cells.size() < kMaxCells && !heap.empty()) {
        const auto [e, idx] = heap.top();
        heap.pop();
        if (e != std::abs(cells[idx].err) || e == 0.0) continue; // stale entry
        const Cell c = cells[idx];
        const double m = 0.5 * (c.x0 + c.x1);
        Cell left = make_cell(c.x0, m, c.f0, c.fq1, c.fm, g);
        Cell right = make_cell(m, c.x1, c.fm, c.fq3, c.f1, g);
        z_grid += left.s2 + right.s2 - c.s2;
        err_total += std::abs(left.err) + std::abs(right.err) - std::abs(c.err);
        cells[idx] = left;
        heap.push({std::abs(left.err), idx});
        cells.push_back(right);
        heap.push({std::abs(right.err), cells.size() - 1});
    }

    std::vector<Cell> ordered(cells.begin(), cells.end());
    std::sort(ordered.begin(), ordered.end(),
              [](const Cell& a, const Cell& b) { return a.x0 < b.x0; });

    MarginalPosterior marg;
    marg.kind = which;
    marg.lo = lo;
    marg.hi = hi;
    marg.log_norm_const = std::log(z_scaled) + shift;

    const std::size_t n_nodes = 2 * ordered.size() + 1;
    marg.x.reserve(n_nodes);
    marg.density.reserve(n_nodes);
    marg.cdf_tab.reserve(n_nodes);

    double cum = 0.0;
    for (const Cell& c : ordered) {
        const double m = 0.5 * (c.x0 + c.x1);
        marg.x.push_back(c.x0);
        marg.density.push_back(c.f0 / z_scaled);
        marg.cdf_tab.push_back(cum);
        cum += simpson(c.x0, m, c.f0, c.fq1, c.fm);
        marg.x.push_back(m);
        marg.density.push_back(c.fm / z_scaled);
        marg.cdf_tab.push_back(cum);
        cum += simpson(m, c.x1, c.fm, c.fq3, c.f1);
    }
    marg.x.push_back(hi);
    marg.density.push_back(ordered.back().f1 / z_scaled);
    marg.cdf_tab.push_back(cum);

    if (!(std::abs(cum / z_scaled - 1.0) <= 1e-8)) {
        throw QuadratureError("build_marginal: grid normalization disagrees with quadrature",
                              cum / z_scaled, std::abs(cum / z_scaled - 1.0));
    }
    for (double& v : marg.cdf_tab) v /= cum;
    marg.cdf_tab.front() = 0.0;
    marg.cdf_tab.back() = 1.0;
    return marg;
}

PosteriorSummary summarize(const MarginalPosterior& marg) {
    PosteriorSummary s;
    s.median = marg.quantile(0.5);
    s.q025 = marg.quantile(0.025);
    s.q975 = marg.quantile(0.975);
    // Simpson over the tabulated cells (odd nodes are midpoints)
    double mean = 0.0;
    for (std::size_t i = 0; i + 2 < marg.x.size(); i += 2) {
        mean += simpson(marg.x[i], marg.x[i + 2], marg.x[i] * marg.density[i],
                        marg.x[i + 1] * marg.density[i + 1],
                        marg.x[i + 2] * marg.density[i + 2]);
    }
    s.mean = mean;
    return s;
}

std::vector<DensityGridRow> density_grids_for_plotting(const SufficientStats& stats,
                                                       const PriorConfig& prior) {
    std::vector<DensityGridRow> rows;
    for (ParamKind kind : {ParamKind::omega, ParamKind::p}) {
        const MarginalPosterior marg = build_marginal(stats, prior, kind);
        const double prior_density = 1.0 / (marg.hi - marg.lo);
        const double z = std::exp(marg.log_norm_const);
        auto post = [&](double v) {
            return std::exp(log_kernel(stats,
                                       kind == ParamKind::omega ? prior.p_lo : prior.omega_lo,
                                       kind == ParamKind::omega ? prior.p_hi : prior.omega_hi,
                                       std::max(v, kEdgeGuard))) / z;
        };

        // refine for trapezoid accuracy: split cells until the summed
        // trapezoid-vs-Simpson discrepancy is far below 1e-6
        struct Seg { double x0, x1, f0, f1; };
        std::deque<Seg> work;
        for (std::size_t i = 0; i + 2 < marg.x.size(); i += 2) {
            work.push_back({marg.x[i], marg.x[i + 2], marg.density[i], marg.density[i + 2]});
        }
        std::vector<Seg> done;
        const double width = marg.hi - marg.lo;
        const double tol_total = 2e-8;
        while (!work.empty()) {
            Seg seg = work.front();
            work.pop_front();
            const double m = 0.5 * (seg.x0 + seg.x1);
            const double fm = post(m);
            const double diff = (seg.x1 - seg.x0) * std::abs(seg.f0 - 2.0 * fm + seg.f1) / 3.0;
            if (diff > tol_total * (seg.x1 - seg.x0) / width &&
                done.size() + work.size() < (1u << 16)) {
                work.push_back({seg.x0, m, seg.f0, fm});
                work.push_back({m, seg.x1, fm, seg.f1});
            } else {
                done.push_back(seg);
            }
        }
        std::sort(done.begin(), done.end(),
                  [](const Seg& a, const Seg& b) { return a.x0 < b.x0; });
        for (const Seg& seg : done) {
            rows.push_back({kind, seg.x0, prior_density, seg.f0});
        }
        rows.push_back({kind, done.back().x1, prior_density, done.back().f1});
    }
    return rows;
}

} // namespace zib
