#include "zib/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "zib/parallel.hpp"
#include "zib/rng.hpp"

namespace zib {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double transform_one(double x, const Support& s) {
    if (s.bounded_below() && s.bounded_above()) {
        if (!(x > s.lo && x < s.hi)) {
            throw std::domain_error("to_unconstrained: value on or outside the support boundary");
        }
        return logit((x - s.lo) / (s.hi - s.lo));
    }
    if (s.bounded_below()) {
        if (!(x > s.lo)) throw std::domain_error("to_unconstrained: value at the lower bound");
        return std::log(x - s.lo);
    }
    if (s.bounded_above()) {
        if (!(x < s.hi)) throw std::domain_error("to_unconstrained: value at the upper bound");
        return std::log(s.hi - x);
    }
    return x;
}

double back_one(double u, const Support& s) {
    if (s.bounded_below() && s.bounded_above()) return s.lo + (s.hi - s.lo) * inv_logit(u);
    if (s.bounded_below()) return s.lo + std::exp(u);
    if (s.bounded_above()) return s.hi - std::exp(u);
    return u;
}

double log_jacobian_one(double u, const Support& s) {
    if (s.bounded_below() && s.bounded_above()) {
        return std::log(s.hi - s.lo) + log_sigmoid(u) + log_sigmoid(-u);
    }
    if (s.bounded_below() || s.bounded_above()) return u;
    return 0.0;
}

// type-7 quantile (linear interpolation between closest order statistics)
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = q * static_cast<double>(n - 1);
    const auto j = static_cast<std::size_t>(std::floor(h));
    if (j + 1 >= n) return sorted[n - 1];
    const double w = h - static_cast<double>(j);
    return sorted[j] + w * (sorted[j + 1] - sorted[j]);
}

struct ChainResult {
    Eigen::MatrixXd draws;
    double accept_rate = 0.0;
    bool frozen_ok = true;
    Eigen::MatrixXd proposal_cov;
};

// Curvature-based starting covariance: inverse negated finite-difference
// Hessian of the unconstrained target at the initialization point. Falls
// back to the identity when the Hessian is not negative definite there.
Eigen::MatrixXd initial_proposal_cov(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& u0) {
    const auto d = u0.size();
    const double h = 1e-3;
    Eigen::MatrixXd hess(d, d);
    const double f0 = f(u0);
    if (!std::isfinite(f0)) return Eigen::MatrixXd::Identity(d, d);

    Eigen::VectorXd x = u0;
    for (Eigen::Index i = 0; i < d; ++i) {
        x(i) = u0(i) + h;
        const double fp = f(x);
        x(i) = u0(i) - h;
        const double fm = f(x);
        x(i) = u0(i);
        hess(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i + 1; j < d; ++j) {
            x(i) = u0(i) + h;
            x(j) = u0(j) + h;
            const double fpp = f(x);
            x(j) = u0(j) - h;
            const double fpm = f(x);
            x(i) = u0(i) - h;
            const double fmm = f(x);
            x(j) = u0(j) + h;
            const double fmp = f(x);
            x(i) = u0(i);
            x(j) = u0(j);
            hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        }
    }
    if (!hess.allFinite()) return Eigen::MatrixXd::Identity(d, d);
    Eigen::LLT<Eigen::MatrixXd> llt(-hess);
    if (llt.info() != Eigen::Success) return Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(d, d));
    if (!cov.allFinite()) return Eigen::MatrixXd::Identity(d, d);
    return cov;
}

ChainResult run_chain(const LogDensity& target, const std::vector<Support>& supports,
                      const ChainConfig& cfg, int chain_index,
                      const std::optional<Eigen::VectorXd>& init,
                      const Eigen::MatrixXd& start_cov) {
    const auto d = static_cast<Eigen::Index>(supports.size());
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(chain_index)));

    auto log_post_u = [&](const Eigen::VectorXd& u) {
        const Eigen::VectorXd x = from_unconstrained(u, supports);
        const double lt = target(x);
        if (!std::isfinite(lt)) return kNegInf;
        return lt + log_jacobian_from_unconstrained(u, supports);
    };

    // initial point: supplied init or support midpoints, jittered per chain
    Eigen::VectorXd u_base(d);
    if (init) {
        u_base = to_unconstrained(*init, supports);
    } else {
        for (Eigen::Index j = 0; j < d; ++j) u_base(j) = 0.0;
    }
    Eigen::VectorXd u(d);
    double lp = kNegInf;
    bool ok = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
        for (Eigen::Index j = 0; j < d; ++j) u(j) = u_base(j) + cfg.init_jitter * rng.normal();
        lp = log_post_u(u);
        if (std::isfinite(lp)) {
            ok = true;
            break;
        }
    }
    if (!ok) {
        throw std::runtime_error("sample: chain initialization failed after 100 jittered attempts");
    }

    const double base_scale = 2.38 / std::sqrt(static_cast<double>(d));
    double log_step = 0.0;

    // running moments for Haario-style covariance adaptation
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(d, d);
    long count = 0;
    const long settle = std::min<long>(100, cfg.warmup / 4);
    const long adapt_start = std::max<long>(50, 5 * d);

    Eigen::MatrixXd prop_cov = start_cov;
    Eigen::MatrixXd chol = Eigen::MatrixXd::Identity(d, d);

    auto refresh_chol = [&]() {
        Eigen::LLT<Eigen::MatrixXd> llt(prop_cov);
        if (llt.info() == Eigen::Success) {
            chol = llt.matrixL();
        }
    };
    refresh_chol();

    Eigen::VectorXd z(d), u_prop(d);
    auto one_step = [&](double step) -> bool {
        for (Eigen::Index j = 0; j < d; ++j) z(j) = rng.normal();
        u_prop = u + step * (chol * z);
        const double lp_prop = log_post_u(u_prop);
        bool accept = false;
        if (lp_prop >= lp) {
            accept = true;
        } else {
            accept = rng.uniform() < std::exp(lp_prop - lp);
        }
        if (accept) {
            u = u_prop;
            lp = lp_prop;
        }
        return accept;
    };

    for (int it = 0; it < cfg.warmup; ++it) {
        const double step = base_scale * std::exp(log_step);
        const bool accepted = one_step(step);
        // acceptance-targeting step size, vanishing adaptation
        const double gamma = 1.0 / std::pow(static_cast<double>(it) + 10.0, 0.7);
        log_step += gamma * ((accepted ? 1.0 : 0.0) - cfg.target_accept);

        if (it < settle) continue; // let the chain leave the jittered start first
        ++count;
        const Eigen::VectorXd delta = u - mean;
        mean += delta / static_cast<double>(count);
        m2.noalias() += delta * (u - mean).transpose();
        if (count > adapt_start) {
            prop_cov = m2 / static_cast<double>(count - 1);
            const double floor = 1e-10 * (prop_cov.trace() / static_cast<double>(d)) + 1e-12;
            prop_cov.diagonal().array() += floor;
            refresh_chol();
        }
    }

    const double frozen_step = base_scale * std::exp(log_step);
    const Eigen::MatrixXd frozen_chol = chol;
    ChainResult result;
    result.proposal_cov = frozen_step * frozen_step * (chol * chol.transpose());
    result.draws.resize(cfg.iterations, d);

    long accepts = 0;
    for (int it = 0; it < cfg.iterations; ++it) {
        if (one_step(frozen_step)) ++accepts;
        result.draws.row(it) = from_unconstrained(u, supports).transpose();
        if ((it & 255) == 0 && chol != frozen_chol) result.frozen_ok = false;
    }
    if (chol != frozen_chol) result.frozen_ok = false;
    result.accept_rate = static_cast<double>(accepts) / static_cast<double>(cfg.iterations);
    return result;
}

} // namespace

void ChainConfig::validate() const {
    if (n_chains < 1) throw std::invalid_argument("ChainConfig: n_chains must be >= 1");
    if (iterations < 1) throw std::invalid_argument("ChainConfig: iterations must be >= 1");
    if (warmup < 100) throw std::invalid_argument("ChainConfig: warmup must be >= 100");
    if (!(target_accept > 0.0 && target_accept < 1.0)) {
        throw std::invalid_argument("ChainConfig: target_accept must lie in (0, 1)");
    }
    if (!(init_jitter > 0.0)) throw std::invalid_argument("ChainConfig: init_jitter must be > 0");
}

Eigen::VectorXd ChainDraws::pooled(Eigen::Index param) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(chains.size()) * iterations());
    Eigen::Index pos = 0;
    for (const auto& chain : chains) {
        out.segment(pos, chain.rows()) = chain.col(param);
        pos += chain.rows();
    }
    return out;
}

double Diagnostics::max_rhat() const {
    double m = 1.0;
    for (double r : rhat) m = std::max(m, r);
    return m;
}

double Diagnostics::min_ess() const {
    double m = std::numeric_limits<double>::infinity();
    for (double e : ess) m = std::min(m, e);
    return m;
}

Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& x, const std::vector<Support>& supports) {
    if (static_cast<std::size_t>(x.size()) != supports.size()) {
        throw std::invalid_argument("to_unconstrained: dimension mismatch");
    }
    Eigen::VectorXd u(x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        u(j) = transform_one(x(j), supports[static_cast<std::size_t>(j)]);
    }
    return u;
}

Eigen::VectorXd from_unconstrained(const Eigen::VectorXd& u, const std::vector<Support>& supports) {
    if (static_cast<std::size_t>(u.size()) != supports.size()) {
        throw std::invalid_argument("from_unconstrained: dimension mismatch");
    }
    Eigen::VectorXd x(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        x(j) = back_one(u(j), supports[static_cast<std::size_t>(j)]);
    }
    return x;
}

double log_jacobian_from_unconstrained(const Eigen::VectorXd& u,
                                       const std::vector<Support>& supports) {
    double lj = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        lj += log_jacobian_one(u(j), supports[static_cast<std::size_t>(j)]);
    }
    return lj;
}

ChainDraws sample(const LogDensity& target_log_density, const std::vector<Support>& supports,
                  const std::vector<std::string>& param_names, const ChainConfig& config,
                  const std::optional<Eigen::VectorXd>& init) {
    config.validate();
    if (supports.empty()) throw std::invalid_argument("sample: empty support list");
    if (param_names.size() != supports.size()) {
        throw std::invalid_argument("sample: param_names and supports differ in length");
    }

    ChainDraws out;
    out.param_names = param_names;
    out.chains.resize(static_cast<std::size_t>(config.n_chains));
    out.accept_rate.resize(static_cast<std::size_t>(config.n_chains));
    out.adaptation_frozen.resize(static_cast<std::size_t>(config.n_chains));
    out.proposal_cov.resize(static_cast<std::size_t>(config.n_chains));

    // shared curvature-based starting covariance, computed at the common
    // initialization point before per-chain jitter
    auto log_post_u = [&](const Eigen::VectorXd& u) {
        const Eigen::VectorXd x = from_unconstrained(u, supports);
        const double lt = target_log_density(x);
        if (!std::isfinite(lt)) return kNegInf;
        return lt + log_jacobian_from_unconstrained(u, supports);
    };
    Eigen::VectorXd u_base = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(supports.size()));
    if (init) u_base = to_unconstrained(*init, supports);
    const Eigen::MatrixXd start_cov = initial_proposal_cov(log_post_u, u_base);

    parallel_for(config.n_chains, config.threads, [&](int c) {
        ChainResult r = run_chain(target_log_density, supports, config, c, init, start_cov);
        const auto cu = static_cast<std::size_t>(c);
        out.chains[cu] = std::move(r.draws);
        out.accept_rate[cu] = r.accept_rate;
        out.adaptation_frozen[cu] = r.frozen_ok;
        out.proposal_cov[cu] = std::move(r.proposal_cov);
    });
    return out;
}

Diagnostics diagnose(const ChainDraws& draws) {
    if (draws.n_chains() < 2) throw std::invalid_argument("diagnose: needs >= 2 chains");
    if (draws.iterations() < 4) throw std::invalid_argument("diagnose: needs >= 4 draws per chain");

    const auto n_params = draws.n_params();
    const auto half = draws.iterations() / 2;
    const int m = 2 * draws.n_chains(); // split sequences
    const auto len = half;

    Diagnostics diag;
    diag.rhat.resize(static_cast<std::size_t>(n_params));
    diag.ess.resize(static_cast<std::size_t>(n_params));
    diag.constant_param.resize(static_cast<std::size_t>(n_params));
    diag.divergent_or_stuck.resize(static_cast<std::size_t>(draws.n_chains()));

    for (int c = 0; c < draws.n_chains(); ++c) {
        const double a = draws.accept_rate[static_cast<std::size_t>(c)];
        diag.divergent_or_stuck[static_cast<std::size_t>(c)] = a < 0.05 || a > 0.95;
    }

    std::vector<Eigen::VectorXd> seqs(static_cast<std::size_t>(m));
    for (Eigen::Index p = 0; p < n_params; ++p) {
        for (int c = 0; c < draws.n_chains(); ++c) {
            const auto& chain = draws.chains[static_cast<std::size_t>(c)];
            seqs[static_cast<std::size_t>(2 * c)] = chain.col(p).head(len);
            seqs[static_cast<std::size_t>(2 * c + 1)] = chain.col(p).tail(len);
        }
        Eigen::VectorXd means(m), vars(m);
        for (int j = 0; j < m; ++j) {
            const auto& s = seqs[static_cast<std::size_t>(j)];
            means(j) = s.mean();
            vars(j) = (s.array() - means(j)).square().sum() / static_cast<double>(len - 1);
        }
        const double w = vars.mean();
        const double grand = means.mean();
        const double b = static_cast<double>(len) *
                         (means.array() - grand).square().sum() / static_cast<double>(m - 1);

        const auto pu = static_cast<std::size_t>(p);
        if (w == 0.0 && b == 0.0) {
            diag.rhat[pu] = 1.0;
            diag.ess[pu] = static_cast<double>(m) * static_cast<double>(len);
            diag.constant_param[pu] = true;
            continue;
        }
        diag.constant_param[pu] = false;
        const double var_plus =
            (static_cast<double>(len - 1) / static_cast<double>(len)) * w +
            b / static_cast<double>(len);
        diag.rhat[pu] = w > 0.0 ? std::sqrt(var_plus / w)
                                : std::numeric_limits<double>::infinity();

        // ESS via initial positive (and monotone) sequence of paired
        // autocorrelations on the split chains
        auto mean_autocov = [&](Eigen::Index t) {
            double acc = 0.0;
            for (int j = 0; j < m; ++j) {
                const auto& s = seqs[static_cast<std::size_t>(j)];
                double g = 0.0;
                for (Eigen::Index i = 0; i + t < len; ++i) {
                    g += (s(i) - means(j)) * (s(i + t) - means(j));
                }
                acc += g / static_cast<double>(len);
            }
            return acc / static_cast<double>(m);
        };

        auto rho = [&](Eigen::Index t) { return 1.0 - (w - mean_autocov(t)) / var_plus; };

        double tau = -1.0;
        double prev_pair = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t + 1 < len; t += 2) {
            double pair = rho(t) + rho(t + 1);
            if (pair <= 0.0) break;
            pair = std::min(pair, prev_pair);
            prev_pair = pair;
            tau += 2.0 * pair;
        }
        tau = std::max(tau, 1.0 / static_cast<double>(m * len));
        diag.ess[pu] = static_cast<double>(m) * static_cast<double>(len) / tau;
    }
    return diag;
}

std::vector<PosteriorSummary> summarize_draws(const ChainDraws& draws) {
    if (draws.n_chains() == 0 || draws.iterations() == 0) {
        throw std::invalid_argument("summarize_draws: empty draws");
    }
    std::vector<PosteriorSummary> out(static_cast<std::size_t>(draws.n_params()));
    for (Eigen::Index p = 0; p < draws.n_params(); ++p) {
        const Eigen::VectorXd pool = draws.pooled(p);
        std::vector<double> sorted(pool.data(), pool.data() + pool.size());
        std::sort(sorted.begin(), sorted.end());
        auto& s = out[static_cast<std::size_t>(p)];
        s.median = quantile_sorted(sorted, 0.5);
        s.q025 = quantile_sorted(sorted, 0.025);
        s.q975 = quantile_sorted(sorted, 0.975);
        s.mean = pool.mean();
    }
    return out;
}

MapResult find_map(const std::function<double(const Eigen::VectorXd&)>& f,
                   const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                   Eigen::VectorXd x0, int max_steps, double tol) {
    MapResult res;
    Eigen::VectorXd x = std::move(x0);
    double fx = f(x);
    Eigen::VectorXd g = grad(x);
    double step = 1.0 / std::max(1.0, g.norm());

    int it = 0;
    for (; it < max_steps; ++it) {
        const double gnorm = g.template lpNorm<Eigen::Infinity>();
        if (gnorm < tol) {
            res.converged = true;
            break;
        }
        // backtracking line search along the gradient
        double alpha = step;
        const double g2 = g.squaredNorm();
        Eigen::VectorXd x_new;
        double f_new = -std::numeric_limits<double>::infinity();
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + alpha * g;
            f_new = f(x_new);
            if (std::isfinite(f_new) && f_new >= fx + 1e-4 * alpha * g2) {
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) break;
        const Eigen::VectorXd g_new = grad(x_new);
        // Barzilai-Borwein step for the next iteration
        const Eigen::VectorXd dx = x_new - x;
        const Eigen::VectorXd dg = g_new - g;
        const double denom = -dx.dot(dg);
        step = denom > 0.0 ? dx.squaredNorm() / denom : alpha * 2.0;
        if (!(std::isfinite(step) && step > 0.0)) step = alpha;
        x = std::move(x_new);
        fx = f_new;
        g = g_new;
    }
    res.x = std::move(x);
    res.value = fx;
    res.grad_norm = g.template lpNorm<Eigen::Infinity>();
    res.iterations = it;
    if (res.grad_norm < tol) res.converged = true;
    return res;
}

} // namespace zib
