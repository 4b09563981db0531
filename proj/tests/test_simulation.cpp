#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "zib/simulation.hpp"

using namespace zib;

namespace {

CoefVector paper_coefs() {
    CoefVector c;
    c.theta = Eigen::Vector3d(-0.5, -2.0, -3.0);
    c.beta = Eigen::Vector3d(0.5, 2.0, 3.0);
    return c;
}

} // namespace

TEST_CASE("generator saturates at extreme logits") {
    Rng rng(1);
    CoefVector all_on;
    all_on.theta = Eigen::Vector3d(50.0, 0.0, 0.0);
    all_on.beta = Eigen::Vector3d(50.0, 0.0, 0.0);
    const Dataset d = generate_zib_cov(all_on, 500, rng);
    for (int v : d.y) CHECK(v == 1);

    Rng rng2(2);
    CoefVector nobody;
    nobody.theta = Eigen::Vector3d(-50.0, 0.0, 0.0);
    nobody.beta = Eigen::Vector3d(0.5, 2.0, 3.0);
    const Dataset d2 = generate_zib_cov(nobody, 500, rng2);
    for (int v : d2.y) CHECK(v == 0);
}

TEST_CASE("generator matches a Monte Carlo integral of P(Y=1)") {
    const CoefVector coefs = paper_coefs();
    const int n = 1000000;
    Rng gen_rng(33);
    const Dataset d = generate_zib_cov(coefs, n, gen_rng);
    double y_bar = 0.0;
    for (int v : d.y) y_bar += v;
    y_bar /= n;

    // independent stream and independent formula: E[sigma(theta'x) sigma(beta'z)]
    Rng mc_rng(77001);
    double expected = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ew = coefs.theta(0) + coefs.theta(1) * mc_rng.normal() +
                          coefs.theta(2) * mc_rng.normal();
        const double ep = coefs.beta(0) + coefs.beta(1) * mc_rng.normal() +
                          coefs.beta(2) * mc_rng.normal();
        expected += inv_logit(ew) * inv_logit(ep);
    }
    expected /= n;
    CHECK(std::abs(y_bar - expected) <= 0.003);
}

TEST_CASE("generator dataset shape and names") {
    Rng rng(4);
    const Dataset d = generate_zib_cov(paper_coefs(), 50, rng);
    CHECK(d.n() == 50);
    CHECK(d.k() == 2);
    CHECK(d.q() == 2);
    CHECK(d.x_names == std::vector<std::string>{"x1", "x2"});
    CHECK(d.z_names == std::vector<std::string>{"x3", "x4"});
    CHECK_NOTHROW(d.validate());
}

TEST_CASE("no-covariate generator") {
    Rng rng(5);
    CHECK(generate_zib_nocov({0.0, 0.7}, 100, rng).s == 0);
    CHECK(generate_zib_nocov({1.0, 1.0}, 100, rng).s == 100);
    const SufficientStats st = generate_zib_nocov({0.4, 0.9}, 1000000, rng);
    CHECK(std::abs(static_cast<double>(st.s) / 1e6 - 0.36) <= 0.002);
}

TEST_CASE("no-covariate scenario reproduces the paper's table row") {
    SimScenario sc;
    sc.mode = SimMode::nocovariate;
    sc.true_params = {0.3, 0.8};
    sc.n = 1500;
    sc.replicates = 20;
    sc.seed = 7;
    const SimResult r = run_scenario(sc, ChainConfig{});
    REQUIRE(r.n_failed == 0);
    CHECK(std::abs(r.avg_median[0] - 0.36) <= 0.05);
    CHECK(std::abs(r.avg_median[1] - 0.72) <= 0.05);
    CHECK(std::abs(r.avg_q025[0] - 0.26) <= 0.06);
    CHECK(std::abs(r.avg_q975[0] - 0.49) <= 0.06);
    CHECK(std::abs(r.avg_q025[1] - 0.52) <= 0.06);
    CHECK(std::abs(r.avg_q975[1] - 0.98) <= 0.06);
    for (std::size_t p = 0; p < 2; ++p) {
        CHECK(r.avg_q025[p] <= r.avg_median[p]);
        CHECK(r.avg_median[p] <= r.avg_q975[p]);
        CHECK(r.coverage95[p] >= 0.0);
        CHECK(r.coverage95[p] <= 1.0);
    }
}

TEST_CASE("scenario results are deterministic") {
    SimScenario sc;
    sc.mode = SimMode::nocovariate;
    sc.true_params = {0.2, 0.7};
    sc.n = 400;
    sc.replicates = 1;
    sc.seed = 99;
    const SimResult a = run_scenario(sc, ChainConfig{});
    const SimResult b = run_scenario(sc, ChainConfig{});
    CHECK(a.avg_median == b.avg_median);
    CHECK(a.avg_q025 == b.avg_q025);
    CHECK(a.avg_q975 == b.avg_q975);

    sc.replicates = 8;
    sc.threads = 1;
    const SimResult c1 = run_scenario(sc, ChainConfig{});
    sc.threads = 2;
    const SimResult c2 = run_scenario(sc, ChainConfig{});
    CHECK(c1.avg_median == c2.avg_median);
    CHECK(c1.avg_q975 == c2.avg_q975);
}

TEST_CASE("boundary truth attenuates toward the prior edge") {
    SimScenario sc;
    sc.mode = SimMode::nocovariate;
    sc.true_params = {0.4, 0.9};
    sc.n = 1500;
    sc.replicates = 20;
    sc.seed = 3;
    const SimResult r = run_scenario(sc, ChainConfig{});
    CHECK(r.avg_median[0] < 0.5);
    CHECK(std::abs(r.avg_median[0] - 0.44) <= 0.04);
}

TEST_CASE("medians converge to the identified-set limit as n grows") {
    // omega*p is all the data identify: the marginal medians converge to the
    // ridge medians (0.24*sqrt(2), 0.5*sqrt(2)), not to the generating truth
    // (0.3, 0.8). Exact expected counts keep the check noise-free.
    const double limit_w = 0.24 * std::sqrt(2.0);
    const double limit_p = 0.5 * std::sqrt(2.0);
    double prev_w = std::numeric_limits<double>::infinity();
    double prev_p = std::numeric_limits<double>::infinity();
    const PriorConfig prior;
    for (long n : {500L, 1500L, 15000L}) {
        const SufficientStats st{n, std::lround(0.24 * static_cast<double>(n))};
        const double med_w = summarize(build_marginal(st, prior, ParamKind::omega)).median;
        const double med_p = summarize(build_marginal(st, prior, ParamKind::p)).median;
        const double err_w = std::abs(med_w - limit_w);
        const double err_p = std::abs(med_p - limit_p);
        CHECK(err_w < prev_w);
        CHECK(err_p < prev_p);
        prev_w = err_w;
        prev_p = err_p;
    }
}

TEST_CASE("covariate grid enumerates the paper's cells in order") {
    CovGrid grid;
    grid.beta0 = {0.5, 1.0, 2.0};
    grid.beta1 = {2.0, 3.0, 4.0};
    grid.beta2 = {3.0};
    grid.theta0 = {-0.5, -1.0, -2.0};
    grid.theta1 = {-2.0, -3.0, -4.0};
    grid.theta2 = {-3.0};
    grid.sizes = {80};
    grid.replicates = 1;
    grid.seed = 1;
    ChainConfig cfg;
    cfg.n_chains = 2;
    cfg.iterations = 40;
    cfg.warmup = 100;

    std::size_t calls = 0;
    const auto results = run_grid(grid, cfg, [&](const SimResult&, std::size_t i, std::size_t total) {
        CHECK(total == 81);
        CHECK(i == calls);
        ++calls;
    });
    REQUIRE(results.size() == 81);
    CHECK(calls == 81);

    // lexicographic order over (beta0, beta1, beta2, theta0, theta1, theta2),
    // truth reported as [theta..., beta...]
    CHECK(results[0].truth == std::vector<double>{-0.5, -2, -3, 0.5, 2, 3});
    CHECK(results[1].truth == std::vector<double>{-0.5, -3, -3, 0.5, 2, 3});
    CHECK(results[80].truth == std::vector<double>{-2.0, -4, -3, 2.0, 4, 3});

    // distinct scenario seeds per cell
    std::set<std::uint64_t> seeds;
    for (const auto& r : results) seeds.insert(r.scenario.seed);
    CHECK(seeds.size() == 81);
}

TEST_CASE("no-covariate grid matches the appendix structure") {
    NocovGrid grid;
    grid.omega = {0.1, 0.2, 0.3, 0.4};
    grid.p = {0.6, 0.7, 0.8, 0.9};
    grid.sizes = {300};
    grid.replicates = 2;
    grid.seed = 10;
    const auto results = run_grid(grid, ChainConfig{});
    REQUIRE(results.size() == 16);
    CHECK(results[0].truth == std::vector<double>{0.1, 0.6});
    CHECK(results[15].truth == std::vector<double>{0.4, 0.9});

    const std::string csv = sim_results_csv(results);
    CHECK(csv.find("mode,n,replicates,true_omega,true_p,omega_avg_median,p_avg_median") == 0);
    CHECK(csv.find("nocovariate,300,2,0.1,0.6") != std::string::npos);
    // one header plus 16 rows
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);

    const auto rerun = run_grid(grid, ChainConfig{});
    CHECK(sim_results_csv(rerun) == csv);
}

TEST_CASE("grid validation") {
    NocovGrid empty;
    empty.p = {0.6};
    empty.sizes = {100};
    CHECK_THROWS_AS(run_grid(empty, ChainConfig{}), std::invalid_argument);

    CovGrid cg;
    cg.beta0 = {};
    cg.beta1 = {2.0};
    cg.beta2 = {3.0};
    cg.theta0 = {-0.5};
    cg.theta1 = {-2.0};
    cg.theta2 = {-3.0};
    cg.sizes = {100};
    CHECK_THROWS_AS(run_grid(cg, ChainConfig{}), std::invalid_argument);

    SimScenario bad;
    bad.mode = SimMode::nocovariate;
    bad.true_params = {1.4, 0.5};
    CHECK_THROWS_AS(run_scenario(bad, ChainConfig{}), std::invalid_argument);
    bad.true_params = {0.4, 0.5};
    bad.replicates = 0;
    CHECK_THROWS_AS(run_scenario(bad, ChainConfig{}), std::invalid_argument);
}

TEST_CASE("covariate scenario smoke run with hyperprior fits") {
    SimScenario sc;
    sc.mode = SimMode::covariate;
    sc.true_coefs = paper_coefs();
    sc.n = 400;
    sc.replicates = 2;
    sc.seed = 21;
    sc.threads = 2;
    sc.prior.sigma_mode = SigmaMode::hyperprior;
    ChainConfig cfg;
    cfg.iterations = 500;
    cfg.warmup = 500;
    const SimResult r = run_scenario(sc, cfg);
    CHECK(r.param_names ==
          std::vector<std::string>{"theta0", "theta1", "theta2", "beta0", "beta1", "beta2"});
    CHECK(r.n_failed <= 1);
    if (r.n_failed == 0) {
        // crude location check only; the acceptance suite does the real one
        CHECK(std::abs(r.avg_median[3] - 0.5) < 1.0);
        CHECK(std::abs(r.avg_median[4] - 2.0) < 1.5);
    }
}
