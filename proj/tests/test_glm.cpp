#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "zib/glm.hpp"
#include "zib/model.hpp"
#include "zib/rng.hpp"

using namespace zib;

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd w(x.rows(), x.cols() + 1);
    w.col(0).setOnes();
    w.rightCols(x.cols()) = x;
    return w;
}

Eigen::VectorXd score_at(const std::vector<int>& y, const Eigen::MatrixXd& w,
                         const Eigen::VectorXd& beta) {
    Eigen::VectorXd resid(w.rows());
    const Eigen::VectorXd eta = w * beta;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        resid(i) = y[static_cast<std::size_t>(i)] - inv_logit(eta(i));
    }
    return w.transpose() * resid;
}

} // namespace

TEST_CASE("intercept-only fit hits the closed-form MLE") {
    std::vector<int> y(100, 0);
    for (int i = 0; i < 27; ++i) y[static_cast<std::size_t>(i)] = 1;
    Eigen::MatrixXd w = Eigen::MatrixXd::Ones(100, 1);
    const LogisticFit fit = fit_logistic(y, w);
    REQUIRE(fit.converged);
    CHECK(std::abs(fit.coefficients(0) - logit(0.27)) <= 1e-6);
    CHECK(logit(0.27) == doctest::Approx(-0.9946225751440620549064).epsilon(1e-14));
    CHECK(score_at(y, w, fit.coefficients).lpNorm<Eigen::Infinity>() < 1e-6);
    // Wald interval is exactly coefficient +/- 1.96 SE
    CHECK(fit.ci95[0].first == fit.coefficients(0) - 1.96 * fit.standard_errors(0));
    CHECK(fit.ci95[0].second == fit.coefficients(0) + 1.96 * fit.standard_errors(0));
}

TEST_CASE("constant outcome reports separation") {
    std::vector<int> y(40, 1);
    const LogisticFit fit = fit_logistic(y, Eigen::MatrixXd::Ones(40, 1));
    CHECK_FALSE(fit.converged);
    CHECK(fit.separation);
    CHECK_FALSE(fit.message.empty());
}

TEST_CASE("separated covariate reports separation") {
    std::vector<int> y;
    Eigen::MatrixXd x(30, 1);
    for (int i = 0; i < 30; ++i) {
        x(i, 0) = i < 15 ? -1.0 - 0.05 * i : 1.0 + 0.05 * i;
        y.push_back(i < 15 ? 0 : 1);
    }
    const LogisticFit fit = fit_logistic(y, with_intercept(x));
    CHECK_FALSE(fit.converged);
    CHECK(fit.separation);
}

TEST_CASE("recovers simulated coefficients within 3 SE") {
    Rng rng(404);
    const int n = 5000;
    const Eigen::Vector2d truth(-1.0, 1.05);
    Eigen::MatrixXd x(n, 1);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        const double p = inv_logit(truth(0) + truth(1) * x(i, 0));
        y[static_cast<std::size_t>(i)] = rng.bernoulli(p) ? 1 : 0;
    }
    const LogisticFit fit = fit_logistic(y, with_intercept(x));
    REQUIRE(fit.converged);
    for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(fit.coefficients(j) - truth(j)) <= 3.0 * fit.standard_errors(j));
    }
    CHECK(score_at(y, with_intercept(x), fit.coefficients).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("rescaling a covariate rescales its coefficient and SE") {
    Rng rng(11);
    const int n = 400;
    Eigen::MatrixXd x(n, 2);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = rng.normal();
        const double p = inv_logit(0.3 + 0.8 * x(i, 0) - 0.5 * x(i, 1));
        y[static_cast<std::size_t>(i)] = rng.bernoulli(p) ? 1 : 0;
    }
    const LogisticFit base = fit_logistic(y, with_intercept(x));
    REQUIRE(base.converged);

    const double c = 4.0;
    Eigen::MatrixXd xs = x;
    xs.col(1) *= c;
    const LogisticFit scaled = fit_logistic(y, with_intercept(xs));
    REQUIRE(scaled.converged);

    CHECK(scaled.coefficients(2) == doctest::Approx(base.coefficients(2) / c).epsilon(1e-8));
    CHECK(scaled.standard_errors(2) ==
          doctest::Approx(base.standard_errors(2) / c).epsilon(1e-8));
    // fitted probabilities unchanged
    const Eigen::VectorXd eta_a = with_intercept(x) * base.coefficients;
    const Eigen::VectorXd eta_b = with_intercept(xs) * scaled.coefficients;
    for (Eigen::Index i = 0; i < eta_a.size(); ++i) {
        CHECK(inv_logit(eta_a(i)) == doctest::Approx(inv_logit(eta_b(i))).epsilon(1e-10));
    }
}

TEST_CASE("exposed-only fit recovers the p-side coefficients") {
    // ZIB data with the latent exposure retained, fit only on exposed rows
    Rng rng(2718);
    const int n = 6000;
    const Eigen::Vector2d beta_truth(1.16, -0.54);
    std::vector<int> y_exposed;
    std::vector<double> z_exposed;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        const bool exposed = rng.bernoulli(0.4);
        const bool event = rng.bernoulli(inv_logit(beta_truth(0) + beta_truth(1) * z));
        if (exposed) {
            y_exposed.push_back(event ? 1 : 0);
            z_exposed.push_back(z);
        }
    }
    Eigen::MatrixXd z(static_cast<Eigen::Index>(z_exposed.size()), 1);
    for (std::size_t i = 0; i < z_exposed.size(); ++i) {
        z(static_cast<Eigen::Index>(i), 0) = z_exposed[i];
    }
    const LogisticFit fit = fit_logistic(y_exposed, with_intercept(z));
    REQUIRE(fit.converged);
    for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(fit.coefficients(j) - beta_truth(j)) <= 3.0 * fit.standard_errors(j));
    }
}

TEST_CASE("input validation") {
    std::vector<int> y = {0, 1, 2};
    CHECK_THROWS_AS(fit_logistic(y, Eigen::MatrixXd::Ones(3, 1)), std::invalid_argument);
    y = {0, 1};
    CHECK_THROWS_AS(fit_logistic(y, Eigen::MatrixXd::Ones(3, 1)), std::invalid_argument);
    y = {0, 1};
    CHECK_THROWS_AS(fit_logistic(y, Eigen::MatrixXd::Ones(2, 3)), std::invalid_argument);
}
