#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "kacsim/errors.hpp"
#include "kacsim/metrics.hpp"
#include "kacsim/quadrature.hpp"
#include "kacsim/steady.hpp"

using namespace kacsim;

namespace {

EmpiricalMeasure mk(std::vector<double> v) {
    return EmpiricalMeasure::from_samples(std::move(v), {});
}

// Brute-force transport oracle: minimum mean cost over all pairings.
double brute_force_min(double gamma, std::vector<double> x, std::vector<double> y) {
    std::sort(y.begin(), y.end());
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> perm(y.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            cost += pow_abs(x[i] - y[perm[i]], gamma);
        best = std::min(best, cost / static_cast<double>(x.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return gamma > 1.0 ? std::pow(best, 1.0 / gamma) : best;
}

ScalarDistribution u01() { return ScalarDistribution::uniform01(); }

KernelPtr taxed_trades(double m0) {
    return redistribution_bernoulli(saving_propensity(0.3, u01()), 0.1, 0.5,
                                    ScalarDistribution::point_mass(m0));
}

} // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("hand-checked transport distances") {
    CHECK(wasserstein(1.0, mk({0, 1}), mk({10, 11})) == doctest::Approx(10.0));
    CHECK(wasserstein(1.0, mk({0, 1}), mk({10, 11}), WassersteinMode::ExactSmall) ==
          doctest::Approx(10.0));
    CHECK(wasserstein(2.0, mk({0, 2}), mk({1, 1})) == doctest::Approx(1.0));
    CHECK(wasserstein(2.0, mk({0, 2}), mk({1, 1}), WassersteinMode::ExactSmall) ==
          doctest::Approx(1.0));
    const auto x = mk({0.3, -1.2, 4.0});
    CHECK(wasserstein(1.0, x, x) == 0.0);
    CHECK(wasserstein(0.5, x, x) == 0.0);
    CHECK(wasserstein(2.0, x, x) == 0.0);
}

TEST_CASE("translation covariance at gamma = 1") {
    RngStream rng(41);
    std::vector<double> x(50), y(50);
    for (int i = 0; i < 50; ++i) {
        x[i] = rng.normal();
        y[i] = x[i] + 3.25;
    }
    CHECK(wasserstein(1.0, mk(x), mk(y)) == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("sorted coupling is optimal for convex cost") {
    RngStream rng(42);
    for (int inst = 0; inst < 30; ++inst) {
        const std::size_t n = 2 + rng.below(5); // up to 6 points
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.uniform(-2.0, 2.0);
            y[i] = rng.uniform(-2.0, 2.0);
        }
        for (const double g : {1.0, 2.0}) {
            const double sorted = wasserstein(g, mk(x), mk(y));
            const double brute = brute_force_min(g, mk(x).samples(), y);
            CHECK(sorted == doctest::Approx(brute).epsilon(1e-12));
        }
    }
}

TEST_CASE("assignment solver reproduces the brute-force optimum") {
    RngStream rng(43);
    for (int inst = 0; inst < 30; ++inst) {
        const std::size_t n = 2 + rng.below(5);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.uniform(-2.0, 2.0);
            y[i] = rng.uniform(-2.0, 2.0);
        }
        for (const double g : {0.5, 1.0, 2.0}) {
            const double exact = wasserstein(g, mk(x), mk(y), WassersteinMode::ExactSmall);
            const double brute = brute_force_min(g, mk(x).samples(), y);
            CHECK(exact == doctest::Approx(brute).epsilon(1e-12));
        }
    }
}

TEST_CASE("for concave cost the sorted coupling is an upper bound") {
    RngStream rng(44);
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t n = 2 + rng.below(7);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.uniform(-2.0, 2.0);
            y[i] = rng.uniform(-2.0, 2.0);
        }
        const double sorted = wasserstein(0.5, mk(x), mk(y));
        const double exact = wasserstein(0.5, mk(x), mk(y), WassersteinMode::ExactSmall);
        CHECK(exact <= sorted + 1e-12);
    }
}

TEST_CASE("symmetry and identity of indiscernibles") {
    RngStream rng(45);
    for (int inst = 0; inst < 20; ++inst) {
        std::vector<double> x(20), y(20);
        for (int i = 0; i < 20; ++i) {
            x[i] = rng.normal();
            y[i] = rng.normal();
        }
        for (const double g : {0.5, 1.0, 2.0}) {
            const double xy = wasserstein(g, mk(x), mk(y));
            const double yx = wasserstein(g, mk(y), mk(x));
            CHECK(xy == doctest::Approx(yx).epsilon(1e-13));
            CHECK(xy > 0.0);
        }
    }
}

TEST_CASE("triangle inequality for gamma >= 1") {
    RngStream rng(46);
    for (int inst = 0; inst < 20; ++inst) {
        std::vector<double> x(30), y(30), z(30);
        for (int i = 0; i < 30; ++i) {
            x[i] = rng.normal();
            y[i] = rng.normal(0.5, 2.0);
            z[i] = rng.uniform(-3.0, 3.0);
        }
        for (const double g : {1.0, 1.5, 2.0}) {
            const double xy = wasserstein(g, mk(x), mk(y));
            const double yz = wasserstein(g, mk(y), mk(z));
            const double xz = wasserstein(g, mk(x), mk(z));
            CHECK(xz <= xy + yz + 1e-12);
        }
    }
}

TEST_CASE("mode preconditions") {
    CHECK_THROWS_WITH_AS(wasserstein(1.0, mk({1, 2}), mk({1, 2, 3})),
                         doctest::Contains("subsample"), ConfigError);
    std::vector<double> big(300, 0.0);
    big[0] = 1.0;
    CHECK_THROWS_AS(wasserstein(1.0, mk(big), mk(big), WassersteinMode::ExactSmall),
                    ConfigError);
    CHECK_THROWS_AS(wasserstein(0.0, mk({1}), mk({2})), ConfigError);
}

TEST_CASE("contraction check on the taxed-trade rule at gamma = 1") {
    const KernelPtr k = taxed_trades(2.0);
    const InitialDistribution init = InitialDistribution::gaussian(2.0, 1.0);
    SteadyConfig cfg;
    cfg.pool_size = 5000;
    cfg.max_iters = 300;
    cfg.tol = 0.06;
    RngStream rng(47);
    const SteadyResult sr = solve_steady(*k, cfg, rng);
    REQUIRE(sr.converged);

    ContractionOptions opts;
    const ContractionReport rep = contraction_check(
        *k, init, 1.0, {0.0, 0.5, 1.0, 2.0}, 2000, sr.measure, rng, opts);
    CHECK(rep.prefactor == 1.0);
    CHECK(rep.q == doctest::Approx(0.95).epsilon(1e-9));
    CHECK(rep.rate == doctest::Approx(0.05).epsilon(1e-9));
    REQUIRE(rep.points.size() == 4);
    CHECK(rep.all_pass);
    // At t = 0 the observed distance sits at the bound up to estimator noise.
    CHECK(rep.points[0].observed <=
          rep.points[0].bound + 2.0 * rep.points[0].mc_floor);
    CHECK(rep.points[0].observed >=
          rep.points[0].bound - rep.points[0].bound * 0.5 - rep.points[0].mc_floor);
}

TEST_CASE("contraction check at gamma = 2 uses prefactor and rate/gamma") {
    const KernelPtr k = inelastic_kac(1.0, ScalarDistribution::rademacher(0.5));
    const InitialDistribution init = InitialDistribution::gaussian(0.0, 1.0);
    SteadyConfig cfg;
    cfg.pool_size = 5000;
    cfg.max_iters = 300;
    cfg.tol = 0.06;
    RngStream rng(48);
    const SteadyResult sr = solve_steady(*k, cfg, rng);
    REQUIRE(sr.converged);
    const ContractionReport rep =
        contraction_check(*k, init, 2.0, {0.5, 2.0}, 2000, sr.measure, rng, {});
    CHECK(rep.prefactor == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(rep.rate == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(rep.all_pass);
}

TEST_CASE("hypothesis violations are rejected by name") {
    RngStream rng(49);
    const InitialDistribution init = InitialDistribution::gaussian(0.0, 1.0);
    const auto ref = mk({-1.0, 0.0, 1.0});
    // q(2) = 1 for the classical rule.
    CHECK_THROWS_WITH_AS(
        contraction_check(*kac_classical(), init, 2.0, {1.0}, 100, ref, rng, {}),
        doctest::Contains("q(gamma)"), HypothesisError);
    // gamma out of the covered range.
    CHECK_THROWS_AS(
        contraction_check(*kac_classical(), init, 3.0, {1.0}, 100, ref, rng, {}),
        HypothesisError);
    // Forced-mean regime with a mismatched initial mean.
    const KernelPtr k = taxed_trades(2.0);
    CHECK_THROWS_WITH_AS(
        contraction_check(*k, InitialDistribution::gaussian(0.0, 1.0), 2.0, {1.0}, 100,
                          ref, rng, {}),
        doctest::Contains("m_bar"), HypothesisError);
}

TEST_CASE("bootstrap floor shrinks with the sample count") {
    const KernelPtr k = taxed_trades(1.0);
    const InitialDistribution init = InitialDistribution::gaussian(1.0, 0.5);
    SteadyConfig cfg;
    cfg.pool_size = 8000;
    cfg.max_iters = 300;
    cfg.tol = 0.05;
    RngStream rng(50);
    const SteadyResult sr = solve_steady(*k, cfg, rng);
    REQUIRE(sr.converged);
    const ContractionReport small =
        contraction_check(*k, init, 1.0, {1.0}, 1000, sr.measure, rng, {});
    const ContractionReport large =
        contraction_check(*k, init, 1.0, {1.0}, 4000, sr.measure, rng, {});
    CHECK(large.points[0].mc_floor <= small.points[0].mc_floor * 1.25);
}

TEST_SUITE_END();
