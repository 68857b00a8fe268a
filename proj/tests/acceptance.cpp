// Acceptance suite: one criterion per command-line argument (1-12), all when
// run bare. Prints one [PASS]/[FAIL] line per criterion; exit code counts
// failures.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "kacsim/empirical.hpp"
#include "kacsim/fourier.hpp"
#include "kacsim/kernels.hpp"
#include "kacsim/metrics.hpp"
#include "kacsim/quadrature.hpp"
#include "kacsim/steady.hpp"
#include "kacsim/wild.hpp"

using namespace kacsim;
namespace fs = std::filesystem;

namespace {

#ifndef KACSIM_CLI_PATH
#define KACSIM_CLI_PATH "kacsim"
#endif

ScalarDistribution u01() { return ScalarDistribution::uniform01(); }

KernelPtr taxed_trades(double m0) {
    return redistribution_bernoulli(saving_propensity(0.3, u01()), 0.1, 0.5,
                                    ScalarDistribution::point_mass(m0));
}

KernelPtr scaled_base(double eps) {
    return redistribution_full(pure_gambling(u01()), eps,
                               ScalarDistribution::point_mass(0.0));
}

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", x);
    return buf;
}

// --------------------------------------------------------------------------
// 1. Tree-moment oracle: MC leaf-weight moments against c_n(q).

bool criterion_1(Check& c) {
    {
        const KernelPtr k = inelastic_kac(1.0);
        const double q = q_gamma(*k, 2.0, QMethod::Quadrature).value;
        c.require(std::abs(q - 0.75) < 1e-9, "quadrature q(2) != 3/4");
        RngStream rng(1001);
        for (std::size_t n = 1; n <= 10; ++n) {
            const MomentEstimate est = leaf_weight_moment(n, *k, 2.0, 100000, rng);
            const double expect = c_n(0.75, n);
            c.require(std::abs(est.value - expect) < 3.0 * est.std_error,
                      "inelastic n=" + std::to_string(n) + ": est " + num(est.value) +
                          " vs " + num(expect) + " (se " + num(est.std_error) + ")");
        }
    }
    {
        const KernelPtr k = taxed_trades(1.0);
        const double q = q_gamma(*k, 1.0, QMethod::ClosedForm).value;
        c.require(std::abs(q - 0.95) < 1e-12, "taxed-trade q(1) != 0.95");
        RngStream rng(1002);
        for (std::size_t n = 1; n <= 10; ++n) {
            const MomentEstimate est = leaf_weight_moment(n, *k, 1.0, 100000, rng);
            const double expect = c_n(0.95, n);
            c.require(std::abs(est.value - expect) < 3.0 * est.std_error,
                      "taxed n=" + std::to_string(n) + ": est " + num(est.value) +
                          " vs " + num(expect));
        }
    }
    return c.ok;
}

// --------------------------------------------------------------------------
// 2. Mean conservation along the evolution.

bool criterion_2(Check& c) {
    const double m0 = 2.0;
    const KernelPtr k = taxed_trades(m0); // m_bar = m0
    c.require(std::abs(m_bar(*k) - m0) < 1e-12, "m_bar != m0");
    const InitialDistribution init = InitialDistribution::gaussian(m0, 1.0);
    RngStream rng(1003);
    for (const double t : {1.0, 2.0, 5.0, 10.0}) {
        const EmpiricalMeasure mu = sample_mu_t(t, *k, init, 10000, rng);
        const double se = std::sqrt(mu.variance() / static_cast<double>(mu.size()));
        c.require(std::abs(mu.mean() - m0) < 3.0 * se,
                  "t=" + num(t) + ": mean " + num(mu.mean()) + " (se " + num(se) + ")");
    }
    return c.ok;
}

// --------------------------------------------------------------------------
// 3. Contraction at gamma = 1 (no prefactor, rate 1-q(1)).

bool criterion_3(Check& c) {
    const KernelPtr k = taxed_trades(2.0);
    const InitialDistribution init = InitialDistribution::gaussian(2.0, 1.0);
    SteadyConfig cfg;
    cfg.pool_size = 100000;
    cfg.max_iters = 400;
    cfg.tol = 0.010;
    RngStream rng(1004);
    const SteadyResult sr = solve_steady(*k, cfg, rng);
    c.require(sr.converged, "steady solve did not converge");
    const ContractionReport rep = contraction_check(*k, init, 1.0, {0.5, 1.0, 2.0, 4.0},
                                                    10000, sr.measure, rng, {});
    c.require(std::abs(rep.rate - 0.05) < 1e-9, "rate != 1-q(1)");
    c.require(rep.prefactor == 1.0, "prefactor != 1");
    for (const ContractionPoint& p : rep.points)
        c.require(p.pass, "t=" + num(p.t) + ": observed " + num(p.observed) +
                              " > bound " + num(p.bound) + " +floor " + num(p.mc_floor));
    return c.ok;
}

// --------------------------------------------------------------------------
// 4. Contraction at gamma = 2 (prefactor 2^{1/2}, rate (1-q(2))/2).

bool criterion_4(Check& c) {
    const KernelPtr k = inelastic_kac(1.0, ScalarDistribution::rademacher(0.5));
    const InitialDistribution init = InitialDistribution::gaussian(0.0, 1.0);
    SteadyConfig cfg;
    cfg.pool_size = 100000;
    cfg.max_iters = 400;
    cfg.tol = 0.010;
    RngStream rng(1005);
    const SteadyResult sr = solve_steady(*k, cfg, rng);
    c.require(sr.converged, "steady solve did not converge");
    const ContractionReport rep = contraction_check(*k, init, 2.0, {0.5, 1.0, 2.0, 4.0},
                                                    10000, sr.measure, rng, {});
    c.require(std::abs(rep.prefactor - std::sqrt(2.0)) < 1e-12, "prefactor != 2^{1/2}");
    c.require(std::abs(rep.rate - 0.125) < 1e-9, "rate != (1-3/4)/2");
    for (const ContractionPoint& p : rep.points)
        c.require(p.pass, "t=" + num(p.t) + ": observed " + num(p.observed) +
                              " > bound " + num(p.bound) + " +floor " + num(p.mc_floor));
    return c.ok;
}

// --------------------------------------------------------------------------
// 5. Steady variance of the dissipative rule with a zero-mean bath.

bool criterion_5(Check& c) {
    const double s = 0.5;
    const KernelPtr k = inelastic_kac(1.0, ScalarDistribution::rademacher(s));
    SteadyConfig cfg;
    cfg.pool_size = 100000;
    cfg.max_iters = 400;
    cfg.tol = 0.008; // just above the resampling floor: stops past the transient
    RngStream rng(1006);
    const SteadyResult sr = solve_steady(*k, cfg, rng);
    c.require(sr.converged, "steady solve did not converge");
    const SteadyMoments m = steady_moments(*k, std::nullopt);
    c.require(std::abs(m.second_moment - 4.0 * s * s) < 1e-12,
              "closed form != 4 s^2");
    const double var = sr.measure.variance();
    c.require(std::abs(var - 4.0 * s * s) < 0.05 * 4.0 * s * s,
              "pool variance " + num(var) + " vs " + num(4.0 * s * s));
    return c.ok;
}

// --------------------------------------------------------------------------
// 6. Stationarity residual of three solved steady states.

bool criterion_6(Check& c) {
    struct CaseDef {
        std::string name;
        KernelPtr kernel;
        double tol; // per-kernel stopping level, tuned to the noise floor
    };
    const std::vector<CaseDef> cases = {
        {"chi_zero", chi_zero(scaled_base(0.3), 0.3, 1.0), 0.006},
        {"chi_general", chi_general(scaled_base(0.3), 0.3, 1.0, 1.0), 0.006},
        {"thermal_bath", thermal_bath_diff(inelastic_kac(1.0), 0.5, 0.5), 0.010},
    };
    const std::vector<double> grid = default_xi_grid();
    std::uint64_t seed = 1007;
    for (const CaseDef& cd : cases) {
        SteadyConfig cfg;
        cfg.pool_size = 100000;
        cfg.max_iters = 400;
        cfg.tol = cd.tol;
        RngStream rng(seed++);
        const SteadyResult sr = solve_steady(*cd.kernel, cfg, rng);
        c.require(sr.converged, cd.name + ": no convergence");
        const ResidualReport good =
            stationarity_residual(*cd.kernel, sr.measure, grid, 100000, rng);
        c.require(good.max_abs_residual <= 0.02,
                  cd.name + ": residual " + num(good.max_abs_residual) + " > 0.02");

        const double m = m_bar(*cd.kernel);
        const EmpiricalMeasure wrong = EmpiricalMeasure::from_samples(
            std::vector<double>(100000, m), {{"kind", "init"}});
        const ResidualReport bad =
            stationarity_residual(*cd.kernel, wrong, grid, 100000, rng);
        c.require(bad.max_abs_residual > 0.1,
                  cd.name + ": point-mass residual only " +
                      num(bad.max_abs_residual));
    }
    return c.ok;
}

// --------------------------------------------------------------------------
// 7. Degenerate fixed point: collapse from an arbitrary initial pool.

bool criterion_7(Check& c) {
    const double m = 1.5;
    const KernelPtr k = degenerate_pin(inelastic_kac(1.0), m);
    SteadyConfig cfg;
    cfg.pool_size = 10000;
    cfg.max_iters = 200;
    cfg.tol = 1e-9;
    RngStream rng(1010);
    const InitialDistribution spread = InitialDistribution::uniform(0.0, 3.0);
    const SteadyResult sr = solve_steady(*k, cfg, rng, 1, &spread);
    c.require(sr.iterations <= 200, "used more than 200 iterations");
    const double width = sr.measure.max() - sr.measure.min();
    c.require(width < 1e-6, "pool spread " + num(width) + " >= 1e-6");
    c.require(std::abs(sr.measure.mean() - m) < 1e-6, "collapsed off target");
    RngStream rng2(1011);
    c.require(is_degenerate_fixed_point(*k, m, 2000, 1e-10, rng2),
              "degeneracy identity rejected");
    return c.ok;
}

// --------------------------------------------------------------------------
// 8. Energy collapse without a bath: m2(t) = e^{-t/4}.

bool criterion_8(Check& c) {
    const KernelPtr k = inelastic_kac(1.0);
    const InitialDistribution init = InitialDistribution::gaussian(0.0, 1.0);
    RngStream rng(1012);
    for (const double t : {1.0, 2.0, 4.0, 8.0}) {
        const EmpiricalMeasure mu = sample_mu_t(t, *k, init, 10000, rng);
        const double m2 = mu.second_moment();
        double m4 = 0.0;
        for (const double v : mu.samples()) m4 += v * v * v * v;
        m4 /= static_cast<double>(mu.size());
        const double se = std::sqrt(std::max(0.0, m4 - m2 * m2) /
                                    static_cast<double>(mu.size()));
        const double expect = std::exp(-t / 4.0);
        c.require(std::abs(m2 - expect) < 3.0 * se,
                  "t=" + num(t) + ": m2 " + num(m2) + " vs " + num(expect) + " (se " +
                      num(se) + ")");
    }
    return c.ok;
}

// --------------------------------------------------------------------------
// CLI plumbing shared by criteria 9 and 12.

int run_cli(const std::string& args) {
    const std::string cmd = std::string(KACSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// 9. Taxed-trade moment identity through the CLI moments command.

bool criterion_9(Check& c) {
    const fs::path dir = fresh_dir("kacsim_acc9");
    write_file(dir / "cfg.txt", R"(
seed = 90210

[kernel]
type = "redistribution_bernoulli"
epsilon = 0.1
delta = 0.5

[kernel.base]
type = "inelastic_kac"
p = 1.0

[kernel.a0dist]
type = "point_mass"
value = 1.0

[moments]
beta_grid = [1.0, 2.0, 3.0]
mc_reps = 50000
)");
    const int rc = run_cli("moments --config " + (dir / "cfg.txt").string() + " --out " +
                           dir.string());
    c.require(rc == 0, "moments command failed");
    if (rc != 0) return c.ok;
    const nlohmann::json summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    c.require(summary.contains("identity_max_abs_diff"), "identity missing");
    if (summary.contains("identity_max_abs_diff")) {
        const double diff = summary["identity_max_abs_diff"].get<double>();
        c.require(diff <= 1e-8, "identity diff " + num(diff) + " > 1e-8");
    }
    // The Monte Carlo column stays within 3 SE of the closed-form product.
    std::ifstream idcsv(dir / "q_identity.csv");
    std::string line;
    int rows = 0;
    while (std::getline(idcsv, line)) {
        double beta, qk, qb, fac, qp, diff, qmc, se;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &beta, &qk,
                        &qb, &fac, &qp, &diff, &qmc, &se) == 8) {
            ++rows;
            c.require(std::abs(qmc - qp) < 3.0 * se,
                      "beta=" + num(beta) + ": MC " + num(qmc) + " vs " + num(qp));
            c.require(std::abs(qp - fac * qb) < 1e-12, "product decomposition broken");
        }
    }
    c.require(rows == 3, "expected 3 identity rows");
    return c.ok;
}

// --------------------------------------------------------------------------
// 10. Energy-conserving sanity: Gaussian is stationary for the classical rule.

bool criterion_10(Check& c) {
    const KernelPtr k = kac_classical();
    const InitialDistribution init = InitialDistribution::gaussian(0.0, 1.0);
    RngStream rng(1013);
    for (const double t : {1.0, 5.0, 10.0}) {
        const EmpiricalMeasure mu = sample_mu_t(t, *k, init, 10000, rng);
        const double se = std::sqrt(2.0 / static_cast<double>(mu.size()));
        c.require(std::abs(mu.variance() - 1.0) < 3.0 * se,
                  "t=" + num(t) + ": variance " + num(mu.variance()));
    }
    std::vector<double> gauss(100000);
    RngStream grng(1014);
    for (double& v : gauss) v = grng.normal();
    const EmpiricalMeasure m = EmpiricalMeasure::from_samples(gauss, {});
    const ResidualReport rep =
        stationarity_residual(*k, m, default_xi_grid(), 100000, grng);
    c.require(rep.max_abs_residual <= 0.02,
              "Gaussian residual " + num(rep.max_abs_residual) + " > 0.02");
    return c.ok;
}

// --------------------------------------------------------------------------
// 11. Transport-distance oracle on small instances.

bool criterion_11(Check& c) {
    RngStream rng(1015);
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t n = 2 + rng.below(7); // up to 8 points
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.uniform(-3.0, 3.0);
            y[i] = rng.uniform(-3.0, 3.0);
        }
        const auto mx = EmpiricalMeasure::from_samples(x, {});
        const auto my = EmpiricalMeasure::from_samples(y, {});
        for (const double g : {1.0, 2.0}) {
            // Brute force over all pairings.
            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            double best = std::numeric_limits<double>::infinity();
            do {
                double cost = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    cost += pow_abs(mx.samples()[i] - my.samples()[perm[i]], g);
                best = std::min(best, cost / static_cast<double>(n));
            } while (std::next_permutation(perm.begin(), perm.end()));
            const double oracle = g > 1.0 ? std::pow(best, 1.0 / g) : best;
            const double sorted = wasserstein(g, mx, my);
            c.require(std::abs(sorted - oracle) <= 1e-12 * std::max(1.0, oracle),
                      "sorted != oracle at gamma=" + num(g));
        }
        const double sorted_half = wasserstein(0.5, mx, my);
        const double exact_half =
            wasserstein(0.5, mx, my, WassersteinMode::ExactSmall);
        c.require(exact_half <= sorted_half + 1e-12, "upper-bound contract violated");
    }
    return c.ok;
}

// --------------------------------------------------------------------------
// 12. CLI determinism: identical bytes across reruns and worker counts.

bool criterion_12(Check& c) {
    const fs::path dir = fresh_dir("kacsim_acc12");
    write_file(dir / "sim.txt", R"(
seed = 31415

[kernel]
type = "redistribution_bernoulli"
epsilon = 0.1
delta = 0.5

[kernel.base]
type = "saving_propensity"
lambda = 0.3

[kernel.base.eta]
type = "uniform01"

[kernel.a0dist]
type = "point_mass"
value = 1.0

[init]
type = "gaussian"
mean = 1.0
stddev = 0.5

[simulate]
t = 1.5
n_samples = 2000

[steady]
pool_size = 2000
max_iters = 80
tol = 0.08

[contraction]
gamma = 1.0
times = [0.5, 1.0]
n_samples = 500
bootstrap = 30

[moments]
beta_grid = [1.0, 2.0]
mc_reps = 20000

[fourier]
mc_pairs = 2000
)");

    const std::vector<std::string> commands = {"simulate", "steady", "contraction",
                                               "moments"};
    const std::vector<std::vector<std::string>> primaries = {
        {"measure.txt", "summary.json"},
        {"steady.txt", "summary.json", "convergence.json", "residual.csv"},
        {"contraction.csv", "summary.json"},
        {"q_gamma.csv", "c_n.csv", "q_identity.csv", "summary.json"},
    };

    for (std::size_t ci = 0; ci < commands.size(); ++ci) {
        const std::string& cmd = commands[ci];
        const fs::path a = dir / (cmd + "_a");
        const fs::path b = dir / (cmd + "_b");
        const fs::path w4 = dir / (cmd + "_w4");
        const std::string base_args =
            cmd + " --config " + (dir / "sim.txt").string();
        int rc = run_cli(base_args + " --out " + a.string() + " --workers 1");
        rc |= run_cli(base_args + " --out " + b.string() + " --workers 1");
        rc |= run_cli(base_args + " --out " + w4.string() + " --workers 4");
        c.require(rc == 0, cmd + ": command failed");
        if (rc != 0) continue;
        for (const std::string& f : primaries[ci]) {
            const std::string fa = slurp(a / f);
            c.require(!fa.empty(), cmd + "/" + f + ": missing output");
            c.require(fa == slurp(b / f), cmd + "/" + f + ": rerun differs");
            c.require(fa == slurp(w4 / f), cmd + "/" + f + ": workers=4 differs");
        }
    }
    return c.ok;
}

struct Criterion {
    int id;
    const char* name;
    bool (*run)(Check&);
};

const Criterion kCriteria[] = {
    {1, "tree-moment oracle vs c_n(q)", criterion_1},
    {2, "mean conservation along the evolution", criterion_2},
    {3, "contraction bound at gamma=1", criterion_3},
    {4, "contraction bound at gamma=2", criterion_4},
    {5, "steady variance with zero-mean bath", criterion_5},
    {6, "stationarity residual of solved states", criterion_6},
    {7, "degenerate fixed point collapse", criterion_7},
    {8, "bath-free energy decay e^{-t/4}", criterion_8},
    {9, "taxed-trade moment identity via CLI", criterion_9},
    {10, "energy-conserving Gaussian sanity", criterion_10},
    {11, "transport distance oracle", criterion_11},
    {12, "CLI determinism across reruns and workers", criterion_12},
};

} // namespace

int main(int argc, char** argv) {
    int failures = 0;
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
    for (const Criterion& cr : kCriteria) {
        if (!wanted.empty() &&
            std::find(wanted.begin(), wanted.end(), cr.id) == wanted.end())
            continue;
        Check check;
        bool ok = false;
        std::string error;
        try {
            ok = cr.run(check);
        } catch (const std::exception& e) {
            ok = false;
            error = e.what();
        }
        if (ok) {
            std::printf("[PASS] %2d. %s\n", cr.id, cr.name);
        } else {
            ++failures;
            std::printf("[FAIL] %2d. %s — %s%s\n", cr.id, cr.name,
                        check.detail.c_str(), error.c_str());
        }
        std::fflush(stdout);
    }
    return failures;
}
