#include "kacsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kacsim/errors.hpp"
#include "kacsim/quadrature.hpp"

namespace kacsim {

namespace {

double finalize(double mean_cost, double gamma) {
    return gamma > 1.0 ? std::pow(mean_cost, 1.0 / gamma) : mean_cost;
}

std::vector<double> resample_sorted(const std::vector<double>& src, RngStream& rng) {
    std::vector<double> out(src.size());
    for (double& v : out) v = src[static_cast<std::size_t>(rng.below(src.size()))];
    std::sort(out.begin(), out.end());
    return out;
}

// Bootstrap standard error of the sorted-coupling distance: both samples are
// resampled with replacement, independently.
double bootstrap_se(double gamma, const std::vector<double>& x,
                    const std::vector<double>& y, std::size_t reps, RngStream& rng) {
    std::vector<double> vals(reps);
    for (std::size_t b = 0; b < reps; ++b) {
        const std::vector<double> xb = resample_sorted(x, rng);
        const std::vector<double> yb = resample_sorted(y, rng);
        vals[b] = wasserstein_sorted(gamma, xb, yb);
    }
    double mean = 0.0;
    for (const double v : vals) mean += v;
    mean /= static_cast<double>(reps);
    double var = 0.0;
    for (const double v : vals) var += (v - mean) * (v - mean);
    var /= static_cast<double>(reps > 1 ? reps - 1 : 1);
    return std::sqrt(var);
}

} // namespace

double wasserstein_sorted(double gamma, const std::vector<double>& x,
                          const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += pow_abs(x[i] - y[i], gamma);
    return finalize(s / static_cast<double>(x.size()), gamma);
}

double assignment_cost(const std::vector<double>& cost, std::size_t n) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const auto N = static_cast<std::ptrdiff_t>(n);
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::ptrdiff_t> p(n + 1, 0), way(n + 1, 0);
    for (std::ptrdiff_t i = 1; i <= N; ++i) {
        p[0] = i;
        std::ptrdiff_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::ptrdiff_t i0 = p[j0];
            std::ptrdiff_t j1 = -1;
            double delta = kInf;
            for (std::ptrdiff_t j = 1; j <= N; ++j) {
                if (used[j]) continue;
                const double cur = cost[static_cast<std::size_t>((i0 - 1) * N + (j - 1))] -
                                   u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::ptrdiff_t j = 0; j <= N; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::ptrdiff_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (std::ptrdiff_t j = 1; j <= N; ++j)
        total += cost[static_cast<std::size_t>((p[j] - 1) * N + (j - 1))];
    return total;
}

double wasserstein(double gamma, const EmpiricalMeasure& x, const EmpiricalMeasure& y,
                   WassersteinMode mode) {
    if (!(gamma > 0.0)) throw ConfigError("wasserstein: gamma must be positive");
    if (x.size() != y.size())
        throw ConfigError(
            "wasserstein: sample counts differ (" + std::to_string(x.size()) + " vs " +
            std::to_string(y.size()) +
            "); subsample the larger measure to match before comparing");
    switch (mode) {
        case WassersteinMode::Sorted:
            return wasserstein_sorted(gamma, x.samples(), y.samples());
        case WassersteinMode::ExactSmall: {
            const std::size_t n = x.size();
            if (n > 256)
                throw ConfigError("wasserstein: exact_small supports at most 256 points");
            std::vector<double> cost(n * n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    cost[i * n + j] = pow_abs(x.samples()[i] - y.samples()[j], gamma);
            return finalize(assignment_cost(cost, n) / static_cast<double>(n), gamma);
        }
    }
    throw ConfigError("wasserstein: unknown mode");
}

ContractionReport contraction_check(const Kernel& kernel,
                                    const InitialDistribution& init, double gamma,
                                    const std::vector<double>& times,
                                    std::size_t n_samples,
                                    const EmpiricalMeasure& steady_ref, RngStream& rng,
                                    const ContractionOptions& options) {
    if (!(gamma > 0.0 && gamma <= 2.0))
        throw HypothesisError(
            "contraction_check: the contraction results cover gamma in (0,2], got " +
            std::to_string(gamma));
    if (times.empty()) throw ConfigError("contraction_check: empty time grid");
    if (n_samples < 2) throw ConfigError("contraction_check: n_samples must be >= 2");

    // q(gamma) < 1 is the common hypothesis of every regime.
    RngStream probe = rng.substream(0x9a11);
    const QEstimate qe = q_best(kernel, gamma, 200000, probe);
    const double q = qe.value;
    const double q_margin = qe.std_error ? 3.0 * *qe.std_error : 0.0;
    if (!(q + q_margin < 1.0))
        throw HypothesisError("contraction_check: hypothesis q(gamma) < 1 fails: q(" +
                              std::to_string(gamma) + ") = " + std::to_string(q));

    // Mean hypotheses of the gamma > 1 regimes.
    if (gamma > 1.0) {
        const auto& f = kernel.facts();
        if (!f.mean_sum)
            throw HypothesisError(
                "contraction_check: E[A1+A2] undeclared; cannot select the regime for "
                "gamma > 1");
        if (*f.mean_sum != 1.0) {
            const double mbar = m_bar(kernel);
            if (std::abs(init.mean() - mbar) > 1e-9)
                throw HypothesisError(
                    "contraction_check: hypothesis m0 = m_bar fails: init mean " +
                    std::to_string(init.mean()) + " vs m_bar " + std::to_string(mbar));
        } else {
            if (!f.mean_a0 || *f.mean_a0 != 0.0)
                throw HypothesisError(
                    "contraction_check: E[A1+A2] = 1 requires E[A0] = 0 (pinned-mean "
                    "regime)");
            const double m0 = init.mean();
            const double ref_se = std::sqrt(steady_ref.variance() /
                                            static_cast<double>(steady_ref.size()));
            if (std::abs(steady_ref.mean() - m0) > 5.0 * ref_se + 1e-12)
                throw HypothesisError(
                    "contraction_check: steady reference mean " +
                    std::to_string(steady_ref.mean()) +
                    " is incompatible with the pinned mean " + std::to_string(m0));
        }
    }

    ContractionReport report;
    report.gamma = gamma;
    report.q = q;
    report.prefactor = gamma > 1.0 ? std::pow(2.0, 1.0 / gamma) : 1.0;
    report.rate = gamma > 1.0 ? (1.0 - q) / gamma : (1.0 - q);

    const std::size_t m = std::min(n_samples, steady_ref.size());
    RngStream sub_rng = rng.fork();
    const EmpiricalMeasure ref_sub =
        steady_ref.size() == m ? steady_ref : steady_ref.subsample(m, sub_rng);

    // mu_0: plain iid draws from the initial law.
    RngStream init_rng = rng.fork();
    std::vector<double> mu0(m);
    for (double& v : mu0) v = init.sample(init_rng);
    std::sort(mu0.begin(), mu0.end());
    report.initial_distance = wasserstein_sorted(gamma, mu0, ref_sub.samples());

    RngStream grid_rng = rng.fork();
    report.all_pass = true;
    for (std::size_t j = 0; j < times.size(); ++j) {
        RngStream tstream = grid_rng.substream(j);
        const EmpiricalMeasure mu_t = sample_mu_t(times[j], kernel, init, m, tstream,
                                                  options.workers, options.t_max);
        ContractionPoint pt;
        pt.t = times[j];
        pt.observed = wasserstein_sorted(gamma, mu_t.samples(), ref_sub.samples());
        pt.bound = report.prefactor * report.initial_distance *
                   std::exp(-report.rate * times[j]);
        RngStream boot = tstream.substream(0xb007);
        pt.mc_floor = options.mc_floor_mult *
                      bootstrap_se(gamma, mu_t.samples(), ref_sub.samples(),
                                   options.bootstrap, boot);
        pt.pass = pt.observed <= pt.bound * (1.0 + options.slack) + pt.mc_floor;
        report.all_pass = report.all_pass && pt.pass;
        report.points.push_back(pt);
    }
    return report;
}

} // namespace kacsim
