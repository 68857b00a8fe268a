#include "kacsim/steady.hpp"

#include <algorithm>
#include <cmath>

#include "kacsim/errors.hpp"
#include "kacsim/parallel.hpp"

namespace kacsim {

namespace {

double sorted_l2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.size()));
}

double pool_mean(const std::vector<double>& pool) {
    double s = 0.0;
    for (const double v : pool) s += v;
    return s / static_cast<double>(pool.size());
}

double pool_variance(const std::vector<double>& pool, double mean) {
    double s = 0.0;
    for (const double v : pool) s += (v - mean) * (v - mean);
    return s / static_cast<double>(pool.size());
}

double m_star_rec(const Kernel& kernel, RngStream& rng, double m, std::size_t depth,
                  double weight) {
    if (depth == 0) return weight * m;
    const RuleSample r = kernel.sample(rng);
    double acc = weight * r.a0;
    acc += m_star_rec(kernel, rng, m, depth - 1, weight * r.a1);
    acc += m_star_rec(kernel, rng, m, depth - 1, weight * r.a2);
    return acc;
}

} // namespace

std::vector<double> iterate_pool(const std::vector<double>& pool, const Kernel& kernel,
                                 RngStream& rng, unsigned workers) {
    if (pool.empty()) throw ConfigError("iterate_pool: pool must be non-empty");
    const std::size_t n = pool.size();
    RngStream call = rng.fork();
    std::vector<double> out(n);
    parallel_for(n, workers, [&](std::size_t i) {
        RngStream sub = call.substream(i);
        const std::size_t j1 = static_cast<std::size_t>(sub.below(n));
        const std::size_t j2 = static_cast<std::size_t>(sub.below(n));
        const RuleSample r = kernel.sample(sub);
        out[i] = r.a0 + r.a1 * pool[j1] + r.a2 * pool[j2];
    });
    return out;
}

EmpiricalMeasure iterate_pool(const EmpiricalMeasure& pool, const Kernel& kernel,
                              RngStream& rng, unsigned workers) {
    std::vector<double> out = iterate_pool(pool.samples(), kernel, rng, workers);
    nlohmann::json meta = pool.meta();
    meta["kernel"] = kernel.describe();
    return EmpiricalMeasure::from_samples(std::move(out), std::move(meta));
}

SteadyResult solve_steady(const Kernel& kernel, const SteadyConfig& config,
                          RngStream& rng, unsigned workers,
                          const InitialDistribution* init_override) {
    if (config.pool_size < 100)
        throw ConfigError("solve_steady: pool_size must be >= 100");
    if (!(config.tol > 0.0)) throw ConfigError("solve_steady: tol must be positive");

    // Convergence licence: q(gamma_check) < 1.
    {
        RngStream probe = rng.substream(0x71c);
        const QEstimate q = q_best(kernel, config.gamma_check, 100000, probe);
        const double margin = q.std_error ? 3.0 * *q.std_error : 0.0;
        if (!(q.value + margin < 1.0))
            throw HypothesisError("solve_steady: q(gamma_check) = " +
                                  std::to_string(q.value) +
                                  " is not < 1; contraction is not licensed");
    }

    // Case selection: forced mean (a/b) versus pinned mean (c).
    double target_mean = 0.0;
    if (config.mean_pin) {
        const auto& f = kernel.facts();
        if (f.mean_sum && *f.mean_sum != 1.0)
            throw ConfigError(
                "solve_steady: mean_pin is only meaningful when E[A1+A2] = 1 "
                "(the mean is otherwise forced to m_bar)");
        if (f.mean_a0 && *f.mean_a0 != 0.0)
            throw ConfigError("solve_steady: mean_pin requires E[A0] = 0");
        target_mean = *config.mean_pin;
    } else {
        target_mean = m_bar(kernel); // throws UndefinedMeanError when E[A1+A2]=1
    }

    std::vector<double> pool(config.pool_size, target_mean);
    if (init_override != nullptr) {
        RngStream init_rng = rng.fork();
        for (std::size_t i = 0; i < pool.size(); ++i)
            pool[i] = init_override->sample(init_rng);
    }
    std::sort(pool.begin(), pool.end());

    SteadyResult result{EmpiricalMeasure::from_samples({0.0}, {}), 0, 0.0, false, {}};
    result.log.reserve(config.max_iters);

    std::vector<double> next;
    for (std::size_t iter = 1; iter <= config.max_iters; ++iter) {
        next = iterate_pool(pool, kernel, rng, workers);
        if (config.mean_pin) {
            const double shift = target_mean - pool_mean(next);
            for (double& v : next) v += shift;
        }
        std::sort(next.begin(), next.end());
        const double gap = sorted_l2(pool, next);
        const double mean = pool_mean(next);
        result.log.push_back({gap, mean, pool_variance(next, mean)});
        pool.swap(next);
        result.iterations = iter;
        result.final_gap = gap;
        if (gap <= config.tol) {
            result.converged = true;
            break;
        }
    }

    nlohmann::json meta;
    meta["kind"] = "steady";
    meta["kernel"] = kernel.describe();
    meta["seed"] = rng.seed();
    meta["iterations"] = result.iterations;
    meta["final_gap"] = result.final_gap;
    meta["converged"] = result.converged;
    if (config.mean_pin) meta["mean_pin"] = *config.mean_pin;
    result.measure = EmpiricalMeasure::from_samples(std::move(pool), std::move(meta));
    return result;
}

double sample_m_star(std::size_t n, const Kernel& kernel, double m, RngStream& rng) {
    if (n > kMStarMaxDepth)
        throw ResourceCapError("sample_m_star: n = " + std::to_string(n) +
                               " exceeds the full-tree cap " +
                               std::to_string(kMStarMaxDepth));
    return m_star_rec(kernel, rng, m, n, 1.0);
}

SteadyMoments steady_moments(const Kernel& kernel, std::optional<double> m0,
                             RngStream* rng, std::size_t mc_reps) {
    // q(2) by the best exact route, Monte Carlo as a last resort.
    double q2 = 0.0;
    if (const auto q = q_exact(kernel, 2.0)) {
        q2 = *q;
    } else {
        if (rng == nullptr)
            throw UnsupportedMethodError(
                "steady_moments: q(2) has no exact route; supply a stream for MC");
        q2 = q_gamma(kernel, 2.0, QMethod::MonteCarlo, mc_reps, rng).value;
    }
    if (!(q2 < 1.0))
        throw InfiniteMomentError(
            "steady_moments: q(2) >= 1, the steady second moment is infinite");

    const auto& f = kernel.facts();
    double mean = 0.0;
    if (f.mean_sum && *f.mean_sum != 1.0) {
        mean = m_bar(kernel);
        if (m0 && std::abs(*m0 - mean) > 1e-12)
            throw HypothesisError(
                "steady_moments: the mean is forced to m_bar; the supplied m0 differs");
    } else if (m0) {
        mean = *m0;
    } else {
        mean = m_bar(kernel); // raises UndefinedMeanError with guidance
    }

    double a0_sq = 0.0, a1a2 = 0.0, a0_sum = 0.0;
    std::optional<double> se;
    if (f.a0_second && f.cross_a1a2 && f.cross_a0_sum) {
        a0_sq = *f.a0_second;
        a1a2 = *f.cross_a1a2;
        a0_sum = *f.cross_a0_sum;
    } else {
        if (rng == nullptr)
            throw UnsupportedMethodError(
                "steady_moments: cross moments undeclared; supply a stream for MC");
        const CrossMomentEstimates est = estimate_cross_moments(kernel, mc_reps, *rng);
        a0_sq = est.a0_second.value;
        a1a2 = est.cross_a1a2.value;
        a0_sum = est.cross_a0_sum.value;
        se = std::sqrt(est.a0_second.std_error * est.a0_second.std_error +
                       std::pow(2.0 * mean * mean * est.cross_a1a2.std_error, 2) +
                       std::pow(2.0 * mean * est.cross_a0_sum.std_error, 2)) /
             (1.0 - q2);
    }

    SteadyMoments out;
    out.mean = mean;
    out.second_moment =
        (a0_sq + 2.0 * a1a2 * mean * mean + 2.0 * a0_sum * mean) / (1.0 - q2);
    out.variance = out.second_moment - mean * mean;
    out.second_moment_se = se;
    return out;
}

} // namespace kacsim
