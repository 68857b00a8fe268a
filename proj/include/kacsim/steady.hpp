#pragma once

#include <optional>
#include <vector>

#include "kacsim/empirical.hpp"
#include "kacsim/kernels.hpp"
#include "kacsim/wild.hpp"

namespace kacsim {

struct SteadyConfig {
    std::size_t pool_size = 10000; // >= 100
    std::size_t max_iters = 200;
    double tol = 1e-3;             // l2 between consecutive sorted pools
    std::optional<double> mean_pin; // required iff E[A1+A2] = 1 and E[A0] = 0
    double gamma_check = 2.0;       // exponent whose q < 1 licenses convergence
};

struct IterationStat {
    double gap = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

struct SteadyResult {
    EmpiricalMeasure measure;
    std::size_t iterations = 0;
    double final_gap = 0.0;
    bool converged = false; // false => returned with a non-convergence warning
    std::vector<IterationStat> log;
};

/// One Monte Carlo sweep of the fixed-point map: each output entry is
/// a0 + a1 y1 + a2 y2 with y1, y2 resampled independently with replacement
/// from the input pool and a fresh rule draw.
std::vector<double> iterate_pool(const std::vector<double>& pool, const Kernel& kernel,
                                 RngStream& rng, unsigned workers = 1);

EmpiricalMeasure iterate_pool(const EmpiricalMeasure& pool, const Kernel& kernel,
                              RngStream& rng, unsigned workers = 1);

/// Population-dynamics solve of the distributional fixed point. The pool
/// starts at the forced mean (or the pinned mean, or draws from
/// init_override); with mean_pin set, the pool is recentred additively after
/// every sweep. Stops when the sorted-pool l2 gap falls below tol.
SteadyResult solve_steady(const Kernel& kernel, const SteadyConfig& config,
                          RngStream& rng, unsigned workers = 1,
                          const InitialDistribution* init_override = nullptr);

inline constexpr std::size_t kMStarMaxDepth = 22;

/// One draw from the n-th iterate of the fixed-point map started at a point
/// mass: depth-first pass over the complete binary tree of depth n carrying
/// the running weight product. Cost 2^n, capped at n <= 22.
double sample_m_star(std::size_t n, const Kernel& kernel, double m, RngStream& rng);

struct SteadyMoments {
    double mean = 0.0;
    double second_moment = 0.0;
    double variance = 0.0;
    // Set when any ingredient came from Monte Carlo rather than declared
    // facts: propagated standard error of the second moment.
    std::optional<double> second_moment_se;
};

/// Closed-form steady moments from the fixed-point identity
/// X =d A0 + A1 X1 + A2 X2: second moment
/// (E[A0^2] + 2 E[A1A2] mean^2 + 2 E[A0(A1+A2)] mean) / (1 - q(2)).
/// Cross moments come from declared facts, else Monte Carlo on `rng`.
/// Throws InfiniteMomentError when q(2) >= 1.
SteadyMoments steady_moments(const Kernel& kernel, std::optional<double> m0,
                             RngStream* rng = nullptr, std::size_t mc_reps = 200000);

} // namespace kacsim
