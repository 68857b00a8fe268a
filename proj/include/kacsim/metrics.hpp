#pragma once

#include <cstdint>
#include <vector>

#include "kacsim/empirical.hpp"
#include "kacsim/kernels.hpp"
#include "kacsim/wild.hpp"

namespace kacsim {

enum class WassersteinMode {
    Sorted,    // comonotone coupling: exact for gamma >= 1, upper bound below
    ExactSmall // assignment problem over all pairings; counts <= 256
};

/// Kantorovich-Wasserstein distance of order gamma between equal-size
/// empirical measures: (mean cost)^{1/gamma} for gamma >= 1, plain mean cost
/// for gamma < 1. Sorted mode pairs order statistics; for concave cost
/// (gamma < 1) that is only an upper bound of the true infimum, which
/// ExactSmall computes by solving the assignment problem.
double wasserstein(double gamma, const EmpiricalMeasure& x, const EmpiricalMeasure& y,
                   WassersteinMode mode = WassersteinMode::Sorted);

/// Same on raw sorted arrays (no validation beyond equal size).
double wasserstein_sorted(double gamma, const std::vector<double>& x_sorted,
                          const std::vector<double>& y_sorted);

/// Minimum total cost of a perfect assignment on an n x n row-major cost
/// matrix (shortest augmenting paths, O(n^3)).
double assignment_cost(const std::vector<double>& cost, std::size_t n);

struct ContractionOptions {
    double slack = 0.15;        // multiplicative slack on the bound
    double mc_floor_mult = 3.0; // additive floor = mult x bootstrap SE
    std::size_t bootstrap = 80; // bootstrap replicates for the SE
    unsigned workers = 1;
    double t_max = kDefaultTMax;
};

struct ContractionPoint {
    double t = 0.0;
    double observed = 0.0;  // l_gamma(mu_t, ref)
    double bound = 0.0;     // prefactor * l_gamma(mu_0, ref) * exp(-rate t)
    double mc_floor = 0.0;  // mc_floor_mult x bootstrap SE of `observed`
    bool pass = false;
};

struct ContractionReport {
    double gamma = 0.0;
    double q = 0.0;         // q(gamma) used in the rate
    double rate = 0.0;      // 1-q(gamma), divided by gamma when gamma > 1
    double prefactor = 1.0; // 1 for gamma <= 1, 2^{1/gamma} above
    double initial_distance = 0.0; // l_gamma(mu_0, ref)
    std::vector<ContractionPoint> points;
    bool all_pass = false;
};

/// Samples mu_t on the given time grid and checks the exponential
/// contraction bound of the matching regime against the fixed steady
/// reference. Hypothesis violations (q >= 1, wrong mean, gamma out of
/// (0,2]) raise HypothesisError naming the failed condition.
ContractionReport contraction_check(const Kernel& kernel,
                                    const InitialDistribution& init, double gamma,
                                    const std::vector<double>& times,
                                    std::size_t n_samples,
                                    const EmpiricalMeasure& steady_ref, RngStream& rng,
                                    const ContractionOptions& options = {});

} // namespace kacsim
