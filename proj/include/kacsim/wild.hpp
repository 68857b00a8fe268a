#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kacsim/empirical.hpp"
#include "kacsim/kernels.hpp"
#include "kacsim/rng.hpp"

namespace kacsim {

/// Law of the value attached to each leaf of the collision tree (the
/// initial condition of the evolution).
class InitialDistribution {
public:
    static InitialDistribution point_mass(double m);
    static InitialDistribution uniform(double a, double b);
    static InitialDistribution exponential(double mean);
    static InitialDistribution gaussian(double mean, double stddev);
    static InitialDistribution empirical(std::vector<double> values);

    double sample(RngStream& rng) const;
    double mean() const;
    double variance() const;
    std::string describe() const;

private:
    enum class Tag { PointMass, UniformInterval, Exponential, Gaussian, Empirical };
    InitialDistribution(Tag tag, double p0, double p1) : tag_(tag), p0_(p0), p1_(p1) {}

    Tag tag_;
    double p0_ = 0.0;
    double p1_ = 0.0;
    std::vector<double> values_;
};

/// Incremental state of a growing random recursive binary tree. Only the
/// multiset of live leaf weights and the accumulated internal-node
/// contribution are kept; node addresses never materialize.
class TreeAccumulator {
public:
    TreeAccumulator() : leaves_{1.0} {}

    /// One growth step: a uniformly chosen live leaf becomes an internal
    /// node with two children carrying the parent weight times the rule
    /// weights. Uses swap-in-place + push, O(1) per step.
    void grow(const Kernel& kernel, RngStream& rng) {
        const std::size_t i = static_cast<std::size_t>(rng.below(leaves_.size()));
        const RuleSample r = kernel.sample(rng);
        const double w = leaves_[i];
        gamma_ += w * r.a0;
        leaves_[i] = w * r.a1;
        leaves_.push_back(w * r.a2);
        ++internal_;
    }

    const std::vector<double>& leaves() const { return leaves_; }
    double gamma() const { return gamma_; }
    std::size_t internal_nodes() const { return internal_; }

    /// Sum over live leaves of |weight|^gamma (0^0 := 0).
    double leaf_abs_moment(double gamma) const;

private:
    std::vector<double> leaves_;
    double gamma_ = 0.0;
    std::size_t internal_ = 0;
};

/// Number of collision generations active at time t: geometric on
/// {0,1,2,...} with success probability e^{-t}.
std::uint64_t sample_nu(double t, RngStream& rng);

/// One draw of the tree sum: grow n steps, then attach an independent
/// initial draw to every live leaf and add the internal-node contribution.
double sample_w_star(std::size_t n, const Kernel& kernel,
                     const InitialDistribution& init, RngStream& rng);

inline constexpr double kDefaultTMax = 12.0;

/// n_samples independent draws of the time-t solution, each with its own
/// generation count. Per-sample substreams make the result independent of
/// worker scheduling. Refuses t > t_max: expected tree size e^t makes long
/// horizons a job for the steady-state solver.
EmpiricalMeasure sample_mu_t(double t, const Kernel& kernel,
                             const InitialDistribution& init, std::size_t n_samples,
                             RngStream& rng, unsigned workers = 1,
                             double t_max = kDefaultTMax);

/// Monte Carlo estimate of E[sum over leaves of |weight|^gamma] after n
/// growth steps.
MomentEstimate leaf_weight_moment(std::size_t n, const Kernel& kernel, double gamma,
                                  std::size_t reps, RngStream& rng);

/// Expected leaf-weight moment in product form: prod_{j=1..n} (1+(q-1)/j).
/// Stable for all n; equals Gamma(q+n) / (Gamma(n+1) Gamma(q)).
double c_n(double q, std::size_t n);

} // namespace kacsim
