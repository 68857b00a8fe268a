#include "kacsim/wild.hpp"

#include <cmath>
#include <cstdio>

#include "kacsim/errors.hpp"
#include "kacsim/parallel.hpp"
#include "kacsim/quadrature.hpp"

namespace kacsim {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

} // namespace

InitialDistribution InitialDistribution::point_mass(double m) {
    if (!std::isfinite(m)) throw ConfigError("init point_mass: value must be finite");
    return {Tag::PointMass, m, 0.0};
}

InitialDistribution InitialDistribution::uniform(double a, double b) {
    if (!(a < b)) throw ConfigError("init uniform: requires a < b");
    return {Tag::UniformInterval, a, b};
}

InitialDistribution InitialDistribution::exponential(double mean) {
    if (!(mean > 0.0)) throw ConfigError("init exponential: mean must be positive");
    return {Tag::Exponential, mean, 0.0};
}

InitialDistribution InitialDistribution::gaussian(double mean, double stddev) {
    if (!(stddev >= 0.0)) throw ConfigError("init gaussian: stddev must be >= 0");
    return {Tag::Gaussian, mean, stddev};
}

InitialDistribution InitialDistribution::empirical(std::vector<double> values) {
    if (values.empty())
        throw ConfigError("init empirical: need at least one value");
    for (const double v : values)
        if (!std::isfinite(v)) throw ConfigError("init empirical: values must be finite");
    InitialDistribution d{Tag::Empirical, 0.0, 0.0};
    d.values_ = std::move(values);
    return d;
}

double InitialDistribution::sample(RngStream& rng) const {
    switch (tag_) {
        case Tag::PointMass: return p0_;
        case Tag::UniformInterval: return rng.uniform(p0_, p1_);
        case Tag::Exponential: return rng.exponential(p0_);
        case Tag::Gaussian: return rng.normal(p0_, p1_);
        case Tag::Empirical:
            return values_[static_cast<std::size_t>(rng.below(values_.size()))];
    }
    return 0.0;
}

double InitialDistribution::mean() const {
    switch (tag_) {
        case Tag::PointMass: return p0_;
        case Tag::UniformInterval: return 0.5 * (p0_ + p1_);
        case Tag::Exponential: return p0_;
        case Tag::Gaussian: return p0_;
        case Tag::Empirical: {
            double s = 0.0;
            for (const double v : values_) s += v;
            return s / static_cast<double>(values_.size());
        }
    }
    return 0.0;
}

double InitialDistribution::variance() const {
    switch (tag_) {
        case Tag::PointMass: return 0.0;
        case Tag::UniformInterval: return (p1_ - p0_) * (p1_ - p0_) / 12.0;
        case Tag::Exponential: return p0_ * p0_;
        case Tag::Gaussian: return p1_ * p1_;
        case Tag::Empirical: {
            const double m = mean();
            double s = 0.0;
            for (const double v : values_) s += (v - m) * (v - m);
            return s / static_cast<double>(values_.size());
        }
    }
    return 0.0;
}

std::string InitialDistribution::describe() const {
    switch (tag_) {
        case Tag::PointMass: return "point_mass(" + fmt(p0_) + ")";
        case Tag::UniformInterval: return "uniform(" + fmt(p0_) + "," + fmt(p1_) + ")";
        case Tag::Exponential: return "exponential(" + fmt(p0_) + ")";
        case Tag::Gaussian: return "gaussian(" + fmt(p0_) + "," + fmt(p1_) + ")";
        case Tag::Empirical:
            return "empirical(n=" + std::to_string(values_.size()) + ")";
    }
    return "?";
}

double TreeAccumulator::leaf_abs_moment(double gamma) const {
    double s = 0.0;
    for (const double w : leaves_) s += pow_abs(w, gamma);
    return s;
}

std::uint64_t sample_nu(double t, RngStream& rng) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw ConfigError("sample_nu: t must be finite and >= 0");
    if (t == 0.0) return 0;
    const double fail = -std::expm1(-t); // 1 - e^{-t}, accurately
    if (fail <= 0.0) return 0;
    const double u = rng.uniform01();
    return static_cast<std::uint64_t>(std::floor(std::log(u) / std::log(fail)));
}

double sample_w_star(std::size_t n, const Kernel& kernel,
                     const InitialDistribution& init, RngStream& rng) {
    TreeAccumulator tree;
    for (std::size_t k = 0; k < n; ++k) tree.grow(kernel, rng);
    double w = 0.0;
    for (const double leaf : tree.leaves()) w += leaf * init.sample(rng);
    return w + tree.gamma();
}

EmpiricalMeasure sample_mu_t(double t, const Kernel& kernel,
                             const InitialDistribution& init, std::size_t n_samples,
                             RngStream& rng, unsigned workers, double t_max) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw ConfigError("sample_mu_t: t must be finite and >= 0");
    if (t > t_max)
        throw ResourceCapError("sample_mu_t: t = " + fmt(t) + " exceeds t_max = " +
                               fmt(t_max) +
                               "; expected tree size e^t is impractical, use the "
                               "steady-state solver for long horizons");
    if (n_samples == 0) throw ConfigError("sample_mu_t: n_samples must be >= 1");

    RngStream root = rng.fork();
    std::vector<double> out(n_samples);
    parallel_for(n_samples, workers, [&](std::size_t i) {
        RngStream sub = root.substream(i);
        const std::uint64_t nu = sample_nu(t, sub);
        out[i] = sample_w_star(static_cast<std::size_t>(nu), kernel, init, sub);
    });

    nlohmann::json meta;
    meta["kind"] = "time";
    meta["t"] = t;
    meta["kernel"] = kernel.describe();
    meta["init"] = init.describe();
    meta["seed"] = rng.seed();
    return EmpiricalMeasure::from_samples(std::move(out), std::move(meta));
}

MomentEstimate leaf_weight_moment(std::size_t n, const Kernel& kernel, double gamma,
                                  std::size_t reps, RngStream& rng) {
    if (reps == 0) throw ConfigError("leaf_weight_moment: reps must be >= 1");
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        TreeAccumulator tree;
        for (std::size_t k = 0; k < n; ++k) tree.grow(kernel, rng);
        const double v = tree.leaf_abs_moment(gamma);
        sum += v;
        sumsq += v * v;
    }
    const double nreps = static_cast<double>(reps);
    const double mean = sum / nreps;
    const double var = std::max(0.0, sumsq / nreps - mean * mean);
    return {mean, std::sqrt(var / nreps)};
}

double c_n(double q, std::size_t n) {
    if (!(q > 0.0)) throw ConfigError("c_n: q must be positive");
    double prod = 1.0;
    for (std::size_t j = 1; j <= n; ++j)
        prod *= 1.0 + (q - 1.0) / static_cast<double>(j);
    return prod;
}

} // namespace kacsim
