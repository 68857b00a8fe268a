#pragma once

#include <optional>
#include <string>

#include "kacsim/rng.hpp"

namespace kacsim {

/// One-dimensional distribution used for kernel ingredients: noise terms
/// eta, additive backgrounds A0, taxation amounts. Closed under nothing;
/// just a tagged union with samplers and the low moments each variant
/// knows analytically.
class ScalarDistribution {
public:
    enum class Tag {
        PointMass,        // delta at value
        UniformOn01,      // U[0,1]
        UniformInterval,  // U[a,b]
        Bernoulli,        // {0,1} with P{1} = p
        SymmetricTwoPoint, // {x, 1-x} with probability 1/2 each
        Exponential,      // mean > 0, support (0,inf)
        Gaussian,         // mean, stddev
        Rademacher,       // {-s, +s} with probability 1/2 each
    };

    static ScalarDistribution point_mass(double value);
    static ScalarDistribution uniform01();
    static ScalarDistribution uniform(double a, double b);
    static ScalarDistribution bernoulli(double p);
    static ScalarDistribution symmetric_two_point(double x);
    static ScalarDistribution exponential(double mean);
    static ScalarDistribution gaussian(double mean, double stddev);
    static ScalarDistribution rademacher(double scale);

    Tag tag() const { return tag_; }
    double param(int i) const { return i == 0 ? p0_ : p1_; }

    double sample(RngStream& rng) const;
    double mean() const;
    double second_moment() const;
    double variance() const { return second_moment() - mean() * mean(); }

    /// E[|c + d X|^gamma] in closed form, when the variant admits one.
    std::optional<double> abs_moment_affine(double c, double d, double gamma) const;

    /// True when the law is symmetric about 1/2 with support in [0,1]
    /// (the admissible class for exchange-noise eta).
    bool symmetric_about_half_on_unit() const;

    /// True when the support is contained in [0, inf).
    bool nonnegative() const;

    std::string describe() const;

private:
    ScalarDistribution(Tag tag, double p0, double p1) : tag_(tag), p0_(p0), p1_(p1) {}

    Tag tag_;
    double p0_ = 0.0;
    double p1_ = 0.0;
};

} // namespace kacsim
