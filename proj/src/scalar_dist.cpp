#include "kacsim/scalar_dist.hpp"

#include <cmath>
#include <cstdio>

#include "kacsim/errors.hpp"
#include "kacsim/quadrature.hpp"

namespace kacsim {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

// Antiderivative of |x|^gamma: sign(x)|x|^{gamma+1}/(gamma+1).
double abs_pow_primitive(double x, double gamma) {
    if (x == 0.0) return 0.0;
    const double s = x > 0.0 ? 1.0 : -1.0;
    return s * std::pow(std::abs(x), gamma + 1.0) / (gamma + 1.0);
}

// E[|c + d U|^gamma] for U ~ Uniform[0,1].
double uniform_abs_moment(double c, double d, double gamma) {
    if (d == 0.0) return pow_abs(c, gamma);
    const double lo = std::min(c, c + d);
    const double hi = std::max(c, c + d);
    return (abs_pow_primitive(hi, gamma) - abs_pow_primitive(lo, gamma)) / (hi - lo);
}

} // namespace

ScalarDistribution ScalarDistribution::point_mass(double value) {
    if (!std::isfinite(value)) throw ConfigError("point_mass: value must be finite");
    return {Tag::PointMass, value, 0.0};
}

ScalarDistribution ScalarDistribution::uniform01() {
    return {Tag::UniformOn01, 0.0, 1.0};
}

ScalarDistribution ScalarDistribution::uniform(double a, double b) {
    if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
        throw ConfigError("uniform: requires finite a < b");
    return {Tag::UniformInterval, a, b};
}

ScalarDistribution ScalarDistribution::bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("bernoulli: p must lie in [0,1]");
    return {Tag::Bernoulli, p, 0.0};
}

ScalarDistribution ScalarDistribution::symmetric_two_point(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw ConfigError("symmetric_two_point: x must lie in [0,1]");
    return {Tag::SymmetricTwoPoint, x, 0.0};
}

ScalarDistribution ScalarDistribution::exponential(double mean) {
    if (!(mean > 0.0) || !std::isfinite(mean))
        throw ConfigError("exponential: mean must be positive");
    return {Tag::Exponential, mean, 0.0};
}

ScalarDistribution ScalarDistribution::gaussian(double mean, double stddev) {
    if (!(stddev >= 0.0) || !std::isfinite(mean) || !std::isfinite(stddev))
        throw ConfigError("gaussian: stddev must be >= 0");
    return {Tag::Gaussian, mean, stddev};
}

ScalarDistribution ScalarDistribution::rademacher(double scale) {
    if (!(scale >= 0.0) || !std::isfinite(scale))
        throw ConfigError("rademacher: scale must be >= 0");
    return {Tag::Rademacher, scale, 0.0};
}

double ScalarDistribution::sample(RngStream& rng) const {
    switch (tag_) {
        case Tag::PointMass: return p0_;
        case Tag::UniformOn01: return rng.uniform01();
        case Tag::UniformInterval: return rng.uniform(p0_, p1_);
        case Tag::Bernoulli: return rng.uniform01() < p0_ ? 1.0 : 0.0;
        case Tag::SymmetricTwoPoint: return rng.uniform01() < 0.5 ? p0_ : 1.0 - p0_;
        case Tag::Exponential: return rng.exponential(p0_);
        case Tag::Gaussian: return rng.normal(p0_, p1_);
        case Tag::Rademacher: return rng.uniform01() < 0.5 ? -p0_ : p0_;
    }
    return 0.0;
}

double ScalarDistribution::mean() const {
    switch (tag_) {
        case Tag::PointMass: return p0_;
        case Tag::UniformOn01: return 0.5;
        case Tag::UniformInterval: return 0.5 * (p0_ + p1_);
        case Tag::Bernoulli: return p0_;
        case Tag::SymmetricTwoPoint: return 0.5;
        case Tag::Exponential: return p0_;
        case Tag::Gaussian: return p0_;
        case Tag::Rademacher: return 0.0;
    }
    return 0.0;
}

double ScalarDistribution::second_moment() const {
    switch (tag_) {
        case Tag::PointMass: return p0_ * p0_;
        case Tag::UniformOn01: return 1.0 / 3.0;
        case Tag::UniformInterval:
            return (p0_ * p0_ + p0_ * p1_ + p1_ * p1_) / 3.0;
        case Tag::Bernoulli: return p0_;
        case Tag::SymmetricTwoPoint: {
            const double y = 1.0 - p0_;
            return 0.5 * (p0_ * p0_ + y * y);
        }
        case Tag::Exponential: return 2.0 * p0_ * p0_;
        case Tag::Gaussian: return p0_ * p0_ + p1_ * p1_;
        case Tag::Rademacher: return p0_ * p0_;
    }
    return 0.0;
}

std::optional<double> ScalarDistribution::abs_moment_affine(double c, double d,
                                                            double gamma) const {
    switch (tag_) {
        case Tag::PointMass: return pow_abs(c + d * p0_, gamma);
        case Tag::UniformOn01: return uniform_abs_moment(c, d, gamma);
        case Tag::UniformInterval:
            return uniform_abs_moment(c + d * p0_, d * (p1_ - p0_), gamma);
        case Tag::Bernoulli:
            return (1.0 - p0_) * pow_abs(c, gamma) + p0_ * pow_abs(c + d, gamma);
        case Tag::SymmetricTwoPoint:
            return 0.5 * (pow_abs(c + d * p0_, gamma) +
                          pow_abs(c + d * (1.0 - p0_), gamma));
        case Tag::Rademacher:
            return 0.5 * (pow_abs(c - d * p0_, gamma) + pow_abs(c + d * p0_, gamma));
        case Tag::Exponential:
        case Tag::Gaussian:
            return std::nullopt;
    }
    return std::nullopt;
}

bool ScalarDistribution::symmetric_about_half_on_unit() const {
    switch (tag_) {
        case Tag::PointMass: return p0_ == 0.5;
        case Tag::UniformOn01: return true;
        case Tag::UniformInterval:
            return p0_ >= 0.0 && p1_ <= 1.0 && p0_ + p1_ == 1.0;
        case Tag::Bernoulli: return p0_ == 0.5;
        case Tag::SymmetricTwoPoint: return true;
        default: return false;
    }
}

bool ScalarDistribution::nonnegative() const {
    switch (tag_) {
        case Tag::PointMass: return p0_ >= 0.0;
        case Tag::UniformOn01: return true;
        case Tag::UniformInterval: return p0_ >= 0.0;
        case Tag::Bernoulli: return true;
        case Tag::SymmetricTwoPoint: return true;
        case Tag::Exponential: return true;
        case Tag::Gaussian: return p1_ == 0.0 && p0_ >= 0.0;
        case Tag::Rademacher: return p0_ == 0.0;
    }
    return false;
}

std::string ScalarDistribution::describe() const {
    switch (tag_) {
        case Tag::PointMass: return "point_mass(" + fmt(p0_) + ")";
        case Tag::UniformOn01: return "uniform01";
        case Tag::UniformInterval: return "uniform(" + fmt(p0_) + "," + fmt(p1_) + ")";
        case Tag::Bernoulli: return "bernoulli(" + fmt(p0_) + ")";
        case Tag::SymmetricTwoPoint: return "symmetric_two_point(" + fmt(p0_) + ")";
        case Tag::Exponential: return "exponential(" + fmt(p0_) + ")";
        case Tag::Gaussian: return "gaussian(" + fmt(p0_) + "," + fmt(p1_) + ")";
        case Tag::Rademacher: return "rademacher(" + fmt(p0_) + ")";
    }
    return "?";
}

} // namespace kacsim
