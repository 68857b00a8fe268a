#include "kacsim/kernels.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <utility>

#include "kacsim/errors.hpp"
#include "kacsim/quadrature.hpp"

namespace kacsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

// q(gamma) of the angle family via the Beta function:
// (2/pi) Int_0^{2pi} -> (2/sqrt(pi)) Gamma((a+1)/2) / Gamma(a/2+1), a=(p+1)gamma.
double theta_q_closed(double p, double gamma) {
    const double a = (p + 1.0) * gamma;
    return 2.0 / std::sqrt(std::numbers::pi) *
           std::exp(std::lgamma(0.5 * (a + 1.0)) - std::lgamma(0.5 * a + 1.0));
}

void require_additive_free(const KernelPtr& base, const char* who) {
    const auto& f = base->facts();
    if ((f.mean_a0 && *f.mean_a0 != 0.0) || (f.a0_second && *f.a0_second != 0.0)) {
        throw ConfigError(std::string(who) +
                          ": base rule must have no additive part (A0 = 0)");
    }
}

void require_base_mean_sum(const KernelPtr& base, double expected, const char* who) {
    const auto& f = base->facts();
    if (f.mean_sum && std::abs(*f.mean_sum - expected) > 1e-12) {
        throw ConfigError(std::string(who) + ": base rule must satisfy E[A1+A2] = " +
                          fmt(expected) + ", got " + fmt(*f.mean_sum));
    }
}

// ---------------------------------------------------------------------------

class KacClassicalKernel final : public Kernel {
public:
    KacClassicalKernel() {
        facts_.mean_sum = 0.0;
        facts_.mean_a0 = 0.0;
        facts_.a0_second = 0.0;
        facts_.cross_a1a2 = 0.0;
        facts_.cross_a0_sum = 0.0;
    }

    RuleSample sample(RngStream& rng) const override {
        return kac_rule_at(rng.uniform(0.0, 2.0 * std::numbers::pi));
    }

    std::string describe() const override { return "kac_classical"; }

    std::optional<double> q_closed(double gamma) const override {
        return theta_q_closed(0.0, gamma);
    }

    std::optional<double> theta_power() const override { return 0.0; }
};

class InelasticKacKernel final : public Kernel {
public:
    InelasticKacKernel(double p, std::optional<ScalarDistribution> background)
        : p_(p), bg_(std::move(background)) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw ConfigError("inelastic_kac: p must be >= 0");
        facts_.mean_sum = 0.0;
        facts_.mean_a0 = bg_ ? bg_->mean() : 0.0;
        facts_.a0_second = bg_ ? bg_->second_moment() : 0.0;
        facts_.cross_a1a2 = 0.0;
        facts_.cross_a0_sum = 0.0; // independent background, E[A1+A2] = 0
    }

    RuleSample sample(RngStream& rng) const override {
        RuleSample r = inelastic_rule_at(p_, rng.uniform(0.0, 2.0 * std::numbers::pi));
        if (bg_) r.a0 = bg_->sample(rng);
        return r;
    }

    std::string describe() const override {
        std::string s = "inelastic_kac(p=" + fmt(p_);
        if (bg_) s += ",background=" + bg_->describe();
        return s + ")";
    }

    std::optional<double> q_closed(double gamma) const override {
        return theta_q_closed(p_, gamma);
    }

    std::optional<double> theta_power() const override { return p_; }

private:
    double p_;
    std::optional<ScalarDistribution> bg_;
};

class SavingPropensityKernel final : public Kernel {
public:
    SavingPropensityKernel(double lambda, ScalarDistribution eta)
        : lambda_(lambda), eta_(std::move(eta)) {
        if (!(lambda >= 0.0 && lambda <= 1.0))
            throw ConfigError("saving_propensity: lambda must lie in [0,1]");
        if (!eta_.symmetric_about_half_on_unit())
            throw ConfigError(
                "saving_propensity: eta must be symmetric about 1/2 with support in [0,1]");
        facts_.mean_sum = 1.0;
        facts_.mean_a0 = 0.0;
        facts_.a0_second = 0.0;
        facts_.cross_a1a2 = 0.5 * lambda * (1.0 - lambda) +
                            (1.0 - lambda) * (1.0 - lambda) * eta_.second_moment();
        facts_.cross_a0_sum = 0.0;
        facts_.nonnegative = true;
    }

    RuleSample sample(RngStream& rng) const override {
        const double eta = eta_.sample(rng);
        return {0.0, lambda_ + eta * (1.0 - lambda_), eta * (1.0 - lambda_)};
    }

    std::string describe() const override {
        return "saving_propensity(lambda=" + fmt(lambda_) + ",eta=" + eta_.describe() + ")";
    }

    std::optional<double> q_closed(double gamma) const override {
        const auto m1 = eta_.abs_moment_affine(lambda_, 1.0 - lambda_, gamma);
        const auto m2 = eta_.abs_moment_affine(0.0, 1.0 - lambda_, gamma);
        if (!m1 || !m2) return std::nullopt;
        return *m1 + *m2;
    }

private:
    double lambda_;
    ScalarDistribution eta_;
};

class PureGamblingKernel final : public Kernel {
public:
    explicit PureGamblingKernel(ScalarDistribution eta) : eta_(std::move(eta)) {
        facts_.mean_sum = 2.0 * eta_.mean();
        facts_.mean_a0 = 0.0;
        facts_.a0_second = 0.0;
        facts_.cross_a1a2 = eta_.second_moment();
        facts_.cross_a0_sum = 0.0;
        facts_.nonnegative = eta_.nonnegative();
    }

    RuleSample sample(RngStream& rng) const override {
        const double eta = eta_.sample(rng);
        return {0.0, eta, eta};
    }

    std::string describe() const override {
        return "pure_gambling(eta=" + eta_.describe() + ")";
    }

    std::optional<double> q_closed(double gamma) const override {
        const auto m = eta_.abs_moment_affine(0.0, 1.0, gamma);
        if (!m) return std::nullopt;
        return 2.0 * *m;
    }

private:
    ScalarDistribution eta_;
};

// Common storage for rules that decorate a base rule.
class WrapperKernel : public Kernel {
public:
    explicit WrapperKernel(KernelPtr base) : base_(std::move(base)) {
        if (!base_) throw ConfigError("wrapped rule: base must not be null");
    }
    const Kernel* base() const override { return base_.get(); }

protected:
    KernelPtr base_;
};

class RedistributionFullKernel final : public WrapperKernel {
public:
    RedistributionFullKernel(KernelPtr base, double eps, ScalarDistribution a0dist)
        : WrapperKernel(std::move(base)), eps_(eps), a0_(std::move(a0dist)) {
        if (!(eps > 0.0 && eps < 1.0))
            throw ConfigError("redistribution_full: eps must lie in (0,1)");
        require_additive_free(base_, "redistribution_full");
        const auto& bf = base_->facts();
        if (bf.mean_sum) facts_.mean_sum = (1.0 - eps) * *bf.mean_sum;
        facts_.mean_a0 = eps * a0_.mean();
        facts_.a0_second = eps * eps * a0_.second_moment();
        if (bf.cross_a1a2) facts_.cross_a1a2 = (1.0 - eps) * (1.0 - eps) * *bf.cross_a1a2;
        if (bf.mean_sum)
            facts_.cross_a0_sum = eps * (1.0 - eps) * a0_.mean() * *bf.mean_sum;
        facts_.nonnegative = bf.nonnegative && a0_.nonnegative();
    }

    RuleSample sample(RngStream& rng) const override {
        const RuleSample b = base_->sample(rng);
        const double t = a0_.sample(rng);
        return {eps_ * t, (1.0 - eps_) * b.a1, (1.0 - eps_) * b.a2};
    }

    std::string describe() const override {
        return "redistribution_full(eps=" + fmt(eps_) + ",a0=" + a0_.describe() +
               ",base=" + base_->describe() + ")";
    }

    std::optional<double> q_factor(double gamma) const override {
        return std::pow(1.0 - eps_, gamma);
    }

private:
    double eps_;
    ScalarDistribution a0_;
};

class RedistributionBernoulliKernel final : public WrapperKernel {
public:
    RedistributionBernoulliKernel(KernelPtr base, double eps, double delta,
                                  ScalarDistribution a0dist)
        : WrapperKernel(std::move(base)), eps_(eps), delta_(delta), a0_(std::move(a0dist)) {
        if (!(eps > 0.0 && eps < 1.0))
            throw ConfigError("redistribution_bernoulli: eps must lie in (0,1)");
        if (!(delta >= 0.0 && delta <= 1.0))
            throw ConfigError("redistribution_bernoulli: delta must lie in [0,1]");
        require_additive_free(base_, "redistribution_bernoulli");
        const auto& bf = base_->facts();
        const double scale1 = 1.0 - eps * delta;              // E[1 - eps D]
        const double scale2 = 1.0 - delta + delta * (1.0 - eps) * (1.0 - eps);
        if (bf.mean_sum) facts_.mean_sum = scale1 * *bf.mean_sum;
        facts_.mean_a0 = eps * delta * a0_.mean();
        facts_.a0_second = eps * eps * delta * a0_.second_moment();
        if (bf.cross_a1a2) facts_.cross_a1a2 = scale2 * *bf.cross_a1a2;
        if (bf.mean_sum)
            facts_.cross_a0_sum =
                eps * delta * (1.0 - eps) * a0_.mean() * *bf.mean_sum;
        facts_.nonnegative = bf.nonnegative && a0_.nonnegative();
    }

    RuleSample sample(RngStream& rng) const override {
        const RuleSample b = base_->sample(rng);
        const double d = rng.uniform01() < delta_ ? 1.0 : 0.0;
        const double t = a0_.sample(rng); // drawn unconditionally: fixed arity
        const double s = 1.0 - eps_ * d;
        return {eps_ * d * t, s * b.a1, s * b.a2};
    }

    std::string describe() const override {
        return "redistribution_bernoulli(eps=" + fmt(eps_) + ",delta=" + fmt(delta_) +
               ",a0=" + a0_.describe() + ",base=" + base_->describe() + ")";
    }

    std::optional<double> q_factor(double gamma) const override {
        return 1.0 + delta_ * (std::pow(1.0 - eps_, gamma) - 1.0);
    }

private:
    double eps_;
    double delta_;
    ScalarDistribution a0_;
};

class ChiMinusOneKernel final : public WrapperKernel {
public:
    ChiMinusOneKernel(KernelPtr base, double eps)
        : WrapperKernel(std::move(base)), eps_(eps) {
        if (!(eps > 0.0 && eps < 1.0))
            throw ConfigError("chi_minus_one: eps must lie in (0,1)");
        require_additive_free(base_, "chi_minus_one");
        require_base_mean_sum(base_, 1.0 - eps, "chi_minus_one");
        const auto& bf = base_->facts();
        if (bf.mean_sum) facts_.mean_sum = *bf.mean_sum / (1.0 - eps); // = 1
        facts_.mean_a0 = 0.0;
        facts_.a0_second = 0.0;
        if (bf.cross_a1a2 && 2.0 * eps < 1.0)
            facts_.cross_a1a2 = *bf.cross_a1a2 / (1.0 - 2.0 * eps);
        facts_.cross_a0_sum = 0.0;
        facts_.nonnegative = bf.nonnegative;
    }

    RuleSample sample(RngStream& rng) const override {
        const RuleSample b = base_->sample(rng);
        const double f = std::pow(rng.uniform01(), -eps_);
        return {0.0, f * b.a1, f * b.a2};
    }

    std::string describe() const override {
        return "chi_minus_one(eps=" + fmt(eps_) + ",base=" + base_->describe() + ")";
    }

    std::optional<double> q_factor(double gamma) const override {
        const double e = eps_ * gamma;
        return e < 1.0 ? 1.0 / (1.0 - e) : kInf;
    }

private:
    double eps_;
};

class ChiZeroKernel final : public WrapperKernel {
public:
    ChiZeroKernel(KernelPtr base, double eps, double m0)
        : WrapperKernel(std::move(base)), eps_(eps), m0_(m0) {
        if (!(eps > 0.0 && eps < 1.0))
            throw ConfigError("chi_zero: eps must lie in (0,1)");
        if (!(m0 > 0.0)) throw ConfigError("chi_zero: m0 must be positive");
        require_additive_free(base_, "chi_zero");
        require_base_mean_sum(base_, 1.0 - eps, "chi_zero");
        const auto& bf = base_->facts();
        facts_.mean_sum = bf.mean_sum;
        facts_.mean_a0 = eps * m0;
        facts_.a0_second = 2.0 * eps * m0 * eps * m0;
        facts_.cross_a1a2 = bf.cross_a1a2;
        if (bf.mean_sum) facts_.cross_a0_sum = eps * m0 * *bf.mean_sum;
        facts_.nonnegative = bf.nonnegative;
    }

    RuleSample sample(RngStream& rng) const override {
        RuleSample b = base_->sample(rng);
        b.a0 = rng.exponential(eps_ * m0_);
        return b;
    }

    std::string describe() const override {
        return "chi_zero(eps=" + fmt(eps_) + ",m0=" + fmt(m0_) +
               ",base=" + base_->describe() + ")";
    }

    std::optional<double> q_factor(double /*gamma*/) const override { return 1.0; }

private:
    double eps_;
    double m0_;
};

class ChiGeneralKernel final : public WrapperKernel {
public:
    ChiGeneralKernel(KernelPtr base, double eps, double chi, double m0)
        : WrapperKernel(std::move(base)), eps_(eps), chi_(chi), m0_(m0),
          delta_(eps * chi) {
        if (!(eps > 0.0 && eps <= 1.0))
            throw ConfigError("chi_general: eps must lie in (0,1]");
        if (!(chi > -1.0) || chi == 0.0)
            throw ConfigError("chi_general: chi must be > -1 and != 0");
        if (!std::isfinite(m0)) throw ConfigError("chi_general: m0 must be finite");
        require_additive_free(base_, "chi_general");
        require_base_mean_sum(base_, 1.0 - eps, "chi_general");
        const double c = (delta_ + eps) / delta_;
        const auto& bf = base_->facts();
        if (bf.mean_sum) facts_.mean_sum = *bf.mean_sum / (1.0 + delta_);
        facts_.mean_a0 = c * m0 * (delta_ / (1.0 + delta_));
        if (1.0 + 2.0 * delta_ > 0.0) {
            facts_.a0_second =
                c * c * m0 * m0 *
                (1.0 - 2.0 / (1.0 + delta_) + 1.0 / (1.0 + 2.0 * delta_));
            if (bf.cross_a1a2)
                facts_.cross_a1a2 = *bf.cross_a1a2 / (1.0 + 2.0 * delta_);
            if (bf.mean_sum)
                facts_.cross_a0_sum =
                    (1.0 / (1.0 + delta_) - 1.0 / (1.0 + 2.0 * delta_)) * c * m0 *
                    *bf.mean_sum;
        }
        facts_.nonnegative = bf.nonnegative && m0 >= 0.0;
    }

    RuleSample sample(RngStream& rng) const override {
        const RuleSample b = base_->sample(rng);
        const double f = std::pow(rng.uniform01(), delta_);
        const double a0 = (1.0 - f) * ((delta_ + eps_) / delta_) * m0_;
        return {a0, f * b.a1, f * b.a2};
    }

    std::string describe() const override {
        return "chi_general(eps=" + fmt(eps_) + ",chi=" + fmt(chi_) + ",m0=" + fmt(m0_) +
               ",base=" + base_->describe() + ")";
    }

    std::optional<double> q_factor(double gamma) const override {
        const double e = delta_ * gamma;
        return e > -1.0 ? 1.0 / (1.0 + e) : kInf;
    }

private:
    double eps_;
    double chi_;
    double m0_;
    double delta_;
};

class ThermalBathDiffKernel final : public WrapperKernel {
public:
    ThermalBathDiffKernel(KernelPtr base, double a, double b)
        : WrapperKernel(std::move(base)), a_(a), b_(b) {
        if (!(a > 0.0) || !(b > 0.0))
            throw ConfigError("thermal_bath_diff: a and b must be positive");
        require_additive_free(base_, "thermal_bath_diff");
        const auto& bf = base_->facts();
        facts_.mean_sum = bf.mean_sum;
        facts_.mean_a0 = a - b;
        facts_.a0_second = 2.0 * a * a + 2.0 * b * b - 2.0 * a * b;
        facts_.cross_a1a2 = bf.cross_a1a2;
        if (bf.mean_sum) facts_.cross_a0_sum = (a - b) * *bf.mean_sum;
    }

    RuleSample sample(RngStream& rng) const override {
        RuleSample s = base_->sample(rng);
        const double x = rng.exponential(a_);
        const double y = rng.exponential(b_);
        s.a0 = x - y;
        return s;
    }

    std::string describe() const override {
        return "thermal_bath_diff(a=" + fmt(a_) + ",b=" + fmt(b_) +
               ",base=" + base_->describe() + ")";
    }

    std::optional<double> q_factor(double /*gamma*/) const override { return 1.0; }

private:
    double a_;
    double b_;
};

class DegeneratePinKernel final : public WrapperKernel {
public:
    DegeneratePinKernel(KernelPtr base, double m)
        : WrapperKernel(std::move(base)), m_(m) {
        if (!std::isfinite(m)) throw ConfigError("degenerate_pin: m must be finite");
        require_additive_free(base_, "degenerate_pin");
        const auto& bf = base_->facts();
        facts_.mean_sum = bf.mean_sum;
        if (bf.mean_sum) facts_.mean_a0 = m * (1.0 - *bf.mean_sum);
        // E[(A1+A2)^2] = q(2) + 2 E[A1 A2] when both are known.
        const auto q2 = q_exact(*base_, 2.0);
        if (q2 && bf.cross_a1a2 && bf.mean_sum) {
            const double s2 = *q2 + 2.0 * *bf.cross_a1a2;
            facts_.a0_second = m_ * m_ * (1.0 - 2.0 * *bf.mean_sum + s2);
            facts_.cross_a0_sum = m_ * (*bf.mean_sum - s2);
        }
        facts_.cross_a1a2 = bf.cross_a1a2;
    }

    RuleSample sample(RngStream& rng) const override {
        RuleSample s = base_->sample(rng);
        s.a0 = m_ * (1.0 - s.a1 - s.a2);
        return s;
    }

    std::string describe() const override {
        return "degenerate_pin(m=" + fmt(m_) + ",base=" + base_->describe() + ")";
    }

    std::optional<double> q_factor(double /*gamma*/) const override { return 1.0; }

private:
    double m_;
};

class CustomKernel final : public Kernel {
public:
    CustomKernel(std::string name, std::function<RuleSample(RngStream&)> sampler,
                 KernelFacts facts, std::function<double(double)> q_closed_form)
        : name_(std::move(name)), sampler_(std::move(sampler)),
          q_closed_(std::move(q_closed_form)) {
        if (!sampler_) throw ConfigError("custom: sampler must not be null");
        facts_ = facts;
    }

    RuleSample sample(RngStream& rng) const override { return sampler_(rng); }

    std::string describe() const override { return "custom(" + name_ + ")"; }

    std::optional<double> q_closed(double gamma) const override {
        if (!q_closed_) return std::nullopt;
        return q_closed_(gamma);
    }

private:
    std::string name_;
    std::function<RuleSample(RngStream&)> sampler_;
    std::function<double(double)> q_closed_;
};

// Walk to the leaf rule, multiplying the analytic factors of every wrapper.
std::pair<double, const Kernel*> unwrap_factor(const Kernel& kernel, double gamma) {
    double factor = 1.0;
    const Kernel* node = &kernel;
    while (node->base() != nullptr) {
        const auto f = node->q_factor(gamma);
        if (!f)
            throw UnsupportedMethodError(
                "q_gamma: wrapped rule lacks an analytic moment factor: " +
                node->describe());
        factor *= *f;
        node = node->base();
    }
    return {factor, node};
}

} // namespace

// ---------------------------------------------------------------------------

KernelPtr kac_classical() { return std::make_shared<KacClassicalKernel>(); }

KernelPtr inelastic_kac(double p, std::optional<ScalarDistribution> background) {
    return std::make_shared<InelasticKacKernel>(p, std::move(background));
}

KernelPtr saving_propensity(double lambda, ScalarDistribution eta) {
    return std::make_shared<SavingPropensityKernel>(lambda, std::move(eta));
}

KernelPtr pure_gambling(ScalarDistribution eta) {
    return std::make_shared<PureGamblingKernel>(std::move(eta));
}

KernelPtr redistribution_full(KernelPtr base, double eps, ScalarDistribution a0dist) {
    return std::make_shared<RedistributionFullKernel>(std::move(base), eps,
                                                      std::move(a0dist));
}

KernelPtr redistribution_bernoulli(KernelPtr base, double eps, double delta,
                                   ScalarDistribution a0dist) {
    return std::make_shared<RedistributionBernoulliKernel>(std::move(base), eps, delta,
                                                           std::move(a0dist));
}

KernelPtr chi_minus_one(KernelPtr base, double eps) {
    return std::make_shared<ChiMinusOneKernel>(std::move(base), eps);
}

KernelPtr chi_zero(KernelPtr base, double eps, double m0) {
    return std::make_shared<ChiZeroKernel>(std::move(base), eps, m0);
}

KernelPtr chi_general(KernelPtr base, double eps, double chi, double m0) {
    return std::make_shared<ChiGeneralKernel>(std::move(base), eps, chi, m0);
}

KernelPtr thermal_bath_diff(KernelPtr base, double a, double b) {
    return std::make_shared<ThermalBathDiffKernel>(std::move(base), a, b);
}

KernelPtr degenerate_pin(KernelPtr base, double m) {
    return std::make_shared<DegeneratePinKernel>(std::move(base), m);
}

KernelPtr custom(std::string name, std::function<RuleSample(RngStream&)> sampler,
                 KernelFacts facts, std::function<double(double)> q_closed_form) {
    return std::make_shared<CustomKernel>(std::move(name), std::move(sampler), facts,
                                          std::move(q_closed_form));
}

RuleSample kac_rule_at(double theta) {
    return {0.0, std::sin(theta), std::cos(theta)};
}

RuleSample inelastic_rule_at(double p, double theta) {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    return {0.0, pow_abs(s, p) * s, pow_abs(c, p) * c};
}

// ---------------------------------------------------------------------------

RuleSample sample_rule(const Kernel& kernel, RngStream& rng) {
    return kernel.sample(rng);
}

QEstimate q_gamma(const Kernel& kernel, double gamma, QMethod method,
                  std::size_t mc_reps, RngStream* rng) {
    if (!(gamma > 0.0)) throw ConfigError("q_gamma: gamma must be positive");
    switch (method) {
        case QMethod::ClosedForm: {
            const auto [factor, leaf] = unwrap_factor(kernel, gamma);
            const auto q = leaf->q_closed(gamma);
            if (!q)
                throw UnsupportedMethodError(
                    "q_gamma: no closed form declared for " + leaf->describe());
            return {factor * *q, std::nullopt};
        }
        case QMethod::Quadrature: {
            const auto [factor, leaf] = unwrap_factor(kernel, gamma);
            const auto p = leaf->theta_power();
            if (!p)
                throw UnsupportedMethodError(
                    "q_gamma: quadrature requires an angle-driven rule, got " +
                    leaf->describe());
            if (!std::isfinite(factor)) return {factor, std::nullopt};
            const double a = (*p + 1.0) * gamma;
            // Four-fold symmetry of |sin|^a, |cos|^a reduces the angle
            // integral to [0, pi/2].
            const double integral = integrate(
                [a](double t) {
                    return pow_abs(std::sin(t), a) + pow_abs(std::cos(t), a);
                },
                0.0, 0.5 * std::numbers::pi, 1e-11);
            return {factor * integral * 2.0 / std::numbers::pi, std::nullopt};
        }
        case QMethod::MonteCarlo: {
            if (rng == nullptr || mc_reps == 0)
                throw ConfigError("q_gamma: Monte Carlo needs a stream and reps >= 1");
            double sum = 0.0, sumsq = 0.0;
            for (std::size_t i = 0; i < mc_reps; ++i) {
                const RuleSample r = kernel.sample(*rng);
                const double v = pow_abs(r.a1, gamma) + pow_abs(r.a2, gamma);
                sum += v;
                sumsq += v * v;
            }
            const double n = static_cast<double>(mc_reps);
            const double mean = sum / n;
            const double var = std::max(0.0, sumsq / n - mean * mean);
            return {mean, std::sqrt(var / n)};
        }
    }
    throw ConfigError("q_gamma: unknown method");
}

std::optional<double> q_exact(const Kernel& kernel, double gamma) {
    try {
        return q_gamma(kernel, gamma, QMethod::ClosedForm).value;
    } catch (const UnsupportedMethodError&) {
    }
    try {
        return q_gamma(kernel, gamma, QMethod::Quadrature).value;
    } catch (const UnsupportedMethodError&) {
    }
    return std::nullopt;
}

QEstimate q_best(const Kernel& kernel, double gamma, std::size_t mc_reps,
                 RngStream& rng) {
    if (const auto v = q_exact(kernel, gamma)) return {*v, std::nullopt};
    return q_gamma(kernel, gamma, QMethod::MonteCarlo, mc_reps, &rng);
}

double mean_sum(const Kernel& kernel) {
    const auto& f = kernel.facts();
    if (!f.mean_sum)
        throw UnsupportedMethodError("mean_sum: fact not declared for " +
                                     kernel.describe() + "; use estimate_mean_sum");
    return *f.mean_sum;
}

double mean_a0(const Kernel& kernel) {
    const auto& f = kernel.facts();
    if (!f.mean_a0)
        throw UnsupportedMethodError("mean_a0: fact not declared for " +
                                     kernel.describe() + "; use estimate_mean_a0");
    return *f.mean_a0;
}

double m_bar(const Kernel& kernel) {
    const double s = mean_sum(kernel);
    if (s == 1.0)
        throw UndefinedMeanError(
            "m_bar: E[A1+A2] = 1, the steady mean is not forced; pin the mean m0 "
            "instead");
    return mean_a0(kernel) / (1.0 - s);
}

namespace {

template <typename F>
MomentEstimate mc_mean(const Kernel& kernel, std::size_t reps, RngStream& rng, F&& f) {
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
        const RuleSample r = kernel.sample(rng);
        const double v = f(r);
        sum += v;
        sumsq += v * v;
    }
    const double n = static_cast<double>(reps);
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean);
    return {mean, std::sqrt(var / n)};
}

} // namespace

MomentEstimate estimate_mean_sum(const Kernel& kernel, std::size_t reps, RngStream& rng) {
    return mc_mean(kernel, reps, rng, [](const RuleSample& r) { return r.a1 + r.a2; });
}

MomentEstimate estimate_mean_a0(const Kernel& kernel, std::size_t reps, RngStream& rng) {
    return mc_mean(kernel, reps, rng, [](const RuleSample& r) { return r.a0; });
}

CrossMomentEstimates estimate_cross_moments(const Kernel& kernel, std::size_t reps,
                                            RngStream& rng) {
    double s1 = 0, s1q = 0, s2 = 0, s2q = 0, s3 = 0, s3q = 0;
    for (std::size_t i = 0; i < reps; ++i) {
        const RuleSample r = kernel.sample(rng);
        const double v1 = r.a0 * r.a0;
        const double v2 = r.a1 * r.a2;
        const double v3 = r.a0 * (r.a1 + r.a2);
        s1 += v1; s1q += v1 * v1;
        s2 += v2; s2q += v2 * v2;
        s3 += v3; s3q += v3 * v3;
    }
    const double n = static_cast<double>(reps);
    const auto est = [n](double s, double sq) -> MomentEstimate {
        const double mean = s / n;
        const double var = std::max(0.0, sq / n - mean * mean);
        return {mean, std::sqrt(var / n)};
    };
    return {est(s1, s1q), est(s2, s2q), est(s3, s3q)};
}

bool is_degenerate_fixed_point(const Kernel& kernel, double m, std::size_t reps,
                               double tol, RngStream& rng) {
    for (std::size_t i = 0; i < reps; ++i) {
        const RuleSample r = kernel.sample(rng);
        if (std::abs(m * (1.0 - r.a1 - r.a2) - r.a0) > tol) return false;
    }
    return true;
}

} // namespace kacsim
