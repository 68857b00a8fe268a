#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "kacsim/rng.hpp"
#include "kacsim/scalar_dist.hpp"

namespace kacsim {

/// One draw of the random collision triple: post-collision value is
/// v' = a1*v + a2*w + a0.
struct RuleSample {
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
};

/// Analytically known moments of a collision rule. A missing entry means
/// "not known in closed form", not zero.
struct KernelFacts {
    std::optional<double> mean_sum;     // E[A1 + A2]
    std::optional<double> mean_a0;      // E[A0]
    std::optional<double> a0_second;    // E[A0^2]
    std::optional<double> cross_a1a2;   // E[A1 A2]
    std::optional<double> cross_a0_sum; // E[A0 (A1 + A2)]
    bool nonnegative = false;           // A0, A1, A2 >= 0 almost surely
};

/// A collision rule. Immutable after construction; sampling takes a
/// caller-supplied stream and holds no hidden state, so specs are freely
/// shareable across workers.
class Kernel {
public:
    virtual ~Kernel() = default;

    /// One independent draw of (A0, A1, A2). Consumes a fixed number of
    /// variates per call (independent of the values drawn).
    virtual RuleSample sample(RngStream& rng) const = 0;

    virtual std::string describe() const = 0;

    const KernelFacts& facts() const { return facts_; }

    /// E[|A1|^gamma + |A2|^gamma] in closed form, when available.
    /// Leaf kernels only; wrapped kernels compose via q_factor.
    virtual std::optional<double> q_closed(double /*gamma*/) const { return std::nullopt; }

    /// For angle-driven rules A1 = |sin t|^p sin t, A2 = |cos t|^p cos t:
    /// the inelasticity exponent p. Enables the quadrature route for q.
    virtual std::optional<double> theta_power() const { return std::nullopt; }

    /// Wrapped rules: the rule this one decorates, else nullptr.
    virtual const Kernel* base() const { return nullptr; }

    /// Wrapped rules with A_i = R * A_i(base): E[|R|^gamma] of the
    /// multiplicative factor, +inf when the moment diverges.
    virtual std::optional<double> q_factor(double /*gamma*/) const { return std::nullopt; }

protected:
    KernelFacts facts_;
};

using KernelPtr = std::shared_ptr<const Kernel>;

// ---------------------------------------------------------------------------
// Constructors for the named rules.

/// A1 = sin t, A2 = cos t, A0 = 0, t ~ Uniform[0, 2pi).
KernelPtr kac_classical();

/// A1 = |sin t|^p sin t, A2 = |cos t|^p cos t, optional independent
/// additive background A0.
KernelPtr inelastic_kac(double p,
                        std::optional<ScalarDistribution> background = std::nullopt);

/// A1 = lambda + eta (1-lambda), A2 = eta (1-lambda); eta symmetric about
/// 1/2 with support in [0,1].
KernelPtr saving_propensity(double lambda, ScalarDistribution eta);

/// A1 = A2 = eta (one shared draw).
KernelPtr pure_gambling(ScalarDistribution eta);

/// Proportional taxation on every trade: A_i = (1-eps) B_i, A0 = eps T with
/// T ~ a0dist independent. Base rule must have no additive part.
KernelPtr redistribution_full(KernelPtr base, double eps, ScalarDistribution a0dist);

/// Taxation only on a delta-fraction of trades: A_i = (1 - eps D) B_i,
/// A0 = eps D T, D ~ Bernoulli(delta) independent of everything else.
KernelPtr redistribution_bernoulli(KernelPtr base, double eps, double delta,
                                   ScalarDistribution a0dist);

/// Drift-redistribution equivalent rule: A_i = U^{-eps} B_i, A0 = 0,
/// U ~ Uniform[0,1]. Base must satisfy E[B1 + B2] = 1 - eps.
KernelPtr chi_minus_one(KernelPtr base, double eps);

/// Uniform-redistribution equivalent rule: A_i = B_i, A0 ~ Exponential of
/// mean eps*m0 independent. Base must satisfy E[B1 + B2] = 1 - eps.
KernelPtr chi_zero(KernelPtr base, double eps, double m0);

/// General transport-redistribution equivalent rule with delta := eps*chi:
/// A_i = U^delta B_i, A0 = (1 - U^delta) ((delta+eps)/delta) m0, one shared
/// U ~ Uniform[0,1]. Base must satisfy E[B1 + B2] = 1 - eps.
KernelPtr chi_general(KernelPtr base, double eps, double chi, double m0);

/// Additive thermal bath with drift: A0 = E_a - E_b with independent
/// exponentials of means a and b.
KernelPtr thermal_bath_diff(KernelPtr base, double a, double b);

/// Pins the degenerate fixed point: A0 := m (1 - B1 - B2) on top of the
/// base weights, so delta_m solves the fixed-point equation by construction.
KernelPtr degenerate_pin(KernelPtr base, double m);

/// Arbitrary user rule with declared facts.
KernelPtr custom(std::string name, std::function<RuleSample(RngStream&)> sampler,
                 KernelFacts facts,
                 std::function<double(double)> q_closed_form = nullptr);

// ---------------------------------------------------------------------------
// Deterministic rule maps, exposed so tests can force the underlying angle.

RuleSample kac_rule_at(double theta);
RuleSample inelastic_rule_at(double p, double theta);

// ---------------------------------------------------------------------------
// Operations.

RuleSample sample_rule(const Kernel& kernel, RngStream& rng);

enum class QMethod { ClosedForm, Quadrature, MonteCarlo };

struct QEstimate {
    double value = 0.0;
    std::optional<double> std_error; // set only for Monte Carlo
};

/// q(gamma) = E[|A1|^gamma + |A2|^gamma] with 0^0 := 0. Throws
/// UnsupportedMethodError when the requested route is unavailable.
QEstimate q_gamma(const Kernel& kernel, double gamma, QMethod method,
                  std::size_t mc_reps = 100000, RngStream* rng = nullptr);

/// Closed form if declared, else quadrature if applicable, else nullopt.
std::optional<double> q_exact(const Kernel& kernel, double gamma);

/// q_exact, falling back to Monte Carlo with the given stream.
QEstimate q_best(const Kernel& kernel, double gamma, std::size_t mc_reps,
                 RngStream& rng);

/// Declared facts; throw UnsupportedMethodError when undeclared.
double mean_sum(const Kernel& kernel);
double mean_a0(const Kernel& kernel);

/// Forced steady-state mean E[A0] / (1 - E[A1+A2]). Throws
/// UndefinedMeanError when E[A1+A2] = 1: the mean must be pinned instead.
double m_bar(const Kernel& kernel);

struct MomentEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

MomentEstimate estimate_mean_sum(const Kernel& kernel, std::size_t reps, RngStream& rng);
MomentEstimate estimate_mean_a0(const Kernel& kernel, std::size_t reps, RngStream& rng);

struct CrossMomentEstimates {
    MomentEstimate a0_second;    // E[A0^2]
    MomentEstimate cross_a1a2;   // E[A1 A2]
    MomentEstimate cross_a0_sum; // E[A0 (A1+A2)]
};

CrossMomentEstimates estimate_cross_moments(const Kernel& kernel, std::size_t reps,
                                            RngStream& rng);

/// Sound one-sided sampling test of the degeneracy identity
/// m (1 - (A1+A2)) = A0 a.s.: a `false` is a certificate, a `true` only
/// says no counterexample was drawn.
bool is_degenerate_fixed_point(const Kernel& kernel, double m, std::size_t reps,
                               double tol, RngStream& rng);

} // namespace kacsim
