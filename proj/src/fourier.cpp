#include "kacsim/fourier.hpp"

#include <algorithm>
#include <cmath>

#include "kacsim/errors.hpp"
#include "kacsim/parallel.hpp"

namespace kacsim {

namespace {

using cplx = std::complex<double>;

// Residual of a generic pointwise identity phi(xi) = rhs(xi, table, phi_xi).
// Shared by the stationarity and thermal-bath checks.
struct RuleTerms {
    std::vector<RuleSample> rules;
    double max_mult = 0.0;  // max over draws of max(|a1|,|a2|)
    double high_mult = 0.0; // 0.9999 quantile of the same
};

RuleTerms draw_rules(const Kernel& kernel, std::size_t mc_pairs, RngStream& rng) {
    RuleTerms out;
    out.rules.resize(mc_pairs);
    RngStream call = rng.fork();
    std::vector<double> mults(mc_pairs);
    for (std::size_t i = 0; i < mc_pairs; ++i) {
        out.rules[i] = kernel.sample(call);
        mults[i] = std::max(std::abs(out.rules[i].a1), std::abs(out.rules[i].a2));
    }
    std::sort(mults.begin(), mults.end());
    out.max_mult = mults.back();
    out.high_mult = mults[static_cast<std::size_t>(0.9999 * (mc_pairs - 1))];
    return out;
}

// Grid step tuned to the sample scale; interpolation error ~ (dx sigma)^4.
double pick_dx(const EmpiricalMeasure& measure) {
    const double scale = std::sqrt(std::max(measure.second_moment(), 1e-12));
    return 0.005 / std::max(1.0, scale);
}

CharFunTable build_table(const EmpiricalMeasure& measure, double ximax,
                         const RuleTerms& terms, unsigned workers) {
    // Tabulate up to the largest argument the multipliers can produce; truly
    // rare outliers (heavy-tailed factors) fall back to the exact sum.
    const double cap = std::min(terms.max_mult, 4.0 * terms.high_mult + 1e-12);
    const double xmax = std::max(1e-6, ximax * cap) * (1.0 + 1e-12);
    double dx = pick_dx(measure);
    constexpr std::size_t kMaxPoints = 1u << 18;
    if (xmax / dx > static_cast<double>(kMaxPoints)) dx = xmax / kMaxPoints;
    return CharFunTable(measure.samples(), xmax, dx, workers);
}

struct PointEstimate {
    cplx mean;
    double se;
};

// Mean and SE over rule draws of f(rule) for one grid frequency.
template <typename Term>
PointEstimate rule_average(const std::vector<RuleSample>& rules, Term&& term) {
    cplx sum{0.0, 0.0};
    double sumsq = 0.0;
    for (const RuleSample& r : rules) {
        const cplx v = term(r);
        sum += v;
        sumsq += std::norm(v);
    }
    const double n = static_cast<double>(rules.size());
    const cplx mean = sum / n;
    const double var = std::max(0.0, sumsq / n - std::norm(mean));
    return {mean, std::sqrt(var / n)};
}

} // namespace

std::vector<double> default_xi_grid() {
    std::vector<double> grid(41);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = -5.0 + 0.25 * static_cast<double>(i);
    return grid;
}

std::complex<double> charfun_at(const std::vector<double>& samples, double xi) {
    double re = 0.0, im = 0.0;
    for (const double v : samples) {
        re += std::cos(xi * v);
        im += std::sin(xi * v);
    }
    const double n = static_cast<double>(samples.size());
    return {re / n, im / n};
}

CharFunGrid charfun(const EmpiricalMeasure& measure, const std::vector<double>& xi_grid) {
    CharFunGrid out;
    out.xi = xi_grid;
    out.values.resize(xi_grid.size());
    out.se.resize(xi_grid.size());
    const auto& s = measure.samples();
    const double n = static_cast<double>(s.size());
    for (std::size_t j = 0; j < xi_grid.size(); ++j) {
        const double xi = xi_grid[j];
        if (xi == 0.0) {
            out.values[j] = {1.0, 0.0};
            out.se[j] = 0.0;
            continue;
        }
        double re = 0.0, im = 0.0, re2 = 0.0, im2 = 0.0;
        for (const double v : s) {
            const double c = std::cos(xi * v);
            const double si = std::sin(xi * v);
            re += c;
            im += si;
            re2 += c * c;
            im2 += si * si;
        }
        re /= n;
        im /= n;
        const double var_re = std::max(0.0, re2 / n - re * re);
        const double var_im = std::max(0.0, im2 / n - im * im);
        out.values[j] = {re, im};
        out.se[j] = std::sqrt((var_re + var_im) / n);
    }
    return out;
}

CharFunTable::CharFunTable(const std::vector<double>& samples, double xmax, double dx,
                           unsigned workers)
    : samples_(&samples), xmax_(xmax), dx_(dx) {
    if (!(xmax > 0.0) || !(dx > 0.0))
        throw ConfigError("CharFunTable: xmax and dx must be positive");
    const auto npts = static_cast<std::size_t>(std::ceil(xmax / dx)) + 4;
    vals_.resize(npts);
    parallel_for(npts, workers, [&](std::size_t k) {
        vals_[k] = charfun_at(samples, dx_ * static_cast<double>(k));
    });
}

std::complex<double> CharFunTable::operator()(double x) const {
    const double ax = std::abs(x);
    if (ax > xmax_) return charfun_at(*samples_, x);
    const double t = ax / dx_;
    // 4-point Lagrange on nodes j-1..j+2, exact for cubics.
    auto j = static_cast<std::ptrdiff_t>(t);
    j = std::clamp<std::ptrdiff_t>(j, 1, static_cast<std::ptrdiff_t>(vals_.size()) - 3);
    const double s = t - static_cast<double>(j);
    const double wm1 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    const double w0 = (s * s - 1.0) * (s - 2.0) / 2.0;
    const double w1 = -s * (s + 1.0) * (s - 2.0) / 2.0;
    const double w2 = s * (s * s - 1.0) / 6.0;
    const cplx v = wm1 * vals_[j - 1] + w0 * vals_[j] + w1 * vals_[j + 1] +
                   w2 * vals_[j + 2];
    return x < 0.0 ? std::conj(v) : v;
}

ResidualReport stationarity_residual(const Kernel& kernel,
                                     const EmpiricalMeasure& measure,
                                     const std::vector<double>& xi_grid,
                                     std::size_t mc_pairs, RngStream& rng,
                                     unsigned workers) {
    if (xi_grid.empty()) throw ConfigError("stationarity_residual: empty grid");
    if (mc_pairs == 0) throw ConfigError("stationarity_residual: mc_pairs must be >= 1");

    const RuleTerms terms = draw_rules(kernel, mc_pairs, rng);
    double ximax = 0.0;
    for (const double xi : xi_grid) ximax = std::max(ximax, std::abs(xi));
    const CharFunTable table = build_table(measure, ximax, terms, workers);
    const CharFunGrid phi = charfun(measure, xi_grid);

    ResidualReport report;
    report.per_point.resize(xi_grid.size());
    parallel_for(xi_grid.size(), workers, [&](std::size_t j) {
        const double xi = xi_grid[j];
        const PointEstimate gain =
            rule_average(terms.rules, [&](const RuleSample& r) -> cplx {
                const cplx lhs = table(r.a1 * xi) * table(r.a2 * xi);
                return lhs * std::polar(1.0, xi * r.a0);
            });
        const double res = std::abs(phi.values[j] - gain.mean);
        const double se = std::hypot(gain.se, phi.se[j]);
        report.per_point[j] = {xi, res, se};
    });
    for (const ResidualPoint& p : report.per_point)
        report.max_abs_residual = std::max(report.max_abs_residual, p.residual);
    return report;
}

ResidualReport thermal_bath_residual(double p, double m0, double sigma2,
                                     const EmpiricalMeasure& measure,
                                     const std::vector<double>& xi_grid,
                                     std::size_t mc_pairs, RngStream& rng,
                                     unsigned workers) {
    if (xi_grid.empty()) throw ConfigError("thermal_bath_residual: empty grid");
    if (!(sigma2 >= 0.0)) throw ConfigError("thermal_bath_residual: sigma2 must be >= 0");

    const KernelPtr bathless = inelastic_kac(p);
    const RuleTerms terms = draw_rules(*bathless, mc_pairs, rng);
    double ximax = 0.0;
    for (const double xi : xi_grid) ximax = std::max(ximax, std::abs(xi));
    const CharFunTable table = build_table(measure, ximax, terms, workers);
    const CharFunGrid phi = charfun(measure, xi_grid);

    ResidualReport report;
    report.per_point.resize(xi_grid.size());
    parallel_for(xi_grid.size(), workers, [&](std::size_t j) {
        const double xi = xi_grid[j];
        const PointEstimate gain =
            rule_average(terms.rules, [&](const RuleSample& r) -> cplx {
                return table(r.a1 * xi) * table(r.a2 * xi);
            });
        const cplx rhs = gain.mean - sigma2 * xi * xi * phi.values[j] +
                         cplx(0.0, 1.0) * m0 * xi * phi.values[j];
        const double res = std::abs(phi.values[j] - rhs);
        const double phi_coeff = std::abs(cplx(1.0 + sigma2 * xi * xi, -m0 * xi));
        const double se = std::hypot(gain.se, phi_coeff * phi.se[j]);
        report.per_point[j] = {xi, res, se};
    });
    for (const ResidualPoint& pt : report.per_point)
        report.max_abs_residual = std::max(report.max_abs_residual, pt.residual);
    return report;
}

} // namespace kacsim
