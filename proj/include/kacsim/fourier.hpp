#pragma once

#include <complex>
#include <vector>

#include "kacsim/empirical.hpp"
#include "kacsim/kernels.hpp"

namespace kacsim {

struct CharFunGrid {
    std::vector<double> xi;
    std::vector<std::complex<double>> values;
    std::vector<double> se; // combined real/imaginary MC standard error
};

/// 41 equispaced frequencies on [-5, 5].
std::vector<double> default_xi_grid();

/// Empirical characteristic function on the grid: exact sample averages of
/// e^{i xi v} with per-point standard errors.
CharFunGrid charfun(const EmpiricalMeasure& measure, const std::vector<double>& xi_grid);

std::complex<double> charfun_at(const std::vector<double>& samples, double xi);

/// Dense-grid cubic interpolant of an empirical characteristic function.
/// Evaluating phi-hat at the many scattered arguments a*xi of a residual
/// estimate costs O(1) per point instead of O(n); the interpolation error
/// (4-point Lagrange on a grid tuned to the sample scale) sits far below
/// the Monte Carlo noise of those estimates. Falls back to the exact sum
/// outside the tabulated range.
class CharFunTable {
public:
    CharFunTable(const std::vector<double>& samples, double xmax, double dx,
                 unsigned workers = 1);

    std::complex<double> operator()(double x) const;

    double xmax() const { return xmax_; }
    double dx() const { return dx_; }

private:
    const std::vector<double>* samples_;
    double xmax_;
    double dx_;
    std::vector<std::complex<double>> vals_; // on [0, xmax]; negative x by conjugacy
};

struct ResidualPoint {
    double xi = 0.0;
    double residual = 0.0;
    double se = 0.0;
};

struct ResidualReport {
    double max_abs_residual = 0.0;
    std::vector<ResidualPoint> per_point;
};

/// Pointwise residual of the stationarity equation: for each grid frequency,
/// |phi(xi) - E[phi(A1 xi) phi(A2 xi) e^{i xi A0}]| with the expectation
/// estimated over mc_pairs fresh rule draws and phi the empirical
/// characteristic function of the candidate measure.
ResidualReport stationarity_residual(const Kernel& kernel,
                                     const EmpiricalMeasure& measure,
                                     const std::vector<double>& xi_grid,
                                     std::size_t mc_pairs, RngStream& rng,
                                     unsigned workers = 1);

/// Residual of the thermal-bath form for the inelasticity-p angle rule:
/// |phi(xi) - (Q_p(phi,phi)(xi) - sigma2 xi^2 phi(xi) + i m0 xi phi(xi))|
/// with Q_p estimated over mc_pairs bath-free rule draws.
ResidualReport thermal_bath_residual(double p, double m0, double sigma2,
                                     const EmpiricalMeasure& measure,
                                     const std::vector<double>& xi_grid,
                                     std::size_t mc_pairs, RngStream& rng,
                                     unsigned workers = 1);

} // namespace kacsim
