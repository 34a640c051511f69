#pragma once

#include <complex>
#include <span>

#include "qhhg/hamiltonian.hpp"

namespace qhhg {

/// Short-time expansions of the exact dynamics, used as an independent check
/// on the simulator. All of them hold for tau well inside 0.1 / p where
/// p^2 = max_n n chi_n^2 |alpha0|^(2n).
struct ShortTimeExpansion {
    CouplingSet couplings;
    std::complex<double> alpha0;

    /// <A^+A>(tau) = |alpha0|^2 - tau^2 sum_n n chi_n^2 |alpha0|^(2n).
    double fundamental_mean(double tau) const;
    /// <(A^+A)^2>(tau) = |alpha0|^4 + |alpha0|^2
    ///   - tau^2 sum_n chi_n^2 |alpha0|^(2n) (n^2 + 2 n |alpha0|^2).
    double fundamental_second_moment(double tau) const;
    /// Mandel parameter of the driving mode,
    /// Q0(tau) = -tau^2 sum_n (n^2 - n) chi_n^2 |alpha0|^(2n-2).
    double q0_leading(double tau) const;

    /// tau^2 coefficients of the three series above.
    double mean_tau2_coefficient() const;
    double second_moment_tau2_coefficient() const;
    double q0_tau2_coefficient() const;
};

/// Harmonic-mode Mandel parameter for a single order-2 coupling:
/// Q2(tau) = -(4/3) tau^4 chi2^4 |alpha0|^4.
double q2_leading(double tau, double chi2, std::complex<double> alpha0);

/// Least-squares slope of log|values| against log(taus). Requires at least
/// two usable points; zero values are rejected since the scaling law they
/// probe has no meaning there.
double fit_loglog_slope(std::span<const double> taus,
                        std::span<const double> values);

struct SlopeCheck {
    double slope = 0.0;
    bool pass = false;
};

/// Verify the quartic onset of a harmonic-mode Mandel series: fitted log-log
/// slope within `width` of 4.
SlopeCheck hh_q_order_check(std::span<const double> taus,
                            std::span<const double> q_values,
                            double width = 0.2);

} // namespace qhhg
