#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qhhg/hamiltonian.hpp"

namespace qhhg {

/// Closed-form model of one harmonic mode while pump depletion is negligible:
/// the mode stays coherent with parameter -i tau beta(tau).
struct ParametricPrediction {
    int order = 0;
    double chi = 0.0;
    std::complex<double> alpha0;

    /// beta(tau) = chi alpha0^order exp(-i order tau).
    std::complex<double> beta(double tau) const;
    /// Coherent parameter -i tau beta(tau).
    std::complex<double> coherent_parameter(double tau) const;
    /// Mean occupation tau^2 |beta|^2 = tau^2 chi^2 |alpha0|^(2 order).
    double nbar(double tau) const;
};

ParametricPrediction parametric_prediction(int order,
                                           const CouplingSet& couplings,
                                           std::complex<double> alpha0);

/// Ratio of weighted occupations n nbar_n / (n' nbar_n') predicted by the
/// model; equals 1 for every pair under plateau couplings.
double weighted_ratio(const ParametricPrediction& a,
                      const ParametricPrediction& b, double tau);

/// Multimode drive: frequencies with their coherent amplitudes. The vacuum
/// field scale is sqrt(nu) per mode (hbar = 2 eps0 V = 1), so a field sample
/// reads E(t) = sum_m sqrt(omega_m) i [alpha_m exp(-i omega_m t) - c.c.].
struct PulseSpec {
    std::vector<double> omega;
    std::vector<std::complex<double>> alpha;
};

struct PulseFit {
    PulseSpec spec;
    double max_residual = 0.0;
    double rms_residual = 0.0;
};

/// Least-squares decomposition of sampled field values onto the given
/// frequency grid (strictly ascending, all positive). Throws
/// std::invalid_argument on degenerate grids that make the fit ill-posed.
PulseFit fit_pulse(std::span<const double> times,
                   std::span<const double> field,
                   const std::vector<double>& grid);

/// Spectral construction for a Gaussian pulse E0 exp(-t^2/tau_p^2) sin(omega0 t):
/// amplitudes follow the Fourier transform, alpha(omega_m) proportional to
/// exp(-tau_p^2 (omega_m - omega0)^2 / 4), with the residual measured against
/// resampled field values.
PulseFit fit_gaussian_pulse(double e0, double tau_p, double omega0,
                            const std::vector<double>& grid);

std::vector<double> reconstruct_field(const PulseSpec& pulse,
                                      std::span<const double> times);

/// Harmonic-field expectation under the parametric model,
/// <E_n>(tau) = tau chi_n sum_m sqrt(n omega_m) [alpha_m^n exp(-i n omega_m tau) + c.c.],
/// real by construction (the c.c. pair is summed explicitly).
std::vector<double> harmonic_field(const PulseSpec& pulse, int order,
                                   double chi, std::span<const double> taus);

} // namespace qhhg
