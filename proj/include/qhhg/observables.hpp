#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "qhhg/propagator.hpp"

namespace qhhg {

/// Mode label for observable extraction: 0 selects the driving mode, any
/// other value must be a harmonic order present in the state's mode set.
constexpr int kFundamental = 0;

struct PhotonDistribution {
    int mode = kFundamental;
    /// probabilities[m] = <Pi_m>; sums to the retained probability.
    std::vector<double> probabilities;

    double total() const;
    double mean() const;
    double second_moment() const;
};

/// Reduced density matrix of a single mode in the photon-number basis,
/// truncated at the smallest dimension whose dropped tail stays below the
/// requested bound (the sector structure caps the dimension regardless).
struct ModeDensityMatrix {
    int mode = kFundamental;
    Eigen::MatrixXcd rho;
    /// Probability outside the retained dimension.
    double tail_mass = 0.0;
};

PhotonDistribution photon_distribution(const QuantumState& state, int mode);

ModeDensityMatrix reduced_density(const QuantumState& state, int mode,
                                  double tail_eps = 1e-8);

/// Mandel parameter (<m^2> - <m>^2) / <m> - 1. Throws std::domain_error when
/// the mean occupation vanishes; the caller decides how to report that.
double mandel_q(const PhotonDistribution& dist);

/// Tr rho^2 via the squared Frobenius norm (rho is Hermitian).
double purity(const ModeDensityMatrix& rho);

struct Quadratures {
    double x = 0.0;
    double y = 0.0;
};

/// Expectation of x = (a^+ + a)/2 and y = i(a^+ - a)/2, read off the first
/// off-diagonal of the reduced density matrix.
Quadratures quadratures(const QuantumState& state, int mode,
                        double tail_eps = 1e-12);

struct WignerGrid {
    int mode = kFundamental;
    std::vector<std::complex<double>> points;
    std::vector<double> values;
    /// Largest |imag| discarded when realising the values.
    double max_imag_residue = 0.0;
    /// Set when the density matrix reported more truncated tail mass than the
    /// threshold passed to wigner(); values are then untrustworthy.
    bool cutoff_warning = false;
};

/// W(alpha) = (2/pi) Tr[rho D(alpha) P D(alpha)^+], normalised so the grid
/// integral over the complex plane is 1. Evaluated through displaced-number
/// matrix elements <m|D(2 alpha)|n> with a scaled associated-Laguerre
/// recurrence; the scaling keeps every intermediate bounded by 1.
WignerGrid wigner(const ModeDensityMatrix& rho,
                  const std::vector<std::complex<double>>& grid_points,
                  double tail_threshold = 1e-8);

/// Rectangular grid helper: `points` per axis spanning [re0, re1] x [im0, im1].
std::vector<std::complex<double>> wigner_grid_points(double re0, double re1,
                                                     double im0, double im1,
                                                     int points_per_axis);

} // namespace qhhg
