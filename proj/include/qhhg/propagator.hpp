#pragma once

#include <complex>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qhhg/fock_basis.hpp"
#include "qhhg/hamiltonian.hpp"

namespace qhhg {

/// Thrown when the time stepper cannot reach the requested accuracy.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

struct PropagatorConfig {
    enum class Method { Krylov, Eigen };

    Method method = Method::Krylov;
    int krylov_dim = 30;
    double step_tol = 1e-10;
    /// Upper bound on one internal substep; 0 leaves the step uncapped.
    double max_step = 0.0;
};

struct SectorStats {
    int weighted_number = 0;
    int dimension = 0;
    long substeps = 0;
};

/// States exp(-i tau H) v0 for every entry of `taus`. The grid must be
/// ascending; negative times are propagated backwards from tau = 0. v0 must be
/// normalised to 1e-8.
std::vector<Eigen::VectorXcd> evolve_sector(const SparseSymmetric& hamiltonian,
                                            const Eigen::VectorXcd& v0,
                                            std::span<const double> taus,
                                            const PropagatorConfig& config = {},
                                            SectorStats* stats = nullptr);

/// Amplitudes of one conserved block, sharing the basis across snapshots.
struct SectorAmplitudes {
    std::shared_ptr<const SectorBasis> basis;
    Eigen::VectorXcd amplitudes;
};

/// Full state at one time: per-sector amplitude vectors including the
/// coherent weight and the free phase exp(-i tau M) of each block.
struct QuantumState {
    double tau = 0.0;
    std::map<int, SectorAmplitudes> sectors;
    /// Total probability covered by the retained sectors (1 - truncation).
    double retained_probability = 0.0;
};

struct EvolveStats {
    std::vector<SectorStats> sectors;
};

/// Evolve the coherent-times-vacuum initial state under the full Hamiltonian:
/// sector decomposition by conserved weighted photon number, independent
/// propagation of each block, free phases applied on merge. `threads` = 0
/// uses one worker per hardware thread; results are identical for any count.
std::vector<QuantumState> evolve_full(std::complex<double> alpha0,
                                      const ModeSet& modes,
                                      const CouplingSet& couplings,
                                      std::span<const double> taus,
                                      double epsilon,
                                      const PropagatorConfig& config = {},
                                      int threads = 1,
                                      EvolveStats* stats = nullptr);

} // namespace qhhg
