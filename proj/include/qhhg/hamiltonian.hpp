#pragma once

#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "qhhg/fock_basis.hpp"

namespace qhhg {

enum class CouplingProvenance { Plateau, Experimental, Explicit };

/// Coupling strength chi_n per tracked harmonic order, in units of the
/// fundamental frequency.
struct CouplingSet {
    std::map<int, double> chi;
    CouplingProvenance provenance = CouplingProvenance::Explicit;

    double at(int order) const;
    bool all_zero() const;
};

/// Couplings that equalise the weighted occupations n<a_n^+ a_n> across the
/// set: chi_n = p / (sqrt(n) |alpha0|^n), evaluated in log space so deep
/// plateaus at large |alpha0| do not underflow prematurely.
CouplingSet plateau_couplings(double p, std::complex<double> alpha0,
                              const ModeSet& modes);

/// Couplings reproducing a measured plateau profile: heights h_n rescale the
/// weighted occupations relative to the reference order, anchored to the
/// caller-supplied chi at that reference. Requires h[reference] == 1 and all
/// heights positive.
CouplingSet experimental_couplings(const std::map<int, double>& heights,
                                   int reference,
                                   std::complex<double> alpha0,
                                   double chi_reference);

CouplingSet explicit_couplings(std::map<int, double> chi);

/// Real symmetric sparse matrix stored as its upper triangle.
class SparseSymmetric {
public:
    struct Entry {
        int row;
        int col;
        double value;
    };

    SparseSymmetric(int dimension, std::vector<Entry> entries);

    int dimension() const { return dimension_; }
    const std::vector<Entry>& entries() const { return entries_; }

    /// y = H x, expanding the symmetric part.
    void apply(const std::complex<double>* x, std::complex<double>* y) const;
    Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;

    /// Maximum absolute column sum; cheap scale estimate for step control.
    double one_norm() const;

    Eigen::MatrixXd dense() const;

private:
    int dimension_;
    std::vector<Entry> entries_;
};

/// n0 (n0-1) ... (n0-n+1), switching to a log-gamma evaluation once n0 is
/// large enough that the running product would lose accuracy.
double falling_factorial(int n0, int n);

/// Interaction part of the Hamiltonian restricted to one sector. The term
/// a_n^+ A^n connects |n0; ..., occ_n, ...> to |n0-n; ..., occ_n+1, ...> with
/// matrix element chi_n sqrt(occ_n+1) sqrt(n0!/(n0-n)!). The coupling set must
/// cover exactly the orders of the basis's mode set.
SparseSymmetric interaction_matrix(const SectorBasis& basis,
                                   const CouplingSet& couplings);

} // namespace qhhg
