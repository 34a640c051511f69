#include "qhhg/hamiltonian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qhhg {

double CouplingSet::at(int order) const {
    auto it = chi.find(order);
    if (it == chi.end())
        throw std::invalid_argument("no coupling for harmonic order " +
                                    std::to_string(order));
    return it->second;
}

bool CouplingSet::all_zero() const {
    for (const auto& [order, value] : chi)
        if (value != 0.0) return false;
    return true;
}

CouplingSet plateau_couplings(double p, std::complex<double> alpha0,
                              const ModeSet& modes) {
    if (!(p > 0.0))
        throw std::invalid_argument("plateau strength p must be positive");
    const double a = std::abs(alpha0);
    if (a == 0.0)
        throw std::invalid_argument("plateau couplings are undefined for alpha0 = 0");
    const double log_a = std::log(a);

    CouplingSet set;
    set.provenance = CouplingProvenance::Plateau;
    for (int n : modes.orders())
        set.chi[n] = p * std::exp(-0.5 * std::log(double(n)) - n * log_a);
    return set;
}

CouplingSet experimental_couplings(const std::map<int, double>& heights,
                                   int reference,
                                   std::complex<double> alpha0,
                                   double chi_reference) {
    auto ref = heights.find(reference);
    if (ref == heights.end())
        throw std::invalid_argument("height profile is missing the reference order " +
                                    std::to_string(reference));
    if (ref->second != 1.0)
        throw std::invalid_argument("height at the reference order must equal 1");
    if (!(chi_reference > 0.0))
        throw std::invalid_argument("reference coupling must be positive");
    const double a = std::abs(alpha0);
    if (a == 0.0)
        throw std::invalid_argument("experimental couplings are undefined for alpha0 = 0");
    const double log_a = std::log(a);

    CouplingSet set;
    set.provenance = CouplingProvenance::Experimental;
    for (const auto& [n, h] : heights) {
        if (!(h > 0.0))
            throw std::invalid_argument("height for order " + std::to_string(n) +
                                        " must be positive");
        // chi_ref / chi_n = sqrt(n) |a|^n / (sqrt(h_n ref) |a|^ref), in logs to
        // survive the |a|^n spread between low and high orders.
        const double log_chi = std::log(chi_reference) +
                               0.5 * std::log(h * reference) + reference * log_a -
                               0.5 * std::log(double(n)) - n * log_a;
        set.chi[n] = std::exp(log_chi);
    }
    return set;
}

CouplingSet explicit_couplings(std::map<int, double> chi) {
    for (const auto& [order, value] : chi)
        if (value < 0.0)
            throw std::invalid_argument("coupling for order " + std::to_string(order) +
                                        " must be non-negative");
    CouplingSet set;
    set.chi = std::move(chi);
    set.provenance = CouplingProvenance::Explicit;
    return set;
}

SparseSymmetric::SparseSymmetric(int dimension, std::vector<Entry> entries)
    : dimension_(dimension), entries_(std::move(entries)) {
    for (const auto& e : entries_) {
        if (e.row < 0 || e.col < e.row || e.col >= dimension_)
            throw std::invalid_argument("sparse entry outside the upper triangle");
    }
}

void SparseSymmetric::apply(const std::complex<double>* x,
                            std::complex<double>* y) const {
    for (int i = 0; i < dimension_; ++i)
        y[i] = 0.0;
    for (const auto& e : entries_) {
        y[e.row] += e.value * x[e.col];
        if (e.row != e.col)
            y[e.col] += e.value * x[e.row];
    }
}

Eigen::VectorXcd SparseSymmetric::apply(const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd y(dimension_);
    apply(x.data(), y.data());
    return y;
}

double SparseSymmetric::one_norm() const {
    std::vector<double> col_sum(dimension_, 0.0);
    for (const auto& e : entries_) {
        col_sum[e.col] += std::abs(e.value);
        if (e.row != e.col)
            col_sum[e.row] += std::abs(e.value);
    }
    double best = 0.0;
    for (double s : col_sum)
        best = std::max(best, s);
    return best;
}

Eigen::MatrixXd SparseSymmetric::dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dimension_, dimension_);
    for (const auto& e : entries_) {
        m(e.row, e.col) = e.value;
        m(e.col, e.row) = e.value;
    }
    return m;
}

double falling_factorial(int n0, int n) {
    if (n < 0 || n0 < 0)
        throw std::invalid_argument("falling factorial expects non-negative arguments");
    if (n0 < n)
        return 0.0;
    if (n0 > 10000)
        return std::exp(std::lgamma(n0 + 1.0) - std::lgamma(n0 - n + 1.0));
    double product = 1.0;
    for (int k = 0; k < n; ++k)
        product *= double(n0 - k);
    return product;
}

SparseSymmetric interaction_matrix(const SectorBasis& basis,
                                   const CouplingSet& couplings) {
    const ModeSet& modes = basis.modes();
    if (couplings.chi.size() != static_cast<std::size_t>(modes.count()))
        throw std::invalid_argument("coupling set does not match the mode set");
    for (int n : modes.orders())
        if (!couplings.chi.count(n))
            throw std::invalid_argument("coupling set does not cover order " +
                                        std::to_string(n));

    std::vector<SparseSymmetric::Entry> entries;
    std::vector<int> occ;
    for (int i = 0; i < basis.dimension(); ++i) {
        const OccupationVector& s = basis.state(i);
        for (int k = 0; k < modes.count(); ++k) {
            const int n = modes.orders()[k];
            if (s.n0 < n)
                continue;
            // Raise harmonic k by one at the cost of n driving photons; each
            // unordered pair is generated exactly once from its high-n0 side.
            occ = s.occ;
            ++occ[k];
            const int j = basis.index_of(occ);
            if (j < 0)
                throw std::logic_error("sector basis is not closed under the ladder");
            const double element = couplings.at(n) *
                                   std::sqrt(double(s.occ[k] + 1)) *
                                   std::sqrt(falling_factorial(s.n0, n));
            if (element != 0.0)
                entries.push_back({std::min(i, j), std::max(i, j), element});
        }
    }
    return SparseSymmetric(basis.dimension(), std::move(entries));
}

} // namespace qhhg
