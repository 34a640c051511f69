#pragma once

#include <complex>
#include <cstddef>
#include <unordered_map>
#include <vector>

namespace qhhg {

/// Harmonic orders of the tracked high-harmonic modes. The driving mode
/// (order 1) is always present implicitly and never listed here.
class ModeSet {
public:
    explicit ModeSet(std::vector<int> orders);

    const std::vector<int>& orders() const { return orders_; }
    int count() const { return static_cast<int>(orders_.size()); }

    bool contains(int order) const;
    /// Position of `order` inside orders(); throws std::invalid_argument for
    /// orders that are not part of the set.
    int position_of(int order) const;

private:
    std::vector<int> orders_;
};

/// One number ket |n0; occ_1, ..., occ_k>: n0 photons in the driving mode and
/// occ_i photons in the i-th tracked harmonic (aligned with ModeSet::orders()).
struct OccupationVector {
    int n0 = 0;
    std::vector<int> occ;

    bool operator==(const OccupationVector&) const = default;
};

struct IntVectorHash {
    std::size_t operator()(const std::vector<int>& v) const noexcept;
};

/// Basis of one conserved block: all occupation vectors whose weighted photon
/// number n0 + sum_n n*occ_n equals a fixed M, in canonical order (ascending
/// lexicographic on the harmonic occupations, highest order most significant,
/// which leaves n0 descending).
class SectorBasis {
public:
    SectorBasis(ModeSet modes, int weighted_number,
                std::vector<OccupationVector> states);

    const ModeSet& modes() const { return modes_; }
    int weighted_number() const { return weighted_number_; }
    int dimension() const { return static_cast<int>(states_.size()); }
    const std::vector<OccupationVector>& states() const { return states_; }
    const OccupationVector& state(int i) const { return states_[i]; }

    /// Position of the ket with the given harmonic occupations (n0 is fixed by
    /// the sector), or -1 when no such ket exists in this sector.
    int index_of(const std::vector<int>& occ) const;

private:
    ModeSet modes_;
    int weighted_number_;
    std::vector<OccupationVector> states_;
    std::unordered_map<std::vector<int>, int, IntVectorHash> index_;
};

/// Enumerate the complete basis of the sector with weighted photon number M.
/// M >= 0 required; every harmonic occupation is bounded by floor(M / order).
SectorBasis enumerate_sector(const ModeSet& modes, int weighted_number);

/// Coherent-state weight of one sector: the initial state puts amplitude
/// exp(-|a0|^2/2) a0^M / sqrt(M!) on the ket |M; 0, ..., 0>.
struct SectorWeight {
    int weighted_number = 0;
    std::complex<double> amplitude;
};

/// Minimal contiguous range of weighted photon numbers around |alpha0|^2 whose
/// total probability reaches at least 1 - epsilon, with the stably evaluated
/// coherent amplitudes. epsilon must lie strictly inside (0, 1).
std::vector<SectorWeight> sector_weights(std::complex<double> alpha0,
                                         double epsilon);

} // namespace qhhg
