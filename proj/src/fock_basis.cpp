#include "qhhg/fock_basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qhhg {

ModeSet::ModeSet(std::vector<int> orders) : orders_(std::move(orders)) {
    if (orders_.empty())
        throw std::invalid_argument("mode set must contain at least one harmonic order");
    for (int n : orders_)
        if (n < 2)
            throw std::invalid_argument("harmonic orders must be integers >= 2");
    if (!std::is_sorted(orders_.begin(), orders_.end()))
        throw std::invalid_argument("harmonic orders must be ascending");
    if (std::adjacent_find(orders_.begin(), orders_.end()) != orders_.end())
        throw std::invalid_argument("harmonic orders must be distinct");
}

bool ModeSet::contains(int order) const {
    return std::binary_search(orders_.begin(), orders_.end(), order);
}

int ModeSet::position_of(int order) const {
    auto it = std::lower_bound(orders_.begin(), orders_.end(), order);
    if (it == orders_.end() || *it != order)
        throw std::invalid_argument("harmonic order " + std::to_string(order) +
                                    " is not part of the mode set");
    return static_cast<int>(it - orders_.begin());
}

std::size_t IntVectorHash::operator()(const std::vector<int>& v) const noexcept {
    // FNV-1a over the raw words; collisions only cost a compare.
    std::size_t h = 1469598103934665603ull;
    for (int x : v) {
        h ^= static_cast<std::size_t>(static_cast<unsigned>(x));
        h *= 1099511628211ull;
    }
    return h;
}

SectorBasis::SectorBasis(ModeSet modes, int weighted_number,
                         std::vector<OccupationVector> states)
    : modes_(std::move(modes)), weighted_number_(weighted_number),
      states_(std::move(states)) {
    index_.reserve(states_.size());
    for (int i = 0; i < static_cast<int>(states_.size()); ++i)
        index_.emplace(states_[i].occ, i);
}

int SectorBasis::index_of(const std::vector<int>& occ) const {
    auto it = index_.find(occ);
    return it == index_.end() ? -1 : it->second;
}

namespace {

// Depth-first enumeration, most significant digit = occupation of the highest
// order. Emits exactly the canonical order of SectorBasis.
void enumerate_rec(const std::vector<int>& orders, int position, int remaining,
                   std::vector<int>& occ, std::vector<OccupationVector>& out) {
    if (position < 0) {
        OccupationVector state;
        state.n0 = remaining;
        state.occ = occ;
        out.push_back(std::move(state));
        return;
    }
    const int order = orders[position];
    for (int k = 0; k * order <= remaining; ++k) {
        occ[position] = k;
        enumerate_rec(orders, position - 1, remaining - k * order, occ, out);
    }
    occ[position] = 0;
}

} // namespace

SectorBasis enumerate_sector(const ModeSet& modes, int weighted_number) {
    if (weighted_number < 0)
        throw std::invalid_argument("weighted photon number must be non-negative");
    std::vector<OccupationVector> states;
    std::vector<int> occ(modes.orders().size(), 0);
    enumerate_rec(modes.orders(), modes.count() - 1, weighted_number, occ, states);
    return SectorBasis(modes, weighted_number, std::move(states));
}

std::vector<SectorWeight> sector_weights(std::complex<double> alpha0,
                                         double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("epsilon must lie strictly between 0 and 1");

    const double lambda = std::norm(alpha0);
    if (lambda == 0.0)
        return {SectorWeight{0, 1.0}};

    const double log_lambda = std::log(lambda);
    const double phase = std::arg(alpha0);
    auto log_pmf = [&](int m) {
        return -lambda + m * log_lambda - std::lgamma(m + 1.0);
    };
    auto amplitude = [&](int m) {
        const std::complex<double> rot(std::cos(m * phase), std::sin(m * phase));
        return std::exp(0.5 * log_pmf(m)) * rot;
    };

    // Grow a contiguous window outward from the bulk, always absorbing the
    // heavier neighbour; unimodality of the Poisson weights makes this the
    // minimal window reaching the target mass.
    int lo = static_cast<int>(std::llround(lambda));
    int hi = lo;
    double total = std::exp(log_pmf(lo));
    const double target = 1.0 - epsilon;
    while (total < target) {
        const double below = lo > 0 ? std::exp(log_pmf(lo - 1)) : -1.0;
        const double above = std::exp(log_pmf(hi + 1));
        if (below >= above) {
            --lo;
            total += below;
        } else {
            ++hi;
            total += above;
        }
    }

    std::vector<SectorWeight> weights;
    weights.reserve(hi - lo + 1);
    for (int m = lo; m <= hi; ++m)
        weights.push_back(SectorWeight{m, amplitude(m)});
    return weights;
}

} // namespace qhhg
