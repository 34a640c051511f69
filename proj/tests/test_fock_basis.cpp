#include <doctest.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "qhhg/fock_basis.hpp"

using namespace qhhg;

TEST_CASE("mode set validates its orders") {
    CHECK_THROWS_AS(ModeSet({}), std::invalid_argument);
    CHECK_THROWS_AS(ModeSet({1}), std::invalid_argument);
    CHECK_THROWS_AS(ModeSet({0, 3}), std::invalid_argument);
    CHECK_THROWS_AS(ModeSet({-3}), std::invalid_argument);
    CHECK_THROWS_AS(ModeSet({5, 3}), std::invalid_argument);
    CHECK_THROWS_AS(ModeSet({3, 3}), std::invalid_argument);

    const ModeSet set({3, 5, 21});
    CHECK(set.count() == 3);
    CHECK(set.contains(5));
    CHECK_FALSE(set.contains(7));
    CHECK(set.position_of(3) == 0);
    CHECK(set.position_of(21) == 2);
    CHECK_THROWS_AS(set.position_of(7), std::invalid_argument);
}

namespace {

// Independent count of the sector basis: every (occ_1, ..., occ_k) whose
// weighted sum stays within M contributes exactly one ket.
int brute_force_dimension(const std::vector<int>& orders, int M) {
    std::vector<int> occ(orders.size(), 0);
    int count = 0;
    while (true) {
        long weighted = 0;
        for (std::size_t i = 0; i < orders.size(); ++i)
            weighted += long(orders[i]) * occ[i];
        if (weighted <= M) ++count;
        std::size_t i = 0;
        for (; i < occ.size(); ++i) {
            if (++occ[i] <= M / orders[i]) break;
            occ[i] = 0;
        }
        if (i == occ.size()) return count;
    }
}

} // namespace

TEST_CASE("sector enumeration matches the brute-force count") {
    const ModeSet modes({3, 5});
    for (int M = 0; M <= 40; ++M) {
        const SectorBasis basis = enumerate_sector(modes, M);
        CHECK(basis.dimension() == brute_force_dimension({3, 5}, M));
        for (const OccupationVector& s : basis.states()) {
            long weighted = s.n0;
            for (std::size_t i = 0; i < s.occ.size(); ++i)
                weighted += long(modes.orders()[i]) * s.occ[i];
            CHECK(weighted == M);
            CHECK(s.n0 >= 0);
        }
    }
}

TEST_CASE("sector states are canonically ordered and indexable") {
    const ModeSet modes({3, 15});
    const SectorBasis basis = enumerate_sector(modes, 15);

    // Ascending lexicographic on (occ_15, occ_3), so the undepleted ket comes
    // first and n0 descends along the pure order-3 run.
    const std::vector<OccupationVector> expected = {
        {15, {0, 0}}, {12, {1, 0}}, {9, {2, 0}}, {6, {3, 0}},
        {3, {4, 0}},  {0, {5, 0}},  {0, {0, 1}},
    };
    REQUIRE(basis.dimension() == int(expected.size()));
    for (int i = 0; i < basis.dimension(); ++i) {
        CHECK(basis.state(i) == expected[i]);
        CHECK(basis.index_of(expected[i].occ) == i);
    }
    CHECK(basis.index_of({9, 9}) == -1);
    CHECK_THROWS_AS(enumerate_sector(modes, -1), std::invalid_argument);
}

TEST_CASE("sector weights form a truncated Poisson window") {
    const std::complex<double> alpha0 = std::sqrt(50.0);
    const double eps = 1e-8;
    const auto weights = sector_weights(alpha0, eps);
    REQUIRE(!weights.empty());

    double total = 0.0;
    bool has_mean = false;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (i > 0) CHECK(weights[i].weighted_number ==
                         weights[i - 1].weighted_number + 1);
        if (weights[i].weighted_number == 50) has_mean = true;
        total += std::norm(weights[i].amplitude);
    }
    CHECK(has_mean);
    CHECK(total >= 1.0 - eps);
    CHECK(total <= 1.0 + 1e-12);

    // The window is not wastefully wide: both fringe sectors together carry
    // the probability that the greedy growth was still missing.
    const double fringe = std::norm(weights.front().amplitude) +
                          std::norm(weights.back().amplitude);
    CHECK(total - fringe < 1.0 - eps);

    // Amplitudes follow the coherent-state Poisson law; spot values computed
    // with the plain formula at moderate M where it is still stable.
    for (const SectorWeight& w : weights) {
        if (w.weighted_number == 30)
            CHECK(std::abs(w.amplitude) ==
                  doctest::Approx(2.60230370470128369e-02).epsilon(1e-12));
        if (w.weighted_number == 50)
            CHECK(std::abs(w.amplitude) ==
                  doctest::Approx(2.37328899051906572e-01).epsilon(1e-12));
        if (w.weighted_number == 72)
            CHECK(std::abs(w.amplitude) ==
                  doctest::Approx(2.58261796734953926e-02).epsilon(1e-12));
    }
}

TEST_CASE("sector weights handle edge parameters") {
    CHECK_THROWS_AS(sector_weights(2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sector_weights(2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(sector_weights(2.0, -0.5), std::invalid_argument);

    // Vacuum drive: everything sits in the M = 0 block.
    const auto vac = sector_weights(0.0, 1e-12);
    REQUIRE(vac.size() == 1);
    CHECK(vac[0].weighted_number == 0);
    CHECK(std::abs(vac[0].amplitude - 1.0) < 1e-15);

    // A complex drive phase lands on the amplitudes, not the probabilities.
    const std::complex<double> rot(0.0, std::sqrt(5.0));
    const auto rotated = sector_weights(rot, 1e-10);
    const auto plain = sector_weights(std::sqrt(5.0), 1e-10);
    REQUIRE(rotated.size() == plain.size());
    for (std::size_t i = 0; i < plain.size(); ++i) {
        CHECK(rotated[i].weighted_number == plain[i].weighted_number);
        CHECK(std::abs(std::abs(rotated[i].amplitude) -
                       std::abs(plain[i].amplitude)) < 1e-15);
    }
}
