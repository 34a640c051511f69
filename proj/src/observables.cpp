#include "qhhg/observables.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace qhhg {

namespace {

/// Occupation of the requested mode in one basis ket.
int occupation_of(const OccupationVector& state, int mode, int position) {
    return mode == kFundamental ? state.n0 : state.occ[position];
}

int mode_position(const QuantumState& state, int mode) {
    if (state.sectors.empty())
        throw std::invalid_argument("state holds no sectors");
    const ModeSet& modes = state.sectors.begin()->second.basis->modes();
    return mode == kFundamental ? -1 : modes.position_of(mode);
}

} // namespace

double PhotonDistribution::total() const {
    double sum = 0.0;
    for (double p : probabilities)
        sum += p;
    return sum;
}

double PhotonDistribution::mean() const {
    double sum = 0.0;
    for (std::size_t m = 0; m < probabilities.size(); ++m)
        sum += double(m) * probabilities[m];
    return sum;
}

double PhotonDistribution::second_moment() const {
    double sum = 0.0;
    for (std::size_t m = 0; m < probabilities.size(); ++m)
        sum += double(m) * double(m) * probabilities[m];
    return sum;
}

PhotonDistribution photon_distribution(const QuantumState& state, int mode) {
    const int position = mode_position(state, mode);

    PhotonDistribution dist;
    dist.mode = mode;
    for (const auto& [m, block] : state.sectors) {
        const SectorBasis& basis = *block.basis;
        for (int i = 0; i < basis.dimension(); ++i) {
            const int occ = occupation_of(basis.state(i), mode, position);
            if (occ >= static_cast<int>(dist.probabilities.size()))
                dist.probabilities.resize(occ + 1, 0.0);
            dist.probabilities[occ] += std::norm(block.amplitudes(i));
        }
    }
    return dist;
}

ModeDensityMatrix reduced_density(const QuantumState& state, int mode,
                                  double tail_eps) {
    if (tail_eps < 0.0)
        throw std::invalid_argument("tail bound must be non-negative");
    const int position = mode_position(state, mode);
    const PhotonDistribution dist = photon_distribution(state, mode);

    // Smallest dimension whose dropped tail stays below the bound; the
    // structural maximum (largest reachable occupation) caps it regardless.
    const double total = dist.total();
    int dim = static_cast<int>(dist.probabilities.size());
    double tail = 0.0;
    while (dim > 1 && tail + dist.probabilities[dim - 1] < tail_eps) {
        tail += dist.probabilities[dim - 1];
        --dim;
    }

    // Group amplitudes by the configuration of every other mode; two kets
    // contribute coherently exactly when they share that rest configuration.
    // Sectors with different weighted numbers meet here, which is why the
    // free phases carried by the state matter.
    std::map<std::vector<int>, std::vector<std::pair<int, std::complex<double>>>>
        groups;
    std::vector<int> rest;
    for (const auto& [m, block] : state.sectors) {
        const SectorBasis& basis = *block.basis;
        const int mode_count = basis.modes().count();
        for (int i = 0; i < basis.dimension(); ++i) {
            const OccupationVector& ket = basis.state(i);
            const int occ = occupation_of(ket, mode, position);
            if (occ >= dim)
                continue;
            rest.clear();
            if (mode == kFundamental) {
                rest = ket.occ;
            } else {
                rest.reserve(mode_count);
                rest.push_back(ket.n0);
                for (int k = 0; k < mode_count; ++k)
                    if (k != position)
                        rest.push_back(ket.occ[k]);
            }
            groups[rest].emplace_back(occ, block.amplitudes(i));
        }
    }

    ModeDensityMatrix result;
    result.mode = mode;
    result.rho = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& [key, members] : groups) {
        for (const auto& [j, aj] : members)
            for (const auto& [k, ak] : members)
                result.rho(j, k) += aj * std::conj(ak);
    }
    result.tail_mass = total - result.rho.real().diagonal().sum();
    return result;
}

double mandel_q(const PhotonDistribution& dist) {
    const double total = dist.total();
    if (total <= 0.0)
        throw std::domain_error("empty photon distribution");
    const double mean = dist.mean() / total;
    if (mean == 0.0)
        throw std::domain_error("Mandel parameter is undefined for zero mean");
    const double second = dist.second_moment() / total;
    return (second - mean * mean) / mean - 1.0;
}

double purity(const ModeDensityMatrix& rho) {
    return rho.rho.squaredNorm();
}

Quadratures quadratures(const QuantumState& state, int mode, double tail_eps) {
    const ModeDensityMatrix rho = reduced_density(state, mode, tail_eps);
    std::complex<double> a = 0.0;
    const int dim = static_cast<int>(rho.rho.rows());
    for (int j = 1; j < dim; ++j)
        a += std::sqrt(double(j)) * rho.rho(j, j - 1);
    return Quadratures{a.real(), a.imag()};
}

namespace {

/// Accumulate sum_{j,k} rho_jk (-1)^j <k|D(beta)|j> for one grid point.
/// The matrix elements are evaluated per diagonal offset through the
/// associated-Laguerre three-term recurrence, rescaled so the recurring
/// quantity is the matrix element magnitude itself (bounded by 1); prefactor
/// ratios enter as exact square roots.
std::complex<double> displaced_parity_sum(const Eigen::MatrixXcd& rho,
                                          std::complex<double> beta) {
    const int dim = static_cast<int>(rho.rows());
    const double x = std::norm(beta);
    const double log_abs_beta = x > 0.0 ? std::log(std::abs(beta)) : 0.0;
    const double phi = std::arg(beta);

    std::complex<double> accum = 0.0;
    for (int a = 0; a < dim; ++a) {
        if (a > 0 && x == 0.0)
            break; // identity displacement has no off-diagonal elements
        const double log_t0 =
            -0.5 * std::lgamma(a + 1.0) + (a > 0 ? a * log_abs_beta : 0.0) -
            0.5 * x;
        double t_prev = 0.0;
        double t = std::exp(log_t0);
        // Net phases after folding the parity sign (-1)^j into (-1)^q: the
        // (-1)^a of (-conj(beta))^a cancels against (-1)^(q+a) on the lower
        // triangle, leaving conjugate unit phases.
        const std::complex<double> up = std::polar(1.0, a * phi);
        const std::complex<double> down = std::conj(up);

        for (int q = 0; q + a < dim; ++q) {
            const double sign = q % 2 ? -1.0 : 1.0;
            if (a == 0) {
                accum += rho(q, q) * (sign * t);
            } else {
                accum += rho(q, q + a) * (sign * t) * up;
                accum += rho(q + a, q) * (sign * t) * down;
            }
            // Advance the scaled recurrence: t_{q+1} from t_q, t_{q-1}.
            const double r1 = std::sqrt((q + 1.0) / (q + 1.0 + a));
            const double r0 = q > 0 ? std::sqrt(double(q) / (q + a)) : 0.0;
            const double t_next = ((2.0 * q + 1.0 + a - x) * t * r1 -
                                   (q + double(a)) * t_prev * r1 * r0) /
                                  (q + 1.0);
            t_prev = t;
            t = t_next;
        }
    }
    return accum;
}

} // namespace

WignerGrid wigner(const ModeDensityMatrix& rho,
                  const std::vector<std::complex<double>>& grid_points,
                  double tail_threshold) {
    WignerGrid grid;
    grid.mode = rho.mode;
    grid.points = grid_points;
    grid.values.reserve(grid_points.size());
    grid.cutoff_warning = rho.tail_mass > tail_threshold;

    for (const auto& alpha : grid_points) {
        const std::complex<double> sum = displaced_parity_sum(rho.rho, 2.0 * alpha);
        grid.values.push_back(2.0 / M_PI * sum.real());
        grid.max_imag_residue =
            std::max(grid.max_imag_residue, 2.0 / M_PI * std::abs(sum.imag()));
    }
    return grid;
}

std::vector<std::complex<double>> wigner_grid_points(double re0, double re1,
                                                     double im0, double im1,
                                                     int points_per_axis) {
    if (points_per_axis < 2)
        throw std::invalid_argument("wigner grid needs at least 2 points per axis");
    if (!(re1 > re0) || !(im1 > im0))
        throw std::invalid_argument("wigner grid bounds must be ordered");
    std::vector<std::complex<double>> points;
    points.reserve(static_cast<std::size_t>(points_per_axis) * points_per_axis);
    const double dre = (re1 - re0) / (points_per_axis - 1);
    const double dim = (im1 - im0) / (points_per_axis - 1);
    for (int j = 0; j < points_per_axis; ++j)
        for (int i = 0; i < points_per_axis; ++i)
            points.emplace_back(re0 + i * dre, im0 + j * dim);
    return points;
}

} // namespace qhhg
