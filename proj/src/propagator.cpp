#include "qhhg/propagator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>

namespace qhhg {

namespace {

constexpr double kBreakdownTol = 1e-14;

struct KrylovSpace {
    Eigen::MatrixXcd basis;       // n x k, orthonormal columns
    Eigen::MatrixXd eigvecs;      // k x k eigenvectors of the tridiagonal
    Eigen::VectorXd eigvals;      // k eigenvalues
    double beta_next = 0.0;       // coupling to the (k+1)-th direction
    bool invariant = false;       // subspace closed under H
};

/// Lanczos with full reorthogonalisation. The matrix is real symmetric, so
/// the projected tridiagonal is real even for complex start vectors.
KrylovSpace build_krylov(const SparseSymmetric& h, const Eigen::VectorXcd& v,
                         int max_dim) {
    const int n = static_cast<int>(v.size());
    const int m = std::min(max_dim, n);
    const double scale = std::max(1.0, h.one_norm());

    Eigen::MatrixXcd basis(n, m);
    Eigen::VectorXd alpha(m), beta(m);
    basis.col(0) = v / v.norm();

    int k = 0;
    double beta_next = 0.0;
    bool invariant = false;
    Eigen::VectorXcd w(n);
    while (true) {
        h.apply(basis.col(k).data(), w.data());
        alpha(k) = basis.col(k).dot(w).real();
        w -= alpha(k) * basis.col(k);
        if (k > 0)
            w -= beta(k - 1) * basis.col(k - 1);
        // Two Gram-Schmidt sweeps keep the basis orthonormal to machine
        // precision; the norm bookkeeping below leans on that.
        for (int sweep = 0; sweep < 2; ++sweep)
            w -= basis.leftCols(k + 1) * (basis.leftCols(k + 1).adjoint() * w);
        beta_next = w.norm();
        ++k;
        if (beta_next <= kBreakdownTol * scale) {
            invariant = true;
            beta_next = 0.0;
            break;
        }
        if (k == m)
            break;
        beta(k - 1) = beta_next;
        basis.col(k) = w / beta_next;
    }

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        tri(i, i) = alpha(i);
        if (i + 1 < k) {
            tri(i, i + 1) = beta(i);
            tri(i + 1, i) = beta(i);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);

    KrylovSpace space;
    space.basis = basis.leftCols(k);
    space.eigvecs = es.eigenvectors();
    space.eigvals = es.eigenvalues();
    space.beta_next = beta_next;
    space.invariant = invariant;
    return space;
}

/// exp(-i s sign T) e1 in the eigenbasis of the projected tridiagonal.
Eigen::VectorXcd small_exp(const KrylovSpace& space, double s, double sign) {
    const int k = static_cast<int>(space.eigvals.size());
    const Eigen::VectorXd first = space.eigvecs.row(0).transpose();
    Eigen::VectorXd ph_re(k), ph_im(k);
    for (int i = 0; i < k; ++i) {
        const double angle = -sign * s * space.eigvals(i);
        ph_re(i) = first(i) * std::cos(angle);
        ph_im(i) = first(i) * std::sin(angle);
    }
    Eigen::VectorXcd z(k);
    z.real() = space.eigvecs * ph_re;
    z.imag() = space.eigvecs * ph_im;
    return z;
}

/// Bound on the defect of the Krylov step over [0, h]: the residual identity
/// gives |error| <= beta_next * integral of |last component of exp(-i s T) e1|.
/// The integrand oscillates at the spectral spread, so the quadrature is
/// composite with segments short enough to resolve the phase.
double step_error_bound(const KrylovSpace& space, double h) {
    if (space.beta_next == 0.0)
        return 0.0;
    const int k = static_cast<int>(space.eigvals.size());
    const Eigen::VectorXd first = space.eigvecs.row(0).transpose();
    const Eigen::VectorXd last = space.eigvecs.row(k - 1).transpose();
    auto magnitude = [&](double s) {
        std::complex<double> z = 0.0;
        for (int i = 0; i < k; ++i)
            z += last(i) * first(i) *
                 std::complex<double>(std::cos(s * space.eigvals(i)),
                                      -std::sin(s * space.eigvals(i)));
        return std::abs(z);
    };
    const double spread =
        space.eigvals(k - 1) - space.eigvals(0) + std::abs(space.beta_next);
    const double needed = h * spread / 2.5;
    if (needed > 1024.0) {
        // Too oscillatory to integrate cheaply; |z_m| <= 1 still gives a
        // rigorous (if pessimistic) bound.
        return space.beta_next * h;
    }
    const int segments = std::max(1, static_cast<int>(std::ceil(needed)));
    double integral = 0.0;
    const double seg = h / segments;
    for (int i = 0; i < segments; ++i) {
        integral += boost::math::quadrature::gauss<double, 15>::integrate(
            magnitude, i * seg, (i + 1) * seg);
    }
    return space.beta_next * integral;
}

/// March exp(-i sign t H) v from t = 0 through the ascending positive times in
/// `targets`, storing each reached state into out[slot].
void march(const SparseSymmetric& h, Eigen::VectorXcd v,
           const std::vector<std::pair<double, int>>& targets, double sign,
           const PropagatorConfig& config,
           std::vector<Eigen::VectorXcd>& out, long& substeps) {
    if (targets.empty())
        return;
    const double extent = targets.back().first;
    if (extent == 0.0) {
        for (const auto& [s, slot] : targets)
            out[slot] = v;
        return;
    }
    const double rate = config.step_tol / extent;

    double t = 0.0;
    std::size_t next = 0;
    double h_guess = extent;
    if (config.max_step > 0.0)
        h_guess = std::min(h_guess, config.max_step);
    const double norm_scale = std::max(1.0, h.one_norm());
    h_guess = std::min(h_guess, 10.0 / norm_scale);

    while (next < targets.size()) {
        if (targets[next].first == t) {
            out[targets[next].second] = v;
            ++next;
            continue;
        }
        KrylovSpace space = build_krylov(h, v, config.krylov_dim);
        const double norm_v = v.norm();

        if (space.invariant) {
            // Closed subspace: the projected evolution is exact at any time.
            for (; next < targets.size(); ++next) {
                const auto& [s, slot] = targets[next];
                out[slot] = space.basis * small_exp(space, s - t, sign) * norm_v;
            }
            ++substeps;
            return;
        }

        double step = std::min(h_guess, extent - t);
        if (config.max_step > 0.0)
            step = std::min(step, config.max_step);
        double err = step_error_bound(space, step);
        int halvings = 0;
        while (err > rate * step) {
            step *= 0.5;
            if (++halvings > 60)
                throw SolverError("time step underflow at tau = " +
                                  std::to_string(sign * t) +
                                  "; step_tol may be unreachable");
            err = step_error_bound(space, step);
        }

        while (next < targets.size() && targets[next].first <= t + step) {
            const auto& [s, slot] = targets[next];
            out[slot] = space.basis * small_exp(space, s - t, sign) * norm_v;
            ++next;
        }
        if (next < targets.size()) {
            v = space.basis * small_exp(space, step, sign) * norm_v;
            t += step;
            h_guess = err < 0.1 * rate * step ? 2.0 * step : step;
        } else {
            // Final state landed on the last target; already stored.
            t += step;
        }
        ++substeps;
    }
}

std::vector<Eigen::VectorXcd> evolve_sector_eigen(const SparseSymmetric& h,
                                                  const Eigen::VectorXcd& v0,
                                                  std::span<const double> taus) {
    if (h.dimension() > 2000)
        throw SolverError("dense diagonalisation is limited to dimension 2000; "
                          "sector has " + std::to_string(h.dimension()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.dense());
    const Eigen::MatrixXd& u = es.eigenvectors();
    const Eigen::VectorXd& lambda = es.eigenvalues();

    // Keep the arithmetic real: transform the real and imaginary parts of the
    // state separately through the eigenbasis.
    const Eigen::VectorXd c_re = u.transpose() * v0.real();
    const Eigen::VectorXd c_im = u.transpose() * v0.imag();

    std::vector<Eigen::VectorXcd> states;
    states.reserve(taus.size());
    const int n = h.dimension();
    Eigen::VectorXd d_re(n), d_im(n);
    for (double tau : taus) {
        for (int i = 0; i < n; ++i) {
            const double c = std::cos(tau * lambda(i));
            const double s = std::sin(tau * lambda(i));
            // (c - i s) (c_re + i c_im)
            d_re(i) = c * c_re(i) + s * c_im(i);
            d_im(i) = c * c_im(i) - s * c_re(i);
        }
        Eigen::VectorXcd w(n);
        w.real() = u * d_re;
        w.imag() = u * d_im;
        states.push_back(std::move(w));
    }
    return states;
}

} // namespace

std::vector<Eigen::VectorXcd> evolve_sector(const SparseSymmetric& hamiltonian,
                                            const Eigen::VectorXcd& v0,
                                            std::span<const double> taus,
                                            const PropagatorConfig& config,
                                            SectorStats* stats) {
    if (v0.size() != hamiltonian.dimension())
        throw std::invalid_argument("state dimension does not match the Hamiltonian");
    if (std::abs(v0.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("initial sector state must be normalised");
    if (!std::is_sorted(taus.begin(), taus.end()))
        throw std::invalid_argument("tau grid must be ascending");
    if (config.krylov_dim < 2)
        throw std::invalid_argument("krylov_dim must be at least 2");
    if (!(config.step_tol > 0.0))
        throw std::invalid_argument("step_tol must be positive");

    if (stats) {
        stats->dimension = hamiltonian.dimension();
        stats->substeps = 0;
    }

    if (config.method == PropagatorConfig::Method::Eigen) {
        auto states = evolve_sector_eigen(hamiltonian, v0, taus);
        return states;
    }

    // Split the grid at tau = 0 and march each side outward.
    std::vector<std::pair<double, int>> forward, backward;
    for (int i = 0; i < static_cast<int>(taus.size()); ++i) {
        if (taus[i] >= 0.0)
            forward.emplace_back(taus[i], i);
        else
            backward.emplace_back(-taus[i], i);
    }
    std::reverse(backward.begin(), backward.end());

    std::vector<Eigen::VectorXcd> states(taus.size());
    long substeps = 0;
    march(hamiltonian, v0, forward, 1.0, config, states, substeps);
    march(hamiltonian, v0, backward, -1.0, config, states, substeps);
    if (stats)
        stats->substeps = substeps;
    return states;
}

std::vector<QuantumState> evolve_full(std::complex<double> alpha0,
                                      const ModeSet& modes,
                                      const CouplingSet& couplings,
                                      std::span<const double> taus,
                                      double epsilon,
                                      const PropagatorConfig& config,
                                      int threads,
                                      EvolveStats* stats) {
    if (!std::is_sorted(taus.begin(), taus.end()))
        throw std::invalid_argument("tau grid must be ascending");

    const auto weights = sector_weights(alpha0, epsilon);
    const int sector_count = static_cast<int>(weights.size());

    double retained = 0.0;
    for (const auto& w : weights)
        retained += std::norm(w.amplitude);

    std::vector<std::shared_ptr<const SectorBasis>> bases(sector_count);
    std::vector<SparseSymmetric> matrices;
    matrices.reserve(sector_count);
    for (int i = 0; i < sector_count; ++i) {
        bases[i] = std::make_shared<const SectorBasis>(
            enumerate_sector(modes, weights[i].weighted_number));
        matrices.push_back(interaction_matrix(*bases[i], couplings));
    }

    std::vector<std::vector<Eigen::VectorXcd>> per_sector(sector_count);
    std::vector<SectorStats> sector_stats(sector_count);

    auto run_one = [&](int i) {
        const int dim = bases[i]->dimension();
        Eigen::VectorXcd v0 = Eigen::VectorXcd::Zero(dim);
        const int start = bases[i]->index_of(std::vector<int>(modes.count(), 0));
        v0(start) = 1.0;
        sector_stats[i].weighted_number = weights[i].weighted_number;
        per_sector[i] =
            evolve_sector(matrices[i], v0, taus, config, &sector_stats[i]);
    };

    int workers = threads > 0 ? threads
                              : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, sector_count);

    if (workers == 1) {
        for (int i = 0; i < sector_count; ++i)
            run_one(i);
    } else {
        std::atomic<int> cursor{0};
        std::mutex error_mutex;
        std::exception_ptr first_error;
        auto worker = [&] {
            while (true) {
                const int i = cursor.fetch_add(1);
                if (i >= sector_count)
                    return;
                try {
                    run_one(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error)
                        first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
        if (first_error)
            std::rethrow_exception(first_error);
    }

    // Deterministic merge: sector order and snapshot order are fixed by the
    // inputs, so the assembled states are identical for any worker count.
    std::vector<QuantumState> result(taus.size());
    for (std::size_t j = 0; j < taus.size(); ++j) {
        result[j].tau = taus[j];
        result[j].retained_probability = retained;
        for (int i = 0; i < sector_count; ++i) {
            const int m = weights[i].weighted_number;
            const std::complex<double> free_phase =
                std::polar(1.0, -taus[j] * m);
            SectorAmplitudes block;
            block.basis = bases[i];
            block.amplitudes =
                per_sector[i][j] * (weights[i].amplitude * free_phase);
            result[j].sectors.emplace(m, std::move(block));
        }
    }
    if (stats)
        stats->sectors = std::move(sector_stats);
    return result;
}

} // namespace qhhg
