#include "qhhg/parametric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace qhhg {

namespace {

std::complex<double> complex_int_pow(std::complex<double> base, int exponent) {
    std::complex<double> result = 1.0;
    std::complex<double> factor = base;
    for (int e = exponent; e > 0; e >>= 1) {
        if (e & 1)
            result *= factor;
        factor *= factor;
    }
    return result;
}

} // namespace

std::complex<double> ParametricPrediction::beta(double tau) const {
    const std::complex<double> rotation = std::polar(1.0, -order * tau);
    return chi * complex_int_pow(alpha0, order) * rotation;
}

std::complex<double> ParametricPrediction::coherent_parameter(double tau) const {
    return std::complex<double>(0.0, -tau) * beta(tau);
}

double ParametricPrediction::nbar(double tau) const {
    return tau * tau * chi * chi * std::pow(std::norm(alpha0), order);
}

ParametricPrediction parametric_prediction(int order,
                                           const CouplingSet& couplings,
                                           std::complex<double> alpha0) {
    ParametricPrediction prediction;
    prediction.order = order;
    prediction.chi = couplings.at(order);
    prediction.alpha0 = alpha0;
    return prediction;
}

double weighted_ratio(const ParametricPrediction& a,
                      const ParametricPrediction& b, double tau) {
    const double denom = b.order * b.nbar(tau);
    if (denom == 0.0)
        throw std::domain_error("weighted ratio is undefined where the reference "
                                "occupation vanishes");
    return a.order * a.nbar(tau) / denom;
}

namespace {

void check_grid(const std::vector<double>& grid) {
    if (grid.empty())
        throw std::invalid_argument("frequency grid must not be empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0))
            throw std::invalid_argument("frequencies must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("frequency grid must be strictly ascending");
    }
}

} // namespace

PulseFit fit_pulse(std::span<const double> times, std::span<const double> field,
                   const std::vector<double>& grid) {
    check_grid(grid);
    if (times.size() != field.size())
        throw std::invalid_argument("times and field samples differ in length");
    const int rows = static_cast<int>(times.size());
    const int modes = static_cast<int>(grid.size());
    if (rows < 2 * modes)
        throw std::invalid_argument("pulse fit needs at least two samples per mode");

    // E(t) = sum_m 2 sqrt(w_m) [u_m sin(w_m t) - v_m cos(w_m t)] with
    // alpha_m = u_m + i v_m; a plain real least-squares problem.
    Eigen::MatrixXd design(rows, 2 * modes);
    for (int i = 0; i < rows; ++i) {
        for (int m = 0; m < modes; ++m) {
            const double scale = 2.0 * std::sqrt(grid[m]);
            design(i, 2 * m) = scale * std::sin(grid[m] * times[i]);
            design(i, 2 * m + 1) = -scale * std::cos(grid[m] * times[i]);
        }
    }
    Eigen::VectorXd rhs(rows);
    for (int i = 0; i < rows; ++i)
        rhs(i) = field[i];

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 2 * modes)
        throw std::invalid_argument("pulse fit is rank deficient; the grid or "
                                    "sampling makes modes indistinguishable");
    const Eigen::VectorXd solution = qr.solve(rhs);

    PulseFit fit;
    fit.spec.omega = grid;
    fit.spec.alpha.resize(modes);
    for (int m = 0; m < modes; ++m)
        fit.spec.alpha[m] = {solution(2 * m), solution(2 * m + 1)};

    const Eigen::VectorXd residual = design * solution - rhs;
    fit.max_residual = residual.cwiseAbs().maxCoeff();
    fit.rms_residual = std::sqrt(residual.squaredNorm() / rows);
    return fit;
}

PulseFit fit_gaussian_pulse(double e0, double tau_p, double omega0,
                            const std::vector<double>& grid) {
    check_grid(grid);
    if (!(e0 > 0.0) || !(tau_p > 0.0) || !(omega0 > 0.0))
        throw std::invalid_argument("gaussian pulse parameters must be positive");
    if (grid.size() < 2)
        throw std::invalid_argument("gaussian pulse needs at least two modes");

    // Continuum sine-transform of E0 exp(-t^2/tau_p^2) sin(omega0 t), sampled
    // with trapezoid weights on the grid. The mirror term at -omega0 is kept
    // even though it only matters for very short pulses.
    const double front = e0 * tau_p / (2.0 * std::sqrt(M_PI));
    auto spectral = [&](double w) {
        const double d_minus = tau_p * (w - omega0) / 2.0;
        const double d_plus = tau_p * (w + omega0) / 2.0;
        return front * (std::exp(-d_minus * d_minus) - std::exp(-d_plus * d_plus));
    };

    PulseFit fit;
    fit.spec.omega = grid;
    fit.spec.alpha.resize(grid.size());
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const double left = m == 0 ? grid[0] : grid[m - 1];
        const double right = m + 1 == grid.size() ? grid[m] : grid[m + 1];
        const double weight = 0.5 * (right - left);
        fit.spec.alpha[m] = spectral(grid[m]) * weight / (2.0 * std::sqrt(grid[m]));
    }

    // The construction is analytic; measure how well the discrete modes
    // reproduce the pulse on a check grid covering its support.
    const int samples = 1001;
    std::vector<double> t(samples), exact(samples);
    for (int i = 0; i < samples; ++i) {
        t[i] = -4.0 * tau_p + 8.0 * tau_p * i / (samples - 1);
        exact[i] = e0 * std::exp(-t[i] * t[i] / (tau_p * tau_p)) *
                   std::sin(omega0 * t[i]);
    }
    const std::vector<double> rebuilt = reconstruct_field(fit.spec, t);
    double max_res = 0.0, sq = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double r = rebuilt[i] - exact[i];
        max_res = std::max(max_res, std::abs(r));
        sq += r * r;
    }
    fit.max_residual = max_res;
    fit.rms_residual = std::sqrt(sq / samples);
    return fit;
}

std::vector<double> reconstruct_field(const PulseSpec& pulse,
                                      std::span<const double> times) {
    if (pulse.omega.size() != pulse.alpha.size())
        throw std::invalid_argument("pulse spec arrays differ in length");
    std::vector<double> field(times.size(), 0.0);
    for (std::size_t i = 0; i < times.size(); ++i) {
        double e = 0.0;
        for (std::size_t m = 0; m < pulse.omega.size(); ++m) {
            const std::complex<double> rot = std::polar(1.0, -pulse.omega[m] * times[i]);
            e += std::sqrt(pulse.omega[m]) * -2.0 * std::imag(pulse.alpha[m] * rot);
        }
        field[i] = e;
    }
    return field;
}

std::vector<double> harmonic_field(const PulseSpec& pulse, int order,
                                   double chi, std::span<const double> taus) {
    if (pulse.omega.size() != pulse.alpha.size())
        throw std::invalid_argument("pulse spec arrays differ in length");
    if (order < 1)
        throw std::invalid_argument("harmonic order must be at least 1");

    std::vector<std::complex<double>> alpha_pow(pulse.alpha.size());
    for (std::size_t m = 0; m < pulse.alpha.size(); ++m)
        alpha_pow[m] = complex_int_pow(pulse.alpha[m], order);

    std::vector<double> field(taus.size(), 0.0);
    for (std::size_t i = 0; i < taus.size(); ++i) {
        std::complex<double> z = 0.0;
        for (std::size_t m = 0; m < pulse.omega.size(); ++m) {
            const std::complex<double> rot =
                std::polar(1.0, -order * pulse.omega[m] * taus[i]);
            z += std::sqrt(order * pulse.omega[m]) * alpha_pow[m] * rot;
        }
        // z + conj(z): the series is real term by term.
        field[i] = taus[i] * chi * 2.0 * z.real();
    }
    return field;
}

} // namespace qhhg
