#include "qhhg/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace qhhg {

double ShortTimeExpansion::mean_tau2_coefficient() const {
    const double a2 = std::norm(alpha0);
    double sum = 0.0;
    for (const auto& [order, chi] : couplings.chi)
        sum += order * chi * chi * std::pow(a2, order);
    return -sum;
}

double ShortTimeExpansion::second_moment_tau2_coefficient() const {
    const double a2 = std::norm(alpha0);
    double sum = 0.0;
    for (const auto& [order, chi] : couplings.chi)
        sum += chi * chi * std::pow(a2, order) *
               (static_cast<double>(order) * order + 2.0 * order * a2);
    return -sum;
}

double ShortTimeExpansion::q0_tau2_coefficient() const {
    const double a2 = std::norm(alpha0);
    double sum = 0.0;
    for (const auto& [order, chi] : couplings.chi)
        sum += (static_cast<double>(order) * order - order) * chi * chi *
               std::pow(a2, order - 1);
    return -sum;
}

double ShortTimeExpansion::fundamental_mean(double tau) const {
    return std::norm(alpha0) + tau * tau * mean_tau2_coefficient();
}

double ShortTimeExpansion::fundamental_second_moment(double tau) const {
    const double a2 = std::norm(alpha0);
    return a2 * a2 + a2 + tau * tau * second_moment_tau2_coefficient();
}

double ShortTimeExpansion::q0_leading(double tau) const {
    return tau * tau * q0_tau2_coefficient();
}

double q2_leading(double tau, double chi2, std::complex<double> alpha0) {
    const double t2 = tau * tau;
    const double a2 = std::norm(alpha0);
    return -(4.0 / 3.0) * t2 * t2 * chi2 * chi2 * chi2 * chi2 * a2 * a2;
}

double fit_loglog_slope(std::span<const double> taus,
                        std::span<const double> values) {
    if (taus.size() != values.size())
        throw std::invalid_argument("slope fit arrays differ in length");
    // Ordinary least squares on (log tau, log |value|). Points where the
    // value is exactly zero carry no slope information and are rejected
    // rather than silently skipped; a zero here means the probe window was
    // chosen badly.
    std::size_t usable = 0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(taus[i] > 0.0))
            throw std::invalid_argument("slope fit needs positive times");
        if (values[i] == 0.0)
            throw std::invalid_argument("slope fit hit an exactly zero value");
        const double x = std::log(taus[i]);
        const double y = std::log(std::abs(values[i]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++usable;
    }
    if (usable < 2)
        throw std::invalid_argument("slope fit needs at least two points");
    const double n = static_cast<double>(usable);
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0)
        throw std::invalid_argument("slope fit times are all identical");
    return (n * sxy - sx * sy) / denom;
}

SlopeCheck hh_q_order_check(std::span<const double> taus,
                            std::span<const double> q_values, double width) {
    SlopeCheck check;
    check.slope = fit_loglog_slope(taus, q_values);
    check.pass = std::abs(check.slope - 4.0) <= width;
    return check;
}

} // namespace qhhg
