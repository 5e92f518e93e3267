#ifndef DECONV_POTENTIAL_HPP
#define DECONV_POTENTIAL_HPP

/* Gauss (*) Laplace convolution integrals and the Log-Erf potential.
 *
 *   J(x0, x, d, b) = int_0^{x0} exp(-[d (t-x)^2 + b t]/2) dt
 *   I(x0, x, d, b) = int_{-inf}^{x0} exp(-[d (t-x)^2 + b |t|]/2) dt
 *   phi(x) = -2 log I(+inf, x, gamma_d, gamma_b), shifted so phi(0) = 0
 *
 * phi and phi_prime are evaluated through log_erfcx of
 *   zm = (rho + x) sqrt(gamma_d/2),  zp = (rho - x) sqrt(gamma_d/2),
 * with rho = gamma_b / (2 gamma_d): the exponential prefactors of the two
 * chi terms are equal and cancel, leaving
 *   phi(x)  = gamma_d x^2 - 2 [logaddexp(Lm, Lp) - log 2 - log_erfcx(eta)]
 *   phi'(x) = -gamma_b tanh((Lm - Lp)/2)
 * which never overflow, for any |x| and any admissible hyperparameters.
 * eta = gamma_b / sqrt(8 gamma_d) is the regime parameter; the identity
 * (rho) sqrt(gamma_d/2) = eta fixes the phi(0) = 0 shift.
 */

#include <cmath>
#include <stdexcept>

#include "deconv/specfun.hpp"

namespace deconv {

struct PotentialParams {
    double gamma_d;
    double gamma_b;

    PotentialParams(double gd, double gb) : gamma_d(gd), gamma_b(gb) {
        if (!(gd > 0.0) || !std::isfinite(gd) || !(gb > 0.0) || !std::isfinite(gb))
            throw std::domain_error("PotentialParams: gamma_d, gamma_b must be positive");
    }

    double rho() const { return gamma_b / (2.0 * gamma_d); }
    double eta() const { return gamma_b / std::sqrt(8.0 * gamma_d); }
};

struct HuberEquiv {
    double lambda;
    double s;
};

namespace detail {

inline double logaddexp(double a, double b) {
    double m = a > b ? a : b;
    double n = a > b ? b : a;
    return m + std::log1p(std::exp(n - m));
}

}  // namespace detail

// J via the closed form; the erf difference is regrouped through erfc on
// whichever side avoids cancellation.  x0 = +inf is an accepted sentinel.
inline double integral_J(double x0, double x, double d, double b) {
    if (std::isnan(x0) || x0 < 0.0)
        throw std::domain_error("integral_J: x0 must be >= 0");
    if (!(d > 0.0) || !std::isfinite(d) || !std::isfinite(x) || !std::isfinite(b))
        throw std::domain_error("integral_J: bad parameters");
    double rt = std::sqrt(0.5 * d);
    double xt = x - b / (2.0 * d);
    double e1 = xt * rt;
    double delta;
    if (std::isinf(x0)) {
        delta = erfc(-e1);
    } else {
        double e2 = (xt - x0) * rt;  // e2 <= e1
        if (e2 >= 0.0)
            delta = erfc(e2) - erfc(e1);
        else if (e1 <= 0.0)
            delta = erfc(-e1) - erfc(-e2);
        else
            delta = erf(e1) + erf(-e2);
    }
    if (delta <= 0.0)
        return 0.0;
    double ex = b * b / (8.0 * d) - 0.5 * b * x;
    return std::sqrt(3.14159265358979323846 / (2.0 * d)) * std::exp(ex) * delta;
}

// lower integral of the Gauss (*) Laplace integrand, assembled from J
inline double integral_I(double x0, double x, double d, double b) {
    if (!(d > 0.0) || !(b > 0.0) || !std::isfinite(d) || !std::isfinite(b))
        throw std::domain_error("integral_I: d and b must be positive");
    if (std::isnan(x0))
        throw std::domain_error("integral_I: x0 is NaN");
    if (x0 < 0.0)
        return integral_J(HUGE_VAL, -x, d, b) - integral_J(-x0, -x, d, b);
    return integral_J(HUGE_VAL, -x, d, b) + integral_J(x0, x, d, b);
}

inline double phi(double x, const PotentialParams& p) {
    if (!std::isfinite(x))
        throw std::domain_error("phi: non-finite argument");
    double rt = std::sqrt(0.5 * p.gamma_d);
    double lm = log_erfcx((p.rho() + x) * rt);
    double lp = log_erfcx((p.rho() - x) * rt);
    // shift constant evaluated through the same expression as lm at x = 0,
    // so phi(0) == 0 exactly (rho * rt is eta)
    double c0 = 0.6931471805599453 + log_erfcx(p.rho() * rt);
    return p.gamma_d * x * x - 2.0 * (detail::logaddexp(lm, lp) - c0);
}

inline double phi_prime(double x, const PotentialParams& p) {
    if (!std::isfinite(x))
        throw std::domain_error("phi_prime: non-finite argument");
    double rt = std::sqrt(0.5 * p.gamma_d);
    double lm = log_erfcx((p.rho() + x) * rt);
    double lp = log_erfcx((p.rho() - x) * rt);
    return -p.gamma_b * std::tanh(0.5 * (lm - lp));
}

inline double phi_second_at_zero(const PotentialParams& p) {
    double eta = p.eta();
    double denom = eta * std::sqrt(3.14159265358979323846) * erfcx(eta);
    return 0.5 * p.gamma_b * p.gamma_b * (1.0 / denom - 1.0);
}

inline HuberEquiv huber_equiv(const PotentialParams& p) {
    double pp0 = phi_second_at_zero(p);
    return { 0.5 * pp0, p.gamma_b / pp0 };
}

inline double critical_gamma_b(double gamma_d) {
    if (!(gamma_d > 0.0) || !std::isfinite(gamma_d))
        throw std::domain_error("critical_gamma_b: gamma_d must be positive");
    return std::sqrt(2.0 * 3.14159265358979323846 * gamma_d);
}

inline double huber_potential(double x, const HuberEquiv& h) {
    double a = std::fabs(x);
    if (a <= h.s)
        return h.lambda * x * x;
    return h.lambda * (2.0 * h.s * a - h.s * h.s);
}

inline double huber_prime(double x, const HuberEquiv& h) {
    if (std::fabs(x) <= h.s)
        return 2.0 * h.lambda * x;
    return x > 0.0 ? 2.0 * h.lambda * h.s : -2.0 * h.lambda * h.s;
}

}  // namespace deconv

#endif
