#ifndef DECONV_SPECFUN_HPP
#define DECONV_SPECFUN_HPP

/* Error-function family on double, tuned for the far tails.
 *
 * The rational minimax approximations are W. J. Cody's, "Rational Chebyshev
 * approximation for the error function", Math. Comp. 23 (1969) 631-638
 * (the netlib CALERF coefficient set for IEEE double).  We need erfcx and
 * log-domain variants because the field sampler evaluates erfc ratios at
 * arguments ~ sqrt(gamma_d) * rho that can exceed 40, far past where erfc
 * underflows.  exp(x*x)*erfc(x) computed naively is useless there; the
 * scaled form is accurate over the whole range.
 *
 * All entry points throw std::domain_error on non-finite input.
 */

#include <cmath>
#include <stdexcept>
#include <string>

namespace deconv {

namespace detail {

// erf(x) = x * erf_small(x*x) on |x| <= 0.46875
inline double erf_small(double ysq) {
    static const double a[5] = { 3.1611237438705656, 113.864154151050156,
        377.485237685302021, 3209.37758913846947, .185777706184603153 };
    static const double b[4] = { 23.6012909523441209, 244.024637934444173,
        1282.61652607737228, 2844.23683343917062 };
    double xnum = a[4] * ysq;
    double xden = ysq;
    for (int i = 0; i < 3; ++i) {
        xnum = (xnum + a[i]) * ysq;
        xden = (xden + b[i]) * ysq;
    }
    return (xnum + a[3]) / (xden + b[3]);
}

// erfcx(y) on 0.46875 <= y <= 4
inline double erfcx_mid(double y) {
    static const double c[9] = { .564188496988670089, 8.88314979438837594,
        66.1191906371416295, 298.635138197400131, 881.95222124176909,
        1712.04761263407058, 2051.07837782607147, 1230.33935479799725,
        2.15311535474403846e-8 };
    static const double d[8] = { 15.7449261107098347, 117.693950891312499,
        537.181101862009858, 1621.38957456669019, 3290.79923573345963,
        4362.61909014324716, 3439.36767414372164, 1230.33935480374942 };
    double xnum = c[8] * y;
    double xden = y;
    for (int i = 0; i < 7; ++i) {
        xnum = (xnum + c[i]) * y;
        xden = (xden + d[i]) * y;
    }
    return (xnum + c[7]) / (xden + d[7]);
}

// erfcx(y) on y > 4; exact limit 1/(y*sqrt(pi)) takes over past 6.71e7
inline double erfcx_tail(double y) {
    static const double p[6] = { .305326634961232344, .360344899949804439,
        .125781726111229246, .0160837851487422766, 6.58749161529837803e-4,
        .0163153871373020978 };
    static const double q[5] = { 2.56852019228982242, 1.87295284992346047,
        .527905102951428412, .0605183413124413191, .00233520497626869185 };
    static const double sqrpi = 0.56418958354775628695;  // 1/sqrt(pi)
    if (y >= 6.71e7)
        return sqrpi / y;
    double ysq = 1.0 / (y * y);
    double xnum = p[5] * ysq;
    double xden = ysq;
    for (int i = 0; i < 4; ++i) {
        xnum = (xnum + p[i]) * ysq;
        xden = (xden + q[i]) * ysq;
    }
    double r = ysq * (xnum + p[4]) / (xden + q[4]);
    return (sqrpi - r) / y;
}

// exp(-y*y) with the argument split y = ysq + del, ysq a multiple of 1/16,
// so the squaring of the large part is exact (Cody's rounding-error guard).
inline double exp_nsq(double y) {
    double ysq = std::floor(y * 16.0) / 16.0;
    double del = (y - ysq) * (y + ysq);
    return std::exp(-ysq * ysq) * std::exp(-del);
}

inline void check_finite(double x, const char* who) {
    if (!std::isfinite(x))
        throw std::domain_error(std::string(who) + ": non-finite argument");
}

}  // namespace detail

inline double erfcx(double x) {
    detail::check_finite(x, "erfcx");
    double y = std::fabs(x);
    if (y <= 0.46875) {
        double ysq = y > 1.11e-16 ? y * y : 0.0;
        return std::exp(ysq) * (1.0 - x * detail::erf_small(ysq));
    }
    if (x < 0.0) {
        // erfcx(x) = 2*exp(x*x) - erfcx(-x); overflows below -26.628
        if (x < -26.628)
            return HUGE_VAL;
        double ysq = std::floor(-x * 16.0) / 16.0;  // split as in exp_nsq
        double del = (-x - ysq) * (-x + ysq);
        double e = std::exp(ysq * ysq) * std::exp(del);
        return (e + e) - (y <= 4.0 ? detail::erfcx_mid(y) : detail::erfcx_tail(y));
    }
    return y <= 4.0 ? detail::erfcx_mid(y) : detail::erfcx_tail(y);
}

inline double erfc(double x) {
    detail::check_finite(x, "erfc");
    double y = std::fabs(x);
    if (y <= 0.46875) {
        double ysq = y > 1.11e-16 ? y * y : 0.0;
        return 1.0 - x * detail::erf_small(ysq);
    }
    double r = 0.0;
    if (y < 26.543)  // underflows to zero beyond
        r = (y <= 4.0 ? detail::erfcx_mid(y) : detail::erfcx_tail(y))
            * detail::exp_nsq(y);
    return x < 0.0 ? 2.0 - r : r;
}

inline double erf(double x) {
    detail::check_finite(x, "erf");
    double y = std::fabs(x);
    if (y <= 0.46875) {
        double ysq = y > 1.11e-16 ? y * y : 0.0;
        return x * detail::erf_small(ysq);
    }
    double r = 1.0 - erfc(y);
    return x < 0.0 ? -r : r;
}

// d/dx erfcx(x) = 2 x erfcx(x) - 2/sqrt(pi)
inline double erfcx_prime(double x) {
    return 2.0 * x * erfcx(x) - 1.1283791670955126;
}

// log(erfcx(x)).  For x < 0 erfcx explodes like 2 exp(x^2); go through
// erfc, which is then in (1, 2).
inline double log_erfcx(double x) {
    detail::check_finite(x, "log_erfcx");
    if (x >= 0.0)
        return std::log(erfcx(x));
    return x * x + std::log(erfc(x));
}

// log(erfc(x)) without underflow: erfc(x) = erfcx(x) exp(-x^2)
inline double log_erfc(double x) {
    detail::check_finite(x, "log_erfc");
    if (x >= 0.0)
        return log_erfcx(x) - x * x;
    return std::log(erfc(x));
}

// Solve log(erfc(z)) = l for z, any l < log(2).  Newton on the log-domain
// residual with a bracketing bisection safeguard; the iteration works at
// values of l around -2000 where erfc itself has long underflowed.
inline double ierfc_log(double l) {
    detail::check_finite(l, "ierfc_log");
    static const double log2_ = 0.6931471805599453;
    static const double logpi = 1.1447298858494002;
    static const double sqrtpi_2 = 0.8862269254527580;  // sqrt(pi)/2
    if (l >= log2_)
        throw std::domain_error("ierfc_log: log(erfc) must be < log 2");
    if (l >= 0.4054651081081644) {  // log(1.5): reflect erfc(-z) = 2 - erfc(z)
        double q2 = -2.0 * std::expm1(l - log2_);  // 2 - e^l, no cancellation
        return -ierfc_log(std::log(q2));
    }
    double z;
    if (l <= -0.9) {
        // erfc(z) ~ exp(-z^2)/(z sqrt(pi)): z^2 ~ -l - log(z) - log(pi)/2
        double t = -l;
        z = std::sqrt(t - 0.5 * std::log(t > 1.0 ? t : 1.0) - 0.5 * logpi);
    } else {
        z = sqrtpi_2 * (-std::expm1(l));  // erfc(z) ~ 1 - 2 z/sqrt(pi)
    }
    // log_erfc is strictly decreasing; keep a bracket around the root
    double zlo = -1.0, zhi = (z + 2.0 > 2.0 ? z + 2.0 : 2.0);
    while (log_erfc(zhi) > l)
        zhi *= 2.0;
    for (int it = 0; it < 60; ++it) {
        double f = log_erfc(z) - l;
        if (f == 0.0)
            return z;
        if (f > 0.0) { if (z > zlo) zlo = z; }
        else         { if (z < zhi) zhi = z; }
        double step = f * sqrtpi_2 * erfcx(z);
        double zn = z + step;
        if (!(zn > zlo && zn < zhi))
            zn = 0.5 * (zlo + zhi);
        double dz = std::fabs(zn - z);
        z = zn;
        if (dz <= 1e-15 * (1.0 + std::fabs(z)))
            break;
    }
    return z;
}

// Inverse of erf on (-1, 1)
inline double ierf(double u) {
    detail::check_finite(u, "ierf");
    if (u <= -1.0 || u >= 1.0)
        throw std::domain_error("ierf: argument must lie in (-1, 1)");
    if (u < 0.0)
        return -ierf(-u);
    return ierfc_log(std::log1p(-u));  // erf(z) = u  <=>  erfc(z) = 1 - u
}

}  // namespace deconv

#endif
