#ifndef DECONV_TESTS_SUPPORT_HPP
#define DECONV_TESTS_SUPPORT_HPP

/* Shared oracle machinery for the test suites: adaptive Simpson quadrature
 * (independent of any code under test) and the one-sample Kolmogorov-
 * Smirnov statistic with Stephens' small-sample correction.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testsup {

inline double simpson(const std::function<double(double)>& f,
                      double a, double m, double b,
                      double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double quad_rec(const std::function<double(double)>& f,
                       double a, double m, double b,
                       double fa, double fm, double fb,
                       double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson(f, a, lm, m, fa, flm, fm);
    double right = simpson(f, m, rm, b, fm, frm, fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return quad_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
         + quad_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// adaptive Simpson on [a, b]
inline double quad(const std::function<double(double)>& f,
                   double a, double b, double tol = 1e-12) {
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = simpson(f, a, m, b, fa, fm, fb);
    return quad_rec(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

// KS distance of samples against a CDF; samples are sorted in place
inline double ks_stat(std::vector<double>& s,
                      const std::function<double(double)>& cdf) {
    std::sort(s.begin(), s.end());
    double n = double(s.size());
    double d = 0.0;
    for (size_t i = 0; i < s.size(); ++i) {
        double F = cdf(s[i]);
        d = std::max(d, std::fabs(F - double(i + 1) / n));
        d = std::max(d, std::fabs(F - double(i) / n));
    }
    return d;
}

// asymptotic Kolmogorov p-value with Stephens' finite-n correction
inline double ks_pvalue(double d, size_t n) {
    double rn = std::sqrt(double(n));
    double k = d * (rn + 0.12 + 0.11 / rn);
    double p = 0.0;
    for (int j = 1; j <= 100; ++j)
        p += 2.0 * (j % 2 ? 1.0 : -1.0) * std::exp(-2.0 * j * j * k * k);
    return std::min(1.0, std::max(0.0, p));
}

}  // namespace testsup

#endif
