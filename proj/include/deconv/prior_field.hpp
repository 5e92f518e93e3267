#ifndef DECONV_PRIOR_FIELD_HPP
#define DECONV_PRIOR_FIELD_HPP

/* Compound prior field: partition functions, prior sampling, marginal density.
 *
 * The field couples a pixel image X to an auxiliary field B through
 *   p(X | B) = K_X|B^-1 exp(-gamma_d N2(F_eps * X - B) / 2)
 *   p(B)     = K_B^-1    exp(-gamma_b N1(B) / 2)
 * with F_eps the regularized Laplacian (eps > 0 keeps the DC mode proper).
 * All partition functions are explicit:
 *   log K_X|B = -(N/2) log gamma_d + (N/2) log 2pi - sum log |f|   (any B)
 *   log K_B   = -N log(gamma_b / 4)
 * and the joint normalizer admits the product form
 *   K_X,B^-1 = (32 pi)^{-N/2} prod_{pq != 00} |d_pq| . f_00 . gamma_d^{N/2} gamma_b^N
 * where f_00 = eps N (the off-DC transfer of F_eps equals the bare Laplacian's,
 * so the eps dependence sits entirely in the DC factor).
 *
 * Marginalizing B pixelwise gives the Log-Erf law:
 *   log f_X(X) = -log K_X,B + N log I0 - sum phi(xbar_k) / 2,  xbar = F_eps * X
 * with I0 = I(+inf, 0) = 2 sqrt(pi / 2 gamma_d) erfcx(eta); the N log I0 term
 * absorbs the phi(0) = 0 convention of the potential.
 *
 * Sampling: B by inverse-CDF Laplace draws; X | B spectrally, adding the
 * unitary FFT of a white pixel field to the spectral mean (same law as
 * explicit half-plane Hermitian bookkeeping, and exactly real by roundtrip).
 * By construction F_eps * X = B + W / sqrt(gamma_d) pixelwise, so the xbar
 * marginal is i.i.d. Log-Erf; that identity is what Fig.-2-style histogram
 * checks rely on.
 */

#include <cmath>
#include <stdexcept>
#include <utility>

#include "deconv/fft.hpp"
#include "deconv/image.hpp"
#include "deconv/potential.hpp"
#include "deconv/rng.hpp"
#include "deconv/spectral.hpp"

namespace deconv {

struct FieldParams {
    PotentialParams pot;
    double eps;
    int p;

    FieldParams(PotentialParams pt, double eps_, int p_) : pot(pt), eps(eps_), p(p_) {
        if (!(eps > 0.0) || !std::isfinite(eps))
            throw std::domain_error("FieldParams: eps must be positive (eps = 0 is non-normalizable)");
        if (p < 3)
            throw std::invalid_argument("FieldParams: size must be at least 3");
    }

    int n() const { return p * p; }
    Kernel f_kernel() const { return f_epsilon_kernel(p, eps); }
};

// log of the Gaussian-integral normalization of I(+inf, 0, gamma_d, gamma_b)
inline double log_i0(const PotentialParams& pot) {
    return 0.6931471805599453 + 0.5 * std::log(3.14159265358979323846 / (2.0 * pot.gamma_d)) +
           log_erfcx(pot.eta());
}

// log K_X|B for an arbitrary invertible kernel; independent of B
inline double log_partition_conditional(const Kernel& f, double gamma_d) {
    if (!(gamma_d > 0.0) || !std::isfinite(gamma_d))
        throw std::domain_error("log_partition_conditional: gamma_d must be positive");
    int n = f.size() * f.size();
    double sum_log = 0.0;
    for (const auto& c : f.transfer) {
        double a = std::abs(c);
        if (a == 0.0)
            throw std::domain_error("log_partition_conditional: zero transfer coefficient");
        sum_log += std::log(a);
    }
    return 0.5 * n * (std::log(2.0 * 3.14159265358979323846) - std::log(gamma_d)) - sum_log;
}

inline double log_partition_conditional(const FieldParams& fp) {
    return log_partition_conditional(fp.f_kernel(), fp.pot.gamma_d);
}

inline double log_partition_laplace(const FieldParams& fp) {
    return -double(fp.n()) * std::log(fp.pot.gamma_b / 4.0);
}

inline double log_partition_joint(const FieldParams& fp) {
    return log_partition_conditional(fp) + log_partition_laplace(fp);
}

// the same joint normalizer assembled through the product/delta identity:
// -log K = log delta + log f_00 + (N/2) log gamma_d + N log gamma_b,
// log delta = -(N/2) log(32 pi) + sum_{pq != 00} log |d_pq|
inline double log_partition_joint_delta(const FieldParams& fp) {
    Kernel d = laplacian_kernel(fp.p);
    double n = double(fp.n());
    double sum_log = 0.0;
    for (int k = 1; k < fp.n(); ++k)
        sum_log += std::log(std::abs(d.transfer.data()[k]));
    double log_delta = -0.5 * n * std::log(32.0 * 3.14159265358979323846) + sum_log;
    double f00 = fp.eps * n;
    return -(log_delta + std::log(f00) + 0.5 * n * std::log(fp.pot.gamma_d) +
             n * std::log(fp.pot.gamma_b));
}

inline Image sample_laplace_field(const FieldParams& fp, Rng& rng) {
    Image b(fp.p);
    double theta = 2.0 / fp.pot.gamma_b;
    for (auto& v : b) {
        double u = rng.uniform();
        v = u < 0.5 ? theta * std::log(2.0 * u) : -theta * std::log(2.0 * (1.0 - u));
    }
    return b;
}

inline Image sample_x_given_b(const Image& b, const FieldParams& fp, Rng& rng) {
    if (b.size() != fp.p)
        throw std::invalid_argument("sample_x_given_b: size mismatch");
    Kernel f = fp.f_kernel();
    Spectrum bu = fft2_unitary(b);
    Image w(fp.p);
    for (auto& v : w)
        v = rng.normal();
    Spectrum wu = fft2_unitary(w);
    double isq = 1.0 / std::sqrt(fp.pot.gamma_d);
    Spectrum xu(fp.p);
    for (int k = 0; k < fp.n(); ++k)
        xu.data()[k] = (bu.data()[k] + isq * wu.data()[k]) / f.transfer.data()[k];
    return ifft2_unitary(xu);
}

inline std::pair<Image, Image> sample_prior(const FieldParams& fp, Rng& rng) {
    Image b = sample_laplace_field(fp, rng);
    Image x = sample_x_given_b(b, fp, rng);
    return { std::move(x), std::move(b) };
}

inline double marginal_log_density(const Image& x, const FieldParams& fp) {
    if (x.size() != fp.p)
        throw std::invalid_argument("marginal_log_density: size mismatch");
    Image xbar = convolve(fp.f_kernel(), x);
    double sum_phi = 0.0;
    for (double v : xbar)
        sum_phi += phi(v, fp.pot);
    return -log_partition_joint(fp) + double(fp.n()) * log_i0(fp.pot) - 0.5 * sum_phi;
}

}  // namespace deconv

#endif
