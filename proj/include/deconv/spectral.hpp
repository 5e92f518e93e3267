#ifndef DECONV_SPECTRAL_HPP
#define DECONV_SPECTRAL_HPP

/* Toroidal-model machinery: circular convolution via the FFT, the
 * Laplacian structure kernel D, its normalizable variant F_eps, and the
 * Gaussian PSF.
 *
 * Kernels carry their spatial taps plus the cached raw (unnormalized)
 * transfer, which is what multiplies unitary image spectra under circular
 * convolution.  F_eps adds eps to every spatial tap of the P x P embedded
 * kernel, so only the DC transfer coefficient moves: f00 = eps * N, all
 * other coefficients stay those of D.
 */

#include <cmath>
#include <stdexcept>

#include "deconv/fft.hpp"
#include "deconv/image.hpp"

namespace deconv {

struct Kernel {
    Image taps;
    Spectrum transfer;  // raw DFT of taps

    Kernel() = default;
    explicit Kernel(Image t) : taps(std::move(t)), transfer(fft2_raw(taps)) {}

    int size() const { return taps.size(); }

    bool invertible() const {
        for (const auto& v : transfer)
            if (std::norm(v) == 0.0) return false;
        return true;
    }
};

// y = k * x (circular); spectra: y_hat = transfer .* x_hat
inline Image convolve(const Kernel& k, const Image& x) {
    if (k.size() != x.size())
        throw std::invalid_argument("convolve: size mismatch");
    Spectrum s = fft2_unitary(x);
    auto it = k.transfer.begin();
    for (auto& v : s) v *= *it++;
    return ifft2_unitary(s);
}

// 3x3 stencil [0 1 0; 1 -4 1; 0 1 0] embedded toroidally; d00 is exactly 0
inline Kernel laplacian_kernel(int p) {
    if (p < 3)
        throw std::invalid_argument("laplacian_kernel: P must be >= 3");
    Image t(p);
    t(0, 0) = -4.0;
    t(0, 1) = 1.0;
    t(1, 0) = 1.0;
    t(0, p - 1) = 1.0;
    t(p - 1, 0) = 1.0;
    return Kernel(std::move(t));
}

// F_eps = D + eps on every spatial tap; invertible for eps > 0
inline Kernel f_epsilon_kernel(int p, double eps) {
    if (p < 3)
        throw std::invalid_argument("f_epsilon_kernel: P must be >= 3");
    if (eps < 0.0)
        throw std::invalid_argument("f_epsilon_kernel: eps must be >= 0");
    Image t(p, eps);
    t(0, 0) += -4.0;
    t(0, 1) += 1.0;
    t(1, 0) += 1.0;
    t(0, p - 1) += 1.0;
    t(p - 1, 0) += 1.0;
    return Kernel(std::move(t));
}

// unit-sum toroidal Gaussian, centered at the origin, circularly symmetric
// in the wrapped metric; sigma = fwhm / (2 sqrt(2 ln 2))
inline Kernel gaussian_psf(int p, double fwhm) {
    if (!(fwhm > 0.0))
        throw std::invalid_argument("gaussian_psf: fwhm must be positive");
    double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    Image t(p);
    double sum = 0.0;
    for (int r = 0; r < p; ++r) {
        double dr = std::min(r, p - r);
        for (int c = 0; c < p; ++c) {
            double dc = std::min(c, p - c);
            double v = std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
            t(r, c) = v;
            sum += v;
        }
    }
    for (auto& v : t) v /= sum;
    return Kernel(std::move(t));
}

}  // namespace deconv

#endif
