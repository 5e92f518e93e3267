#ifndef DECONV_FFT_HPP
#define DECONV_FFT_HPP

/* 2-D FFT for power-of-two square grids: iterative radix-2 with cached
 * per-size plans (bit-reversal permutation + twiddle table).  The chain
 * only ever transforms P x P images with P a power of two, so nothing
 * fancier is warranted.
 *
 * Normalization: fft2_unitary divides the raw transform by P (= sqrt(N)),
 * which makes the map an isometry (n2 of image == n2 of spectrum) and the
 * DC coefficient of a constant image c equal to P*c.  Kernels go through
 * fft2_raw: their raw transfer multiplies unitary spectra directly under
 * circular convolution.  ifft2_unitary enforces that the result is real
 * up to roundoff and throws if it is not, catching Hermitian-symmetry
 * violations early.
 */

#include <complex>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "deconv/image.hpp"

namespace deconv {

namespace detail {

struct FftPlan {
    int n = 0;
    std::vector<int> rev;                    // bit-reversal permutation
    std::vector<std::complex<double>> w;     // w[k] = exp(-2*pi*i*k/n), k < n/2
};

inline const FftPlan& plan_for(int n) {
    static std::unordered_map<int, FftPlan> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lk(mu);
    auto it = cache.find(n);
    if (it != cache.end())
        return it->second;
    if (n < 2 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft: size must be a power of two >= 2");
    FftPlan pl;
    pl.n = n;
    pl.rev.resize(n);
    int lg = 0;
    while ((1 << lg) < n) ++lg;
    for (int i = 0; i < n; ++i) {
        int r = 0;
        for (int b = 0; b < lg; ++b)
            if (i & (1 << b)) r |= 1 << (lg - 1 - b);
        pl.rev[i] = r;
    }
    pl.w.resize(n / 2);
    for (int k = 0; k < n / 2; ++k) {
        double ang = -2.0 * 3.14159265358979323846 * k / n;
        pl.w[k] = { std::cos(ang), std::sin(ang) };
    }
    return cache.emplace(n, std::move(pl)).first->second;
}

// in-place, unnormalized; inverse uses conjugated twiddles
inline void fft1d(std::complex<double>* a, const FftPlan& pl, bool inverse) {
    int n = pl.n;
    for (int i = 0; i < n; ++i) {
        int j = pl.rev[i];
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        int half = len >> 1;
        int step = n / len;
        for (int base = 0; base < n; base += len) {
            for (int k = 0; k < half; ++k) {
                std::complex<double> w = pl.w[k * step];
                if (inverse) w = std::conj(w);
                std::complex<double> u = a[base + k];
                std::complex<double> t = a[base + k + half] * w;
                a[base + k] = u + t;
                a[base + k + half] = u - t;
            }
        }
    }
}

// unnormalized 2-D transform of a complex grid, in place
inline void fft2_core(Spectrum& s, bool inverse) {
    int p = s.size();
    const FftPlan& pl = plan_for(p);
    for (int r = 0; r < p; ++r)
        fft1d(s.data() + std::size_t(r) * p, pl, inverse);
    std::vector<std::complex<double>> col(p);
    for (int c = 0; c < p; ++c) {
        for (int r = 0; r < p; ++r) col[r] = s(r, c);
        fft1d(col.data(), pl, inverse);
        for (int r = 0; r < p; ++r) s(r, c) = col[r];
    }
}

}  // namespace detail

// raw (unnormalized) transform: kernel images -> transfer functions
inline Spectrum fft2_raw(const Image& a) {
    int p = a.size();
    Spectrum s(p);
    for (int r = 0; r < p; ++r)
        for (int c = 0; c < p; ++c) s(r, c) = a(r, c);
    detail::fft2_core(s, false);
    return s;
}

// unitary transform: raw / P, an isometry for n2
inline Spectrum fft2_unitary(const Image& a) {
    Spectrum s = fft2_raw(a);
    double inv = 1.0 / a.size();
    for (auto& v : s) v *= inv;
    return s;
}

// inverse of fft2_unitary; throws if the result has a non-negligible
// imaginary part (broken Hermitian symmetry upstream)
inline Image ifft2_unitary(const Spectrum& s) {
    int p = s.size();
    Spectrum t = s;
    detail::fft2_core(t, true);
    double inv = 1.0 / p;
    double max_re = 0.0, max_im = 0.0;
    Image out(p);
    for (int r = 0; r < p; ++r)
        for (int c = 0; c < p; ++c) {
            std::complex<double> v = t(r, c) * inv;
            out(r, c) = v.real();
            max_re = std::max(max_re, std::fabs(v.real()));
            max_im = std::max(max_im, std::fabs(v.imag()));
        }
    if (max_im > 1e-9 * std::max(1.0, max_re))
        throw std::runtime_error("ifft2_unitary: result is not real");
    return out;
}

}  // namespace deconv

#endif
