#ifndef DECONV_IMAGE_HPP
#define DECONV_IMAGE_HPP

/* Square P x P grids of doubles (images) and complex doubles (spectra),
 * row-major, plus the two norms the model is written in:
 *   n2(a) = sum a_k^2   (squared L2, no square root)
 *   n1(a) = sum |a_k|
 */

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace deconv {

template <class T>
class Grid {
public:
    Grid() : p_(0) {}
    explicit Grid(int p, T fill = T{}) : p_(p), v_(std::size_t(p) * p, fill) {
        if (p <= 0)
            throw std::invalid_argument("Grid: size must be positive");
    }

    int size() const { return p_; }               // side length P
    std::size_t count() const { return v_.size(); }  // N = P*P

    T& operator()(int r, int c) { return v_[std::size_t(r) * p_ + c]; }
    const T& operator()(int r, int c) const { return v_[std::size_t(r) * p_ + c]; }

    T* data() { return v_.data(); }
    const T* data() const { return v_.data(); }
    auto begin() { return v_.begin(); }
    auto end() { return v_.end(); }
    auto begin() const { return v_.begin(); }
    auto end() const { return v_.end(); }

    bool same_shape(const Grid& o) const { return p_ == o.p_; }

private:
    int p_;
    std::vector<T> v_;
};

using Image = Grid<double>;
using Spectrum = Grid<std::complex<double>>;

inline double n2(const Image& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return s;
}

inline double n2(const Spectrum& a) {
    double s = 0.0;
    for (const auto& v : a) s += std::norm(v);
    return s;
}

inline double n1(const Image& a) {
    double s = 0.0;
    for (double v : a) s += std::fabs(v);
    return s;
}

inline double linf(const Image& a) {
    double s = 0.0;
    for (double v : a) s = std::max(s, std::fabs(v));
    return s;
}

}  // namespace deconv

#endif
