// Synthetic test scene: black background, three objects (rectangle, rhombus,
// disk) filled with gentle left-to-right gray ramps. Every edge is a linear
// skirt of fixed width w, so the Laplacian of the scene takes values that are
// either tiny (second differences of the ramps, ~1e-4) or large (slope breaks,
// ~A/w >= 3e-2), with nothing in between: the |D*X| histogram has an empty
// band. The estimated threshold s-hat is supposed to land inside that band.
//
// Geometry is defined on a 128-grid and scaled by P/128 for other sizes. The
// scene needs room for three separated objects, hence the P >= 64 floor. Row
// floor(0.78 P) crosses both the rectangle and the rhombus.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "deconv/image.hpp"

namespace deconv {
namespace detail {

// 1 on [lo, hi], linear to 0 over w pixels each side, slope exactly 1/w.
// lo > hi is allowed: the plateau vanishes and the peak drops below 1,
// which is how the rhombus tip and the disk cap stay smooth.
inline double tent(double c, double lo, double hi, double w) {
    return std::clamp(std::min((c - (lo - w)) / w, ((hi + w) - c) / w), 0.0,
                      1.0);
}

}  // namespace detail

inline Image make_phantom(int p) {
    if (p < 64)
        throw std::invalid_argument(
            "make_phantom: grid too small for three objects (need P >= 64)");
    const double sc = p / 128.0;
    auto si = [sc](double v) { return int(std::lround(v * sc)); };
    auto wrap = [p](int r) { return ((r % p) + p) % p; };

    const double w = si(22);
    Image x(p);

    // rectangle rows 96..103, cols 24..33, ramp 0.75 + 2e-3 (c - c0)
    {
        int r0 = si(96), r1 = si(103), c0 = si(24), c1 = si(33);
        for (int r = 0; r < p; ++r) {
            double tr = detail::tent(r, r0, r1, w);
            if (tr == 0.0) continue;
            for (int c = 0; c < p; ++c) {
                double v = std::min(tr, detail::tent(c, c0, c1, w)) *
                           (0.75 + 2e-3 * (c - c0));
                x(r, c) = std::max(x(r, c), v);
            }
        }
    }

    // rhombus centered (99, 84), half-diagonal 6, ramp 1.05 + 2e-3 (c - 78)
    {
        int rc = si(99), cc = si(84), hd = si(6);
        for (int r = rc - hd - int(w); r <= rc + hd + int(w); ++r) {
            double W = hd - std::abs(r - rc);
            if (W + w <= 0.0) continue;
            int rr = wrap(r);
            for (int c = 0; c < p; ++c) {
                double v = detail::tent(c, cc - W, cc + W, w) *
                           (1.05 + 2e-3 * (c - (cc - hd)));
                x(rr, c) = std::max(x(rr, c), v);
            }
        }
    }

    // disk centered (30, 84), radius 4 in a staircase width profile,
    // capped by a vertical tent; ramp 1.30 + 2e-3 (c - 80)
    {
        int rc = si(30), cc = si(84), R = si(4);
        for (int r = rc - R - int(w); r <= rc + R + int(w); ++r) {
            int rr = std::min(std::abs(r - rc), R);
            int W = int(std::lround(std::sqrt(std::max(
                double(R) * R - double(rr) * rr, 0.0))));
            double tv = detail::tent(r, rc - R, rc + R, w);
            int rw = wrap(r);
            for (int c = 0; c < p; ++c) {
                double v = std::min(detail::tent(c, cc - W, cc + W, w), tv) *
                           (1.30 + 2e-3 * (c - (cc - R)));
                x(rw, c) = std::max(x(rw, c), v);
            }
        }
    }
    return x;
}

}  // namespace deconv
