#ifndef DECONV_RNG_HPP
#define DECONV_RNG_HPP

/* Deterministic seedable generator with named derived streams.
 *
 * Core is SplitMix64 (Steele, Lea & Flood, "Fast splittable pseudorandom
 * number generators", OOPSLA 2014); gamma variates follow Marsaglia &
 * Tsang, "A simple method for generating gamma variables", TOMS 26 (2000).
 * Every stochastic operation in the chain takes one of these streams
 * explicitly; streams are derived from the master seed by hashing a label,
 * so their draws do not depend on the order the streams are created or
 * consumed.  That is what makes reruns bit-identical and sweep points
 * independent of scheduling.
 */

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string_view>

namespace deconv {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : s_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (s_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform on the open interval (0, 1): 53-bit mantissa, half-ulp offset
    double uniform() {
        return (double(next() >> 11) + 0.5) * 0x1p-53;
    }

    // standard normal, Marsaglia polar method with one cached spare
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, q;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            q = u * u + v * v;
        } while (q >= 1.0 || q == 0.0);
        double f = std::sqrt(-2.0 * std::log(q) / q);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    // gamma variate, shape alpha, scale beta (mean alpha*beta)
    double gamma(double alpha, double beta) {
        if (!(alpha > 0.0) || !(beta > 0.0))
            throw std::domain_error("gamma: shape and scale must be positive");
        if (alpha < 1.0) {
            // boost: G(a) = G(a+1) * U^{1/a}
            double u = uniform();
            return gamma(alpha + 1.0, beta) * std::pow(u, 1.0 / alpha);
        }
        double d = alpha - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x)
                return d * v * beta;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v * beta;
        }
    }

private:
    std::uint64_t s_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// FNV-1a 64-bit of the label, xored into the master seed
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char ch : label) {
        h ^= std::uint64_t(static_cast<unsigned char>(ch));
        h *= 0x100000001b3ull;
    }
    return master ^ h;
}

inline Rng derive_stream(std::uint64_t master, std::string_view label) {
    Rng r(derive_seed(master, label));
    r.next();  // decorrelate nearby master seeds
    return r;
}

}  // namespace deconv

#endif
