#ifndef DECONV_SAMPLER_HPP
#define DECONV_SAMPLER_HPP

/* Gibbs sampler for the compound model, plus the least-squares
 * hyperparameter initializer.  One sweep is three moves, in this order:
 *
 *   1. B | X         pixelwise exact inverse CDF of
 *                    exp(-[gd*(xbar - b)^2 + gb*|b|]/2), xbar = (D * X)_k
 *   2. X | B, g, Y   independent spectral Gaussians with
 *                    nu = gn|h|^2 + gd|d|^2 and
 *                    mu = (gn conj(h) y + gd conj(d) b) / nu
 *   3. g | X, B, Y   conjugate gamma draws on the three residuals
 *
 * The regularization kernel inside the sampler is the bare laplacian D
 * (zero DC coefficient): the posterior mean level is carried entirely by
 * the data term, and epsilon never appears in any sampler quantity.
 *
 * The B-move inverse CDF works entirely in logs.  The density is a pair
 * of Gaussian branches glued at 0; their masses are
 *     theta_- = exp(+gb xbar/2) erfc((rho + xbar) rt)
 *     theta_+ = exp(-gb xbar/2) erfc((rho - xbar) rt)
 * with rho = gb/(2 gd), rt = sqrt(gd/2).  The naive products overflow for
 * mid-chain extreme gammas, so everything is carried as logs of
 * erfcx-scaled terms: with Lm = log_erfcx((rho + xbar) rt) and
 * Lp = log_erfcx((rho - xbar) rt), the shared prefactors cancel and
 *     S = logaddexp(Lm, Lp),  split s = 1 / (1 + exp(Lp - Lm)),
 *     u <= s:  b = xbar + rho - ierfc_log(log(u)    + S - zm^2) / rt
 *     u >  s:  b = xbar - rho + ierfc_log(log1p(-u) + S - zp^2) / rt
 * where zm, zp are the erfc arguments above.  u = s lands on b = 0 from
 * either side and is special-cased so the atom is exact.
 *
 * ierfc_log is well conditioned only for results z >= -3 or so; below
 * that log(erfc) is flat and any inversion is hopeless in doubles.  The
 * argument is clamped at log(erfc(-3)) and the event counted; the region
 * holds erfc-tail mass only, but a chain tripping the clamp on more than
 * 0.1% of draws reports it.
 */

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "deconv/fft.hpp"
#include "deconv/image.hpp"
#include "deconv/potential.hpp"
#include "deconv/rng.hpp"
#include "deconv/specfun.hpp"
#include "deconv/spectral.hpp"

namespace deconv {

struct HyperParams {
    double gamma_n = 1.0;
    double gamma_d = 1.0;
    double gamma_b = 1.0;
};

inline void validate(const HyperParams& g, const char* where) {
    auto bad = [](double v) { return !(v > 0.0) || !std::isfinite(v); };
    if (bad(g.gamma_n) || bad(g.gamma_d) || bad(g.gamma_b))
        throw std::domain_error(std::string(where) +
                                ": hyperparameters must be positive finite");
}

// conjugate gamma priors, shape-scale; (0, inf) is Jeffreys, (1, inf) the
// uniform prior on (0, inf)
struct GammaPrior {
    double alpha_n = 0.0, beta_n = std::numeric_limits<double>::infinity();
    double alpha_d = 0.0, beta_d = std::numeric_limits<double>::infinity();
    double alpha_b = 0.0, beta_b = std::numeric_limits<double>::infinity();

    static GammaPrior jeffreys() { return GammaPrior{}; }
    static GammaPrior uniform() {
        GammaPrior p;
        p.alpha_n = p.alpha_d = p.alpha_b = 1.0;
        return p;
    }
};

struct BMoveStats {
    std::uint64_t total = 0;
    std::uint64_t clamped = 0;
};

namespace detail {

inline const double kBClampEdge = std::log(deconv::erfc(-3.0));

}  // namespace detail

inline double sample_b_given_x(double xbar, const HyperParams& g, double u,
                               BMoveStats* stats = nullptr) {
    if (!(u > 0.0) || !(u < 1.0))
        throw std::domain_error("sample_b_given_x: u must lie in (0,1)");
    if (!std::isfinite(xbar))
        throw std::domain_error("sample_b_given_x: xbar must be finite");
    validate(g, "sample_b_given_x");

    const double rt = std::sqrt(0.5 * g.gamma_d);
    const double rho = g.gamma_b / (2.0 * g.gamma_d);
    const double zm = (rho + xbar) * rt;
    const double zp = (rho - xbar) * rt;
    const double lm = log_erfcx(zm);
    const double lp = log_erfcx(zp);
    const double s_log = detail::logaddexp(lm, lp);
    double dl = lp - lm;
    if (dl > 700.0) dl = 700.0;
    if (dl < -700.0) dl = -700.0;
    const double split = 1.0 / (1.0 + std::exp(dl));

    if (u == split) return 0.0;
    if (stats) ++stats->total;

    double arg, z;
    if (u <= split) {
        arg = std::log(u) + s_log - zm * zm;
        if (arg > detail::kBClampEdge) {
            arg = detail::kBClampEdge;
            if (stats) ++stats->clamped;
        }
        z = ierfc_log(arg);
        return xbar + rho - z / rt;
    }
    arg = std::log1p(-u) + s_log - zp * zp;
    if (arg > detail::kBClampEdge) {
        arg = detail::kBClampEdge;
        if (stats) ++stats->clamped;
    }
    z = ierfc_log(arg);
    return xbar - rho + z / rt;
}

// one auxiliary field update: uniforms are consumed in row-major pixel
// order, which is part of the reproducibility contract
inline Image sample_b_field(const Image& xbar, const HyperParams& g, Rng& rng,
                            BMoveStats* stats = nullptr) {
    Image b(xbar.size());
    double* out = b.data();
    const double* in = xbar.data();
    for (std::size_t k = 0; k < b.count(); ++k)
        out[k] = sample_b_given_x(in[k], g, rng.uniform(), stats);
    return b;
}

// mu of X | B, gamma, Y, bin by bin; also the exact x-step of the MAP
// alternation.  Throws if some bin has zero precision (needs h00 != 0,
// since the laplacian leaves DC unpenalized).
inline Spectrum conditional_mean_spectrum(const Spectrum& ys,
                                          const Spectrum& bs, const Kernel& h,
                                          const Kernel& d,
                                          const HyperParams& g) {
    validate(g, "conditional_mean_spectrum");
    if (!ys.same_shape(bs) || !ys.same_shape(h.transfer) ||
        !ys.same_shape(d.transfer))
        throw std::invalid_argument("conditional_mean_spectrum: shape mismatch");
    const int p = ys.size();
    Spectrum mu(p);
    for (int r = 0; r < p; ++r) {
        for (int c = 0; c < p; ++c) {
            const std::complex<double> hk = h.transfer(r, c);
            const std::complex<double> dk = d.transfer(r, c);
            const double nu =
                g.gamma_n * std::norm(hk) + g.gamma_d * std::norm(dk);
            if (!(nu > 0.0))
                throw std::domain_error(
                    "conditional_mean_spectrum: zero precision at bin (" +
                    std::to_string(r) + "," + std::to_string(c) +
                    "); mean level unobserved");
            mu(r, c) = (g.gamma_n * std::conj(hk) * ys(r, c) +
                        g.gamma_d * std::conj(dk) * bs(r, c)) /
                       nu;
        }
    }
    return mu;
}

// spectral draw of X | B, gamma, Y.  A white pixel field pushed through
// the unitary FFT has exactly the Hermitian symmetry and per-bin variance
// split the complex Gaussian needs, so the draw is mu + w / sqrt(nu).
inline Spectrum sample_x_spectrum(const Spectrum& ys, const Spectrum& bs,
                                  const Kernel& h, const Kernel& d,
                                  const HyperParams& g, Rng& rng) {
    Spectrum mu = conditional_mean_spectrum(ys, bs, h, d, g);
    const int p = ys.size();
    Image w(p);
    for (auto& v : w) v = rng.normal();
    Spectrum ws = fft2_unitary(w);
    for (int r = 0; r < p; ++r) {
        for (int c = 0; c < p; ++c) {
            const double nu = g.gamma_n * std::norm(h.transfer(r, c)) +
                              g.gamma_d * std::norm(d.transfer(r, c));
            mu(r, c) += ws(r, c) / std::sqrt(nu);
        }
    }
    return mu;
}

inline Image sample_x_given_rest(const Spectrum& ys, const Spectrum& bs,
                                 const Kernel& h, const Kernel& d,
                                 const HyperParams& g, Rng& rng) {
    return ifft2_unitary(sample_x_spectrum(ys, bs, h, d, g, rng));
}

struct GammaResiduals {
    double r_n;  // N2(Y - H*X)
    double r_d;  // N2(D*X - B)
    double r_b;  // N1(B)
};

inline HyperParams sample_gamma_from_residuals(const GammaResiduals& r, int n,
                                               const GammaPrior& prior,
                                               Rng& rng) {
    if (n <= 0)
        throw std::invalid_argument("sample_gamma: pixel count must be positive");
    auto draw = [&](double alpha0, double beta0, double shape_add,
                    double resid, const char* what) {
        if (!(resid >= 0.0) || !std::isfinite(resid))
            throw std::domain_error(std::string("sample_gamma: ") + what +
                                    " residual must be finite and nonnegative");
        const double inv_beta = std::isinf(beta0) ? 0.0 : 1.0 / beta0;
        const double rate = inv_beta + 0.5 * resid;
        if (!(rate > 0.0))
            throw std::domain_error(
                std::string("sample_gamma: zero ") + what +
                " residual under an improper prior (conditional not "
                "normalizable)");
        return rng.gamma(alpha0 + shape_add, 1.0 / rate);
    };
    HyperParams g;
    g.gamma_n = draw(prior.alpha_n, prior.beta_n, 0.5 * n, r.r_n, "noise");
    g.gamma_d = draw(prior.alpha_d, prior.beta_d, 0.5 * n, r.r_d, "field");
    g.gamma_b = draw(prior.alpha_b, prior.beta_b, double(n), r.r_b, "laplace");
    return g;
}

inline HyperParams sample_gamma(const Image& y, const Image& x, const Image& b,
                                const Kernel& h, const Kernel& d,
                                const GammaPrior& prior, Rng& rng) {
    if (!y.same_shape(x) || !y.same_shape(b))
        throw std::invalid_argument("sample_gamma: shape mismatch");
    Image hx = convolve(h, x);
    Image dx = convolve(d, x);
    for (std::size_t k = 0; k < hx.count(); ++k) {
        hx.data()[k] = y.data()[k] - hx.data()[k];
        dx.data()[k] -= b.data()[k];
    }
    return sample_gamma_from_residuals({n2(hx), n2(dx), n1(b)},
                                       int(y.count()), prior, rng);
}

/* Least-squares initializer for the hyperparameters.  Per spectral bin the
 * data second moment decomposes as
 *     E |y_pq|^2 = r_d * r_pq + r_n,   r_pq = |h_pq|^2 / |f_pq|^2
 * (unitary y spectrum, raw transfers), so an ordinary least squares of
 * z = |y|^2 on r over the bins with f_pq != 0 recovers r_d = 1/gamma_d and
 * r_n = 1/gamma_n.  gamma_b starts at its critical value sqrt(2 pi gamma_d).
 * A nonpositive solution (legal at low SNR: the moment fit is
 * unconstrained) is clamped to 1e-6 times its positive co-estimate; the
 * chain resamples gamma on the first sweep anyway.
 */
inline HyperParams ls_init(const Image& y, const Kernel& h, const Kernel& f,
                           std::ostream* log = nullptr) {
    if (y.size() != h.transfer.size() || y.size() != f.transfer.size())
        throw std::invalid_argument("ls_init: shape mismatch");
    Spectrum ys = fft2_unitary(y);
    double sa = 0.0, sb = 0.0, sc = 0.0, sd = 0.0;
    std::size_t m = 0;
    for (std::size_t k = 0; k < ys.count(); ++k) {
        const double f2 = std::norm(f.transfer.data()[k]);
        if (f2 == 0.0) continue;
        const double r = std::norm(h.transfer.data()[k]) / f2;
        const double z = std::norm(ys.data()[k]);
        sa += r;
        sb += r * r;
        sc += r * z;
        sd += z;
        ++m;
    }
    if (m < 2)
        throw std::domain_error("ls_init: fewer than two usable bins");
    const double a = sa / double(m), b2 = sb / double(m);
    const double c = sc / double(m), d4 = sd / double(m);
    const double den = b2 - a * a;
    if (!(std::fabs(den) > 1e-300 * std::max(1.0, b2)))
        throw std::domain_error(
            "ls_init: degenerate design (all frequency ratios equal)");
    double r_d = (c - a * d4) / den;
    double r_n = (b2 * d4 - a * c) / den;
    if (r_d <= 0.0 && r_n <= 0.0)
        throw std::domain_error(
            "ls_init: both solved rates nonpositive; data moments "
            "inconsistent with the model");
    HyperParams g;
    if (r_d <= 0.0) {
        g.gamma_n = 1.0 / r_n;
        g.gamma_d = 1e-6 * g.gamma_n;
        if (log)
            *log << "ls_init: nonpositive field solution, clamped gamma_d to "
                 << g.gamma_d << "\n";
    } else if (r_n <= 0.0) {
        g.gamma_d = 1.0 / r_d;
        g.gamma_n = 1e-6 * g.gamma_d;
        if (log)
            *log << "ls_init: nonpositive noise solution, clamped gamma_n to "
                 << g.gamma_n << "\n";
    } else {
        g.gamma_d = 1.0 / r_d;
        g.gamma_n = 1.0 / r_n;
    }
    g.gamma_b = critical_gamma_b(g.gamma_d);
    return g;
}

struct StoppingConfig {
    double T = 5e-4;        // stop when the running-mean increment norm < T
    int min_iter = 50;
    int max_iter = 100000;
    int burn_in = 0;        // samples excluded from the accumulator
    std::optional<HyperParams> fixed_gamma;  // skip the gamma move entirely
    std::optional<HyperParams> init_gamma;   // override the LS initializer
    std::ostream* log = nullptr;             // progress every 100 iterations
};

struct TraceRecord {
    int iter;
    HyperParams gamma;
    double delta_norm;
};

struct ChainState {
    Image x, b;          // last samples
    HyperParams gamma;   // last hyperparameters
    int iter = 0;
    double delta_norm = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::vector<TraceRecord> trace;
    BMoveStats b_stats;
};

struct ChainResult {
    Image pm;  // running mean of the X samples after burn-in
    ChainState state;
};

/* The full chain.  X starts at the data, gamma at the least-squares
 * initializer (unless pinned), and each sweep is B, X, gamma.  The
 * accumulator is the recursive mean of the sampled X fields (the
 * initialization is not a sample and never enters it); its per-iteration
 * increment has norm ||X - mean|| / m, which is the stopping statistic.
 *
 * Randomness comes from three streams derived from the master seed, one
 * per move, so the trace is a pure function of (data, config, seed).
 */
inline ChainResult run_chain(const Image& y, const Kernel& h,
                             const GammaPrior& prior,
                             const StoppingConfig& cfg, std::uint64_t seed) {
    const int p = y.size();
    if (p == 0) throw std::invalid_argument("run_chain: empty data");
    if (y.size() != h.transfer.size())
        throw std::invalid_argument("run_chain: data/PSF shape mismatch");
    if (std::abs(h.transfer(0, 0)) == 0.0)
        throw std::domain_error("run_chain: PSF has zero DC gain");
    if (!(cfg.T > 0.0))
        throw std::invalid_argument("run_chain: stopping tolerance must be positive");
    if (cfg.min_iter < 1 || cfg.max_iter < cfg.min_iter || cfg.burn_in < 0)
        throw std::invalid_argument("run_chain: bad iteration bounds");

    const Kernel d = laplacian_kernel(p);
    const std::size_t n = y.count();

    Rng rng_b = derive_stream(seed, "b-move");
    Rng rng_x = derive_stream(seed, "x-move");
    Rng rng_g = derive_stream(seed, "gamma-move");

    ChainState st;
    st.gamma = cfg.fixed_gamma ? *cfg.fixed_gamma
                               : (cfg.init_gamma ? *cfg.init_gamma
                                                 : ls_init(y, h, d, cfg.log));
    validate(st.gamma, "run_chain: initial gamma");

    const Spectrum ys = fft2_unitary(y);
    Spectrum xs = ys;  // X is initialized by the data
    Image mean(p);
    int m = 0;  // samples accumulated

    st.trace.reserve(std::size_t(std::min(cfg.max_iter, 200000)));
    for (int it = 1; it <= cfg.max_iter; ++it) {
        // xbar = D * X from the current spectrum (one inverse transform)
        Spectrum dxs(p);
        for (std::size_t k = 0; k < n; ++k)
            dxs.data()[k] = xs.data()[k] * d.transfer.data()[k];
        Image xbar = ifft2_unitary(dxs);

        Image b = sample_b_field(xbar, st.gamma, rng_b, &st.b_stats);
        Spectrum bs = fft2_unitary(b);

        xs = sample_x_spectrum(ys, bs, h, d, st.gamma, rng_x);
        Image x = ifft2_unitary(xs);

        if (!cfg.fixed_gamma) {
            double r_n = 0.0, r_d = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                r_n += std::norm(ys.data()[k] -
                                 h.transfer.data()[k] * xs.data()[k]);
                r_d += std::norm(d.transfer.data()[k] * xs.data()[k] -
                                 bs.data()[k]);
            }
            st.gamma = sample_gamma_from_residuals({r_n, r_d, n1(b)}, int(n),
                                                   prior, rng_g);
        }

        if (it > cfg.burn_in) {
            ++m;
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double step = (x.data()[k] - mean.data()[k]) / m;
                mean.data()[k] += step;
                acc += step * step;
            }
            st.delta_norm = std::sqrt(acc);
        }

        st.iter = it;
        st.trace.push_back({it, st.gamma, st.delta_norm});
        if (cfg.log && it % 100 == 0)
            *cfg.log << "iter=" << it << " gamma_n=" << st.gamma.gamma_n
                     << " gamma_d=" << st.gamma.gamma_d
                     << " gamma_b=" << st.gamma.gamma_b
                     << " delta=" << st.delta_norm << "\n";

        if (it >= cfg.min_iter && m >= 1 && st.delta_norm < cfg.T) {
            st.converged = true;
            st.x = std::move(x);
            st.b = std::move(b);
            break;
        }
        st.x = std::move(x);
        st.b = std::move(b);
    }

    if (st.b_stats.total > 0 &&
        double(st.b_stats.clamped) > 1e-3 * double(st.b_stats.total)) {
        std::ostream* out = cfg.log;
        if (out)
            *out << "warning: B-move tail clamp hit on " << st.b_stats.clamped
                 << " of " << st.b_stats.total << " draws\n";
    }
    return {std::move(mean), std::move(st)};
}

}  // namespace deconv

#endif
