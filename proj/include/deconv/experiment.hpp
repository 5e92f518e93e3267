// The benchmark pipeline around the sampler: phantom -> blurred noisy data ->
// chain -> posterior-mean estimate, plus the estimators it is compared
// against (CPM at fixed hyperparameters, MAP under both potential readings)
// and the metrics/sweep battery. run_paper_experiment() glues it together
// and writes the run directory: table1.csv, trace.csv, sweep_*.csv, images,
// manifest.
//
// MAP comes in two flavors:
//  - map_estimate: joint criterion in (x, b), exact alternation. The b-step
//    is the scalar soft threshold (the minimizer of gd (xbar-b)^2 + gb |b|),
//    the x-step is the spectral normal solve. The criterion must decrease
//    every iteration; an increase means broken inputs and is an error.
//    With (gd, gb) -> (lambda, 2 lambda s) this same loop is exactly the
//    Huber MAP, which is how the two table rows are produced.
//  - map_marginal: the marginal criterion gn/2 N2(y-Hx) + 1/2 sum pot(Dx)
//    minimized by constant-step FISTA; pot is pluggable (log-erf or Huber).
//    This is the cross-check path: for the Huber potential it must agree
//    with the alternation to optimizer tolerance.
//
// Every random quantity is drawn from a stream derived off the master seed
// by label ("noise", "chain0", "cpm", "sweep-gd-1"), so sweep points can run
// concurrently without changing any result.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "deconv/io.hpp"
#include "deconv/phantom.hpp"
#include "deconv/sampler.hpp"

namespace deconv {

struct Metrics {
    double l2_percent = 0.0;
    double l1_percent = 0.0;
};

// percentages relative to the truth norms (the "normalized distances")
inline Metrics distances(const Image& estimate, const Image& truth) {
    if (!estimate.same_shape(truth))
        throw std::invalid_argument("distances: image sizes differ");
    double t2 = n2(truth), t1 = n1(truth);
    if (t2 == 0.0 || t1 == 0.0)
        throw std::domain_error("distances: truth has zero norm");
    double s2 = 0.0, s1 = 0.0;
    for (std::size_t k = 0; k < truth.count(); ++k) {
        double d = estimate.data()[k] - truth.data()[k];
        s2 += d * d;
        s1 += std::fabs(d);
    }
    return {100.0 * std::sqrt(s2 / t2), 100.0 * s1 / t1};
}

inline Image synthesize_data(const Image& truth, const Kernel& h,
                             double noise_variance, Rng& rng) {
    if (truth.count() == 0)
        throw std::invalid_argument("synthesize_data: empty image");
    if (truth.size() != h.transfer.size())
        throw std::invalid_argument("synthesize_data: kernel size mismatch");
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
        throw std::domain_error("synthesize_data: bad noise variance");
    Image y = convolve(h, truth);
    if (noise_variance > 0.0) {
        double sd = std::sqrt(noise_variance);
        for (auto& v : y) v += sd * rng.normal();
    }
    return y;
}

// argmin_b gd (xbar - b)^2 + gb |b|  with rho = gb / (2 gd)
inline double soft_threshold(double xbar, double rho) {
    double a = std::fabs(xbar) - rho;
    return a > 0.0 ? std::copysign(a, xbar) : 0.0;
}

struct MapOptions {
    double tol = 1e-8;
    int max_iter = 120000;
    int check_every = 200;  // criterion cadence of the marginal path
};

struct MapResult {
    Image x;
    int iters = 0;
    double criterion = 0.0;
    bool converged = false;
};

inline MapResult map_estimate(const Image& y, const Kernel& h,
                              const HyperParams& g, MapOptions opt = {}) {
    validate(g, "map_estimate");
    if (y.count() == 0) throw std::invalid_argument("map_estimate: no data");
    if (y.size() != h.transfer.size())
        throw std::invalid_argument("map_estimate: kernel size mismatch");
    if (std::abs(h.transfer(0, 0)) == 0.0)
        throw std::domain_error("map_estimate: PSF has zero DC gain");
    if (!(opt.tol > 0.0) || opt.max_iter < 1)
        throw std::invalid_argument("map_estimate: bad options");

    const int p = y.size();
    const std::size_t n = y.count();
    const Kernel d = laplacian_kernel(p);
    const double rho = g.gamma_b / (2.0 * g.gamma_d);
    const Spectrum ys = fft2_unitary(y);

    std::vector<double> nu(n);
    Spectrum xs(p);
    for (std::size_t k = 0; k < n; ++k) {
        nu[k] = g.gamma_n * std::norm(h.transfer.data()[k]) +
                g.gamma_d * std::norm(d.transfer.data()[k]);
        xs.data()[k] =
            g.gamma_n * std::conj(h.transfer.data()[k]) * ys.data()[k] / nu[k];
    }

    MapResult res;
    Image b(p);
    double j0 = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opt.max_iter; ++it) {
        Spectrum dxs(p);
        for (std::size_t k = 0; k < n; ++k)
            dxs.data()[k] = d.transfer.data()[k] * xs.data()[k];
        Image xbar = ifft2_unitary(dxs);
        for (std::size_t k = 0; k < n; ++k)
            b.data()[k] = soft_threshold(xbar.data()[k], rho);
        Spectrum bs = fft2_unitary(b);
        for (std::size_t k = 0; k < n; ++k)
            xs.data()[k] = (g.gamma_n * std::conj(h.transfer.data()[k]) *
                                ys.data()[k] +
                            g.gamma_d * std::conj(d.transfer.data()[k]) *
                                bs.data()[k]) /
                           nu[k];
        double r_n = 0.0, r_d = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            r_n += std::norm(ys.data()[k] -
                             h.transfer.data()[k] * xs.data()[k]);
            r_d += std::norm(d.transfer.data()[k] * xs.data()[k] -
                             bs.data()[k]);
        }
        double j = 0.5 * (g.gamma_n * r_n + g.gamma_d * r_d +
                          g.gamma_b * n1(b));
        if (j - j0 > opt.tol * std::fabs(j))
            throw std::runtime_error(
                "map_estimate: criterion increased at iteration " +
                std::to_string(it));
        res.iters = it;
        res.criterion = j;
        if (j0 - j < opt.tol * std::fabs(j)) {
            res.converged = true;
            break;
        }
        j0 = j;
    }
    res.x = ifft2_unitary(xs);
    return res;
}

// pluggable penalty for the marginal path; curvature0 = pot''(0) sets the
// FISTA step through the Lipschitz bound gn max|h|^2 + pot''(0)/2 max|d|^2
struct MarginalPotential {
    std::function<double(double)> value;
    std::function<double(double)> deriv;
    double curvature0;
};

inline MarginalPotential logerf_penalty(const PotentialParams& p) {
    return {[p](double x) { return phi(x, p); },
            [p](double x) { return phi_prime(x, p); },
            phi_second_at_zero(p)};
}

inline MarginalPotential huber_penalty(const HuberEquiv& he) {
    return {[he](double x) { return huber_potential(x, he); },
            [he](double x) { return huber_prime(x, he); },
            2.0 * he.lambda};
}

inline MapResult map_marginal(const Image& y, const Kernel& h,
                              double gamma_n, const MarginalPotential& pot,
                              MapOptions opt = {}) {
    if (!(gamma_n > 0.0) || !std::isfinite(gamma_n))
        throw std::domain_error("map_marginal: gamma_n must be positive");
    if (!(pot.curvature0 > 0.0) || !std::isfinite(pot.curvature0))
        throw std::domain_error("map_marginal: penalty curvature not usable");
    if (y.count() == 0) throw std::invalid_argument("map_marginal: no data");
    if (y.size() != h.transfer.size())
        throw std::invalid_argument("map_marginal: kernel size mismatch");
    if (std::abs(h.transfer(0, 0)) == 0.0)
        throw std::domain_error("map_marginal: PSF has zero DC gain");

    const int p = y.size();
    const std::size_t n = y.count();
    const Kernel d = laplacian_kernel(p);
    const Spectrum ys = fft2_unitary(y);

    double max_h2 = 0.0, max_d2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        max_h2 = std::max(max_h2, std::norm(h.transfer.data()[k]));
        max_d2 = std::max(max_d2, std::norm(d.transfer.data()[k]));
    }
    const double L = gamma_n * max_h2 + 0.5 * pot.curvature0 * max_d2;

    // start from the quadratic-equivalent solve (b = 0, curvature prior)
    Spectrum xs(p);
    for (std::size_t k = 0; k < n; ++k) {
        double nu = gamma_n * std::norm(h.transfer.data()[k]) +
                    0.5 * pot.curvature0 * std::norm(d.transfer.data()[k]);
        xs.data()[k] =
            gamma_n * std::conj(h.transfer.data()[k]) * ys.data()[k] / nu;
    }
    Image x = ifft2_unitary(xs);
    Image z = x;
    double t = 1.0;

    auto criterion = [&](const Image& xi) {
        Spectrum xu = fft2_unitary(xi);
        double r = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            r += std::norm(ys.data()[k] -
                           h.transfer.data()[k] * xu.data()[k]);
            xu.data()[k] *= d.transfer.data()[k];
        }
        Image xb = ifft2_unitary(xu);
        double s = 0.0;
        for (double v : xb) s += pot.value(v);
        return 0.5 * gamma_n * r + 0.5 * s;
    };

    MapResult res;
    double f0 = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opt.max_iter; ++it) {
        Spectrum zu = fft2_unitary(z);
        Spectrum du(p);
        for (std::size_t k = 0; k < n; ++k)
            du.data()[k] = d.transfer.data()[k] * zu.data()[k];
        Image zb = ifft2_unitary(du);
        for (auto& v : zb) v = pot.deriv(v);
        Spectrum pu = fft2_unitary(zb);
        for (std::size_t k = 0; k < n; ++k) {
            auto hk = h.transfer.data()[k];
            du.data()[k] = -gamma_n * std::conj(hk) *
                               (ys.data()[k] - hk * zu.data()[k]) +
                           0.5 * std::conj(d.transfer.data()[k]) *
                               pu.data()[k];
        }
        Image grad = ifft2_unitary(du);
        Image xn(p);
        for (std::size_t k = 0; k < n; ++k)
            xn.data()[k] = z.data()[k] - grad.data()[k] / L;
        double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (std::size_t k = 0; k < n; ++k)
            z.data()[k] = xn.data()[k] +
                          (t - 1.0) / tn * (xn.data()[k] - x.data()[k]);
        x = xn;
        t = tn;
        res.iters = it;
        if (it % opt.check_every == 0) {
            double f = criterion(x);
            res.criterion = f;
            if (std::fabs(f0 - f) < opt.tol * std::fabs(f)) {
                res.converged = true;
                break;
            }
            f0 = f;
        }
    }
    if (!std::isfinite(res.criterion)) res.criterion = criterion(x);
    res.x = x;
    return res;
}

// conditional posterior mean: the chain with the gamma move disabled
inline ChainResult cpm(const Image& y, const Kernel& h, const HyperParams& g,
                       StoppingConfig cfg, std::uint64_t seed) {
    cfg.fixed_gamma = g;
    return run_chain(y, h, GammaPrior::jeffreys(), cfg, seed);
}

struct SweepPoint {
    double factor;
    HyperParams gamma;
    Metrics d;
    int iters;
    bool converged;
};

struct ExperimentConfig {
    int size = 128;
    double fwhm = 6.0;
    double noise_variance = 0.02;
    double T = 5e-4;
    std::uint64_t seed = 1;
    int max_iter = 100000;
    int ghat_burn_in = 400;
    std::vector<double> sweep_factors{0.5, 2.0};
    GammaPrior prior = GammaPrior::jeffreys();
    bool run_sweeps = true;
    bool run_maps = true;
    bool run_marginal_maps = true;
    MapOptions map_opt{};
    MapOptions marginal_opt{1e-10, 30000, 200};
    std::string out_dir;  // empty: in-memory only, nothing written
    std::ostream* log = nullptr;
};

struct ExperimentReport {
    Image truth, data, pm, cpm_est, map_logerf, map_huber;
    Metrics d_data, d_pm, d_cpm, d_map_logerf, d_map_huber;
    std::vector<TraceRecord> trace;
    int stop_iter = 0;
    bool converged = false;
    HyperParams gamma_init, ghat;
    double rsd_n = 0.0, rsd_d = 0.0, rsd_b = 0.0;        // percent
    int stab_n = -1, stab_d = -1, stab_b = -1;           // window start, -1 never
    double lambda_hat = 0.0, s_hat = 0.0;
    double band_lo = 0.0, band_hi = 0.0;                 // empty |D*X*| band
    double cpm_gap_percent = 0.0;
    std::vector<SweepPoint> sweep_n, sweep_d, sweep_b;
    double sweep_center_l2 = 0.0, sweep_best_l2 = 0.0;
    int map_logerf_iters = 0, map_huber_iters = 0;
    double map_pair_percent = 0.0;
    double marg_logerf_l2 = -1.0, marg_huber_l2 = -1.0;  // diagnostics
    double marg_pair_percent = -1.0;
};

namespace detail {

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void trace_csv(const std::string& path,
                      const std::vector<TraceRecord>& trace) {
    std::string s = "iter,gamma_n,gamma_d,gamma_b,delta_norm\n";
    for (const auto& t : trace) {
        s += std::to_string(t.iter);
        s += ',';
        s += fmt_g17(t.gamma.gamma_n);
        s += ',';
        s += fmt_g17(t.gamma.gamma_d);
        s += ',';
        s += fmt_g17(t.gamma.gamma_b);
        s += ',';
        s += fmt_g17(t.delta_norm);
        s += '\n';
    }
    write_text_file(path, s);
}

inline void sweep_csv(const std::string& path,
                      const std::vector<SweepPoint>& pts) {
    std::string s =
        "factor,gamma_n,gamma_d,gamma_b,l2_percent,l1_percent,iters\n";
    for (const auto& q : pts) {
        s += fmt_g17(q.factor);
        s += ',';
        s += fmt_g17(q.gamma.gamma_n);
        s += ',';
        s += fmt_g17(q.gamma.gamma_d);
        s += ',';
        s += fmt_g17(q.gamma.gamma_b);
        s += ',';
        s += fmt_g17(q.d.l2_percent);
        s += ',';
        s += fmt_g17(q.d.l1_percent);
        s += ',';
        s += std::to_string(q.iters);
        s += '\n';
    }
    write_text_file(path, s);
}

}  // namespace detail

inline ExperimentReport run_paper_experiment(const ExperimentConfig& cfg) {
    ExperimentReport rep;
    auto log = [&](const std::string& line) {
        if (cfg.log) *cfg.log << line << '\n';
    };

    rep.truth = make_phantom(cfg.size);
    const Kernel h = gaussian_psf(cfg.size, cfg.fwhm);
    const Kernel d = laplacian_kernel(cfg.size);
    {
        Image lap = convolve(d, rep.truth);
        double lo = 0.0, hi = std::numeric_limits<double>::infinity();
        for (double v : lap) {
            double a = std::fabs(v);
            if (a < 1e-3)
                lo = std::max(lo, a);
            else if (a > 1e-2)
                hi = std::min(hi, a);
        }
        rep.band_lo = lo;
        rep.band_hi = hi;
    }

    Rng noise = derive_stream(cfg.seed, "noise");
    rep.data = synthesize_data(rep.truth, h, cfg.noise_variance, noise);
    rep.d_data = distances(rep.data, rep.truth);
    rep.gamma_init = ls_init(rep.data, h, d, cfg.log);
    log("data: L2 " + detail::fmt_g17(rep.d_data.l2_percent) + "%  L1 " +
        detail::fmt_g17(rep.d_data.l1_percent) + "%");

    StoppingConfig sc;
    sc.T = cfg.T;
    sc.max_iter = cfg.max_iter;
    sc.log = cfg.log;
    ChainResult main_chain =
        run_chain(rep.data, h, cfg.prior, sc, derive_seed(cfg.seed, "chain0"));
    rep.pm = main_chain.pm;
    rep.trace = std::move(main_chain.state.trace);
    rep.stop_iter = main_chain.state.iter;
    rep.converged = main_chain.state.converged;
    rep.d_pm = distances(rep.pm, rep.truth);

    // post-burn-in hyperparameter summaries
    {
        std::size_t len = rep.trace.size();
        std::size_t start = std::size_t(cfg.ghat_burn_in);
        if (start + 1 >= len) start = len / 2;
        double m[3] = {0, 0, 0}, q[3] = {0, 0, 0};
        std::size_t cnt = len - start;
        for (std::size_t i = start; i < len; ++i) {
            const HyperParams& g = rep.trace[i].gamma;
            double v[3] = {g.gamma_n, g.gamma_d, g.gamma_b};
            for (int j = 0; j < 3; ++j) {
                m[j] += v[j];
                q[j] += v[j] * v[j];
            }
        }
        for (int j = 0; j < 3; ++j) m[j] /= double(cnt);
        rep.ghat = HyperParams{m[0], m[1], m[2]};
        double* rsd[3] = {&rep.rsd_n, &rep.rsd_d, &rep.rsd_b};
        for (int j = 0; j < 3; ++j)
            *rsd[j] = 100.0 *
                      std::sqrt(std::max(q[j] / double(cnt) - m[j] * m[j],
                                         0.0)) /
                      m[j];
        // stabilization: first 100-iteration window whose mean is within
        // 10% of the post-burn-in level
        int* stab[3] = {&rep.stab_n, &rep.stab_d, &rep.stab_b};
        for (int j = 0; j < 3; ++j) {
            *stab[j] = -1;
            for (std::size_t s0 = 0; s0 < std::min<std::size_t>(len, 3000);
                 s0 += 100) {
                std::size_t wl = std::min<std::size_t>(100, len - s0);
                double mw = 0.0;
                for (std::size_t i = s0; i < s0 + wl; ++i) {
                    const HyperParams& g = rep.trace[i].gamma;
                    mw += (j == 0 ? g.gamma_n
                                  : j == 1 ? g.gamma_d : g.gamma_b);
                }
                mw /= double(wl);
                if (std::fabs(mw - m[j]) <= 0.10 * m[j]) {
                    *stab[j] = int(s0);
                    break;
                }
            }
        }
    }
    HuberEquiv eq =
        huber_equiv(PotentialParams(rep.ghat.gamma_d, rep.ghat.gamma_b));
    rep.lambda_hat = eq.lambda;
    rep.s_hat = eq.s;
    log("chain: stop " + std::to_string(rep.stop_iter) + "  PM L2 " +
        detail::fmt_g17(rep.d_pm.l2_percent) + "%  ghat (" +
        detail::fmt_g17(rep.ghat.gamma_n) + ", " +
        detail::fmt_g17(rep.ghat.gamma_d) + ", " +
        detail::fmt_g17(rep.ghat.gamma_b) + ")  s-hat " +
        detail::fmt_g17(rep.s_hat));

    const double truth_norm = std::sqrt(n2(rep.truth));
    StoppingConfig scq = sc;
    scq.log = nullptr;

    ChainResult cr = cpm(rep.data, h, rep.ghat, scq,
                         derive_seed(cfg.seed, "cpm"));
    rep.cpm_est = cr.pm;
    rep.d_cpm = distances(rep.cpm_est, rep.truth);
    {
        double s = 0.0;
        for (std::size_t k = 0; k < rep.pm.count(); ++k) {
            double e = rep.cpm_est.data()[k] - rep.pm.data()[k];
            s += e * e;
        }
        rep.cpm_gap_percent = 100.0 * std::sqrt(s) / truth_norm;
    }
    log("cpm: stop " + std::to_string(cr.state.iter) + "  L2 " +
        detail::fmt_g17(rep.d_cpm.l2_percent) + "%  gap " +
        detail::fmt_g17(rep.cpm_gap_percent) + "%");

    if (cfg.run_sweeps) {
        const char* names[3] = {"gn", "gd", "gb"};
        std::vector<SweepPoint>* out[3] = {&rep.sweep_n, &rep.sweep_d,
                                           &rep.sweep_b};
        SweepPoint center{1.0, rep.ghat, rep.d_cpm, cr.state.iter,
                          cr.state.converged};
        rep.sweep_center_l2 = rep.d_cpm.l2_percent;
        rep.sweep_best_l2 = rep.d_cpm.l2_percent;
        struct Job {
            int comp;
            double factor;
            std::future<ChainResult> fut;
            HyperParams gamma;
        };
        std::vector<Job> jobs;
        for (int j = 0; j < 3; ++j) {
            out[j]->push_back(center);
            for (std::size_t fi = 0; fi < cfg.sweep_factors.size(); ++fi) {
                HyperParams gs = rep.ghat;
                double f = cfg.sweep_factors[fi];
                (j == 0 ? gs.gamma_n : j == 1 ? gs.gamma_d : gs.gamma_b) *= f;
                std::uint64_t s = derive_seed(
                    cfg.seed, std::string("sweep-") + names[j] + "-" +
                                  std::to_string(fi));
                jobs.push_back(Job{j, f, std::future<ChainResult>{}, gs});
                jobs.back().fut = std::async(
                    std::launch::async, [this_y = rep.data, h, gs, scq, s] {
                        return cpm(this_y, h, gs, scq, s);
                    });
            }
        }
        for (auto& job : jobs) {
            ChainResult r = job.fut.get();
            Metrics dm = distances(r.pm, rep.truth);
            out[job.comp]->push_back(
                {job.factor, job.gamma, dm, r.state.iter, r.state.converged});
            rep.sweep_best_l2 = std::min(rep.sweep_best_l2, dm.l2_percent);
            log(std::string("sweep ") + names[job.comp] + " x" +
                detail::fmt_g17(job.factor) + ": L2 " +
                detail::fmt_g17(dm.l2_percent) + "%");
        }
    }

    if (cfg.run_maps) {
        MapResult m1 = map_estimate(rep.data, h, rep.ghat, cfg.map_opt);
        HyperParams gh{rep.ghat.gamma_n, eq.lambda,
                       2.0 * eq.lambda * eq.s};
        MapResult m2 = map_estimate(rep.data, h, gh, cfg.map_opt);
        rep.map_logerf = std::move(m1.x);
        rep.map_huber = std::move(m2.x);
        rep.map_logerf_iters = m1.iters;
        rep.map_huber_iters = m2.iters;
        rep.d_map_logerf = distances(rep.map_logerf, rep.truth);
        rep.d_map_huber = distances(rep.map_huber, rep.truth);
        {
            double s = 0.0;
            for (std::size_t k = 0; k < rep.pm.count(); ++k) {
                double e = rep.map_logerf.data()[k] -
                           rep.map_huber.data()[k];
                s += e * e;
            }
            rep.map_pair_percent = 100.0 * std::sqrt(s) / truth_norm;
        }
        log("map: logerf L2 " + detail::fmt_g17(rep.d_map_logerf.l2_percent) +
            "% (" + std::to_string(rep.map_logerf_iters) + " its)  huber L2 " +
            detail::fmt_g17(rep.d_map_huber.l2_percent) + "% (" +
            std::to_string(rep.map_huber_iters) + " its)  pair " +
            detail::fmt_g17(rep.map_pair_percent) + "%");

        if (cfg.run_marginal_maps) {
            MapResult g1 = map_marginal(
                rep.data, h, rep.ghat.gamma_n,
                logerf_penalty(
                    PotentialParams(rep.ghat.gamma_d, rep.ghat.gamma_b)),
                cfg.marginal_opt);
            MapResult g2 = map_marginal(rep.data, h, rep.ghat.gamma_n,
                                        huber_penalty(eq), cfg.marginal_opt);
            rep.marg_logerf_l2 = distances(g1.x, rep.truth).l2_percent;
            rep.marg_huber_l2 = distances(g2.x, rep.truth).l2_percent;
            double s = 0.0;
            for (std::size_t k = 0; k < g1.x.count(); ++k) {
                double e = g1.x.data()[k] - g2.x.data()[k];
                s += e * e;
            }
            rep.marg_pair_percent = 100.0 * std::sqrt(s) / truth_norm;
            log("map (marginal path): logerf L2 " +
                detail::fmt_g17(rep.marg_logerf_l2) + "%  huber L2 " +
                detail::fmt_g17(rep.marg_huber_l2) + "%  pair " +
                detail::fmt_g17(rep.marg_pair_percent) + "%");
        }
    }

    if (!cfg.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.out_dir);
        auto at = [&](const std::string& name) {
            return (fs::path(cfg.out_dir) / name).string();
        };
        auto img = [&](const std::string& stem, const Image& im) {
            write_image(at(stem + ".img"), im);
            write_pgm(at(stem + ".pgm"), im);
        };
        img("truth", rep.truth);
        img("data", rep.data);
        img("pm", rep.pm);
        img("cpm", rep.cpm_est);
        if (cfg.run_maps) {
            img("map_logerf", rep.map_logerf);
            img("map_huber", rep.map_huber);
        }
        detail::trace_csv(at("trace.csv"), rep.trace);
        if (cfg.run_sweeps) {
            detail::sweep_csv(at("sweep_gn.csv"), rep.sweep_n);
            detail::sweep_csv(at("sweep_gd.csv"), rep.sweep_d);
            detail::sweep_csv(at("sweep_gb.csv"), rep.sweep_b);
        }
        {
            std::string s = "estimator,l2_percent,l1_percent\n";
            auto row = [&](const char* nm, const Metrics& m) {
                s += nm;
                s += ',';
                s += detail::fmt_g17(m.l2_percent);
                s += ',';
                s += detail::fmt_g17(m.l1_percent);
                s += '\n';
            };
            row("data", rep.d_data);
            row("pm", rep.d_pm);
            row("cpm", rep.d_cpm);
            if (cfg.run_maps) {
                row("map_logerf", rep.d_map_logerf);
                row("map_huber", rep.d_map_huber);
            }
            write_text_file(at("table1.csv"), s);
        }
        {
            std::string s;
            s += std::string("artifact_version=") + kVersion + "\n";
            s += "size=" + std::to_string(cfg.size) + "\n";
            s += "fwhm=" + detail::fmt_g17(cfg.fwhm) + "\n";
            s += "noise_variance=" + detail::fmt_g17(cfg.noise_variance) +
                 "\n";
            s += "T=" + detail::fmt_g17(cfg.T) + "\n";
            s += "seed=" + std::to_string(cfg.seed) + "\n";
            s += "max_iter=" + std::to_string(cfg.max_iter) + "\n";
            s += "ghat_burn_in=" + std::to_string(cfg.ghat_burn_in) + "\n";
            s += "sweep_factors=";
            for (std::size_t i = 0; i < cfg.sweep_factors.size(); ++i)
                s += (i ? "," : "") + detail::fmt_g17(cfg.sweep_factors[i]);
            s += "\n";
            s += "alpha_n=" + detail::fmt_g17(cfg.prior.alpha_n) + "\n";
            s += "alpha_d=" + detail::fmt_g17(cfg.prior.alpha_d) + "\n";
            s += "alpha_b=" + detail::fmt_g17(cfg.prior.alpha_b) + "\n";
            s += "beta_n=" + detail::fmt_g17(cfg.prior.beta_n) + "\n";
            s += "beta_d=" + detail::fmt_g17(cfg.prior.beta_d) + "\n";
            s += "beta_b=" + detail::fmt_g17(cfg.prior.beta_b) + "\n";
            write_text_file(at("manifest"), s);
        }
    }
    return rep;
}

}  // namespace deconv
