// Command-line front end. Eight subcommands: sample-prior, potential, equiv,
// make-phantom, deconvolve, map, experiment, metrics. Anything stochastic
// takes a --seed; if omitted, one is generated and logged so the run can
// still be reproduced. Commands that write files write into a run directory
// containing a manifest with the fully resolved configuration.
//
// Exit codes: 0 success, 1 usage or bad config, 2 numerical failure, 3 I/O.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "deconv/config.hpp"
#include "deconv/experiment.hpp"
#include "deconv/io.hpp"
#include "deconv/prior_field.hpp"

namespace fs = std::filesystem;
using namespace deconv;

namespace {

std::uint64_t fresh_seed() {
    std::random_device rd;
    return std::uint64_t(rd()) << 32 | rd();
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> given) {
    if (given) return *given;
    std::uint64_t s = fresh_seed();
    std::cerr << "seed not given, generated seed=" << s << "\n";
    return s;
}

std::string slurp_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// key=value manifest, same shape the experiment driver writes
struct Manifest {
    std::string text = std::string("artifact_version=") + kVersion + "\n";

    Manifest& add(const std::string& key, const std::string& v) {
        text += key + "=" + v + "\n";
        return *this;
    }
    Manifest& add(const std::string& key, double v) {
        return add(key, detail::fmt_g17(v));
    }
    Manifest& add(const std::string& key, int v) {
        return add(key, std::to_string(v));
    }
    Manifest& add(const std::string& key, std::uint64_t v) {
        return add(key, std::to_string(v));
    }
    void write(const fs::path& dir) const {
        write_text_file((dir / "manifest").string(), text);
    }
};

fs::path make_run_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

void write_image_pair(const fs::path& dir, const std::string& stem,
                      const Image& img) {
    write_image((dir / (stem + ".img")).string(), img);
    write_pgm((dir / (stem + ".pgm")).string(), img);
}

// "gn,gd,gb" -> HyperParams; CLI-level, so malformed input is a usage error
HyperParams parse_gamma_triple(const std::string& s, const std::string& flag) {
    std::istringstream in(s);
    std::string tok;
    std::vector<double> v;
    while (std::getline(in, tok, ',')) {
        try {
            std::size_t pos = 0;
            v.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw CLI::ValidationError(flag, "expected three numbers gn,gd,gb");
        }
    }
    if (v.size() != 3)
        throw CLI::ValidationError(flag, "expected three numbers gn,gd,gb");
    return HyperParams{v[0], v[1], v[2]};
}

std::pair<double, double> parse_pair(const std::string& s,
                                     const std::string& flag) {
    std::istringstream in(s);
    std::string a, b;
    if (!std::getline(in, a, ',') || !std::getline(in, b) || in.rdbuf()->in_avail())
        throw CLI::ValidationError(flag, "expected two numbers");
    try {
        return {std::stod(a), std::stod(b)};
    } catch (const std::exception&) {
        throw CLI::ValidationError(flag, "expected two numbers");
    }
}

void histogram_csv(const fs::path& path, const Image& img, int bins) {
    double lo = img.data()[0], hi = img.data()[0];
    for (double v : img) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) hi = lo + 1.0;
    double w = (hi - lo) / bins;
    std::vector<long> count(std::size_t(bins), 0);
    for (double v : img) {
        int k = int((v - lo) / w);
        if (k == bins) k = bins - 1;
        ++count[std::size_t(k)];
    }
    std::string s = "bin_center,count,density\n";
    double n = double(img.count());
    for (int k = 0; k < bins; ++k) {
        s += detail::fmt_g17(lo + (k + 0.5) * w);
        s += ',';
        s += std::to_string(count[std::size_t(k)]);
        s += ',';
        s += detail::fmt_g17(double(count[std::size_t(k)]) / (n * w));
        s += '\n';
    }
    write_text_file(path.string(), s);
}

// ---- subcommand bodies ----------------------------------------------------

struct SamplePriorArgs {
    int size = 128;
    double gamma_d = 1.0, gamma_b = 1.0, eps = 1e-10;
    std::optional<std::uint64_t> seed;
    std::string out = "prior_run";
    int bins = 81;
};

void cmd_sample_prior(const SamplePriorArgs& a) {
    std::uint64_t seed = resolve_seed(a.seed);
    FieldParams fp(PotentialParams(a.gamma_d, a.gamma_b), a.eps, a.size);
    Rng rng = derive_stream(seed, "prior");
    auto [x, b] = sample_prior(fp, rng);
    Image xbar = convolve(laplacian_kernel(a.size), x);

    fs::path dir = make_run_dir(a.out);
    write_image_pair(dir, "x", x);
    write_image_pair(dir, "b", b);
    histogram_csv(dir / "hist_b.csv", b, a.bins);
    histogram_csv(dir / "hist_xbar.csv", xbar, a.bins);
    Manifest()
        .add("command", "sample-prior")
        .add("size", a.size)
        .add("gamma_d", a.gamma_d)
        .add("gamma_b", a.gamma_b)
        .add("eps", a.eps)
        .add("seed", seed)
        .add("bins", a.bins)
        .write(dir);
    std::cout << "wrote x/b images and histograms to " << dir.string() << "\n";
}

struct PotentialArgs {
    double gamma_d = 1.0, gamma_b = 1.0;
    double xmax = 5.0;
    int points = 401;
    std::string out;  // empty: stdout
};

void cmd_potential(const PotentialArgs& a) {
    PotentialParams pot(a.gamma_d, a.gamma_b);
    HuberEquiv eq = huber_equiv(pot);
    std::string s = "x,phi,phi_prime,huber,huber_prime\n";
    for (int k = 0; k < a.points; ++k) {
        double x = a.points == 1
                       ? 0.0
                       : -a.xmax + 2.0 * a.xmax * k / (a.points - 1);
        s += detail::fmt_g17(x);
        s += ',';
        s += detail::fmt_g17(phi(x, pot));
        s += ',';
        s += detail::fmt_g17(phi_prime(x, pot));
        s += ',';
        s += detail::fmt_g17(huber_potential(x, eq));
        s += ',';
        s += detail::fmt_g17(huber_prime(x, eq));
        s += '\n';
    }
    if (a.out.empty())
        std::cout << s;
    else
        write_text_file(a.out, s);
}

void cmd_equiv(double gamma_d, double gamma_b) {
    PotentialParams pot(gamma_d, gamma_b);
    HuberEquiv eq = huber_equiv(pot);
    std::cout << "lambda=" << detail::fmt_g17(eq.lambda) << "\n"
              << "s=" << detail::fmt_g17(eq.s) << "\n"
              << "eta=" << detail::fmt_g17(pot.eta()) << "\n"
              << "critical_gamma_b=" << detail::fmt_g17(critical_gamma_b(gamma_d))
              << "\n";
}

struct MakePhantomArgs {
    int size = 128;
    std::uint64_t seed = 0;  // the phantom is deterministic; logged anyway
    std::string out = "phantom_run";
};

void cmd_make_phantom(const MakePhantomArgs& a) {
    Image t = make_phantom(a.size);
    fs::path dir = make_run_dir(a.out);
    write_image_pair(dir, "truth", t);
    Manifest()
        .add("command", "make-phantom")
        .add("size", a.size)
        .add("seed", a.seed)
        .write(dir);
    std::cout << "wrote truth image to " << dir.string() << "\n";
}

struct DeconvolveArgs {
    std::string data;
    double fwhm = 6.0;
    double T = 5e-4;
    std::optional<std::uint64_t> seed;
    std::string fixed_gamma;  // "gn,gd,gb" or empty
    int burn_in = 0;
    int max_iter = 100000;
    std::string out = "deconvolve_run";
    bool quiet = false;
};

void cmd_deconvolve(const DeconvolveArgs& a) {
    std::uint64_t seed = resolve_seed(a.seed);
    Image y = read_image(a.data);
    Kernel h = gaussian_psf(y.size(), a.fwhm);

    StoppingConfig sc;
    sc.T = a.T;
    sc.burn_in = a.burn_in;
    sc.max_iter = a.max_iter;
    if (!a.fixed_gamma.empty())
        sc.fixed_gamma = parse_gamma_triple(a.fixed_gamma, "--fixed-gamma");
    if (!a.quiet) sc.log = &std::cerr;

    ChainResult r = run_chain(y, h, GammaPrior::jeffreys(), sc, seed);

    fs::path dir = make_run_dir(a.out);
    write_image_pair(dir, "pm", r.pm);
    detail::trace_csv((dir / "trace.csv").string(), r.state.trace);
    Manifest m;
    m.add("command", "deconvolve")
        .add("data", a.data)
        .add("size", y.size())
        .add("psf_fwhm", a.fwhm)
        .add("T", a.T)
        .add("seed", seed)
        .add("burn_in", a.burn_in)
        .add("max_iter", a.max_iter)
        .add("fixed_gamma", a.fixed_gamma.empty() ? std::string("none")
                                                  : a.fixed_gamma)
        .add("prior", "jeffreys")
        .add("stop_iter", r.state.iter)
        .add("converged", int(r.state.converged));
    m.write(dir);
    std::cout << "stopped at iteration " << r.state.iter
              << (r.state.converged ? "" : " (cap hit, not converged)")
              << "; gamma_n=" << detail::fmt_g17(r.state.gamma.gamma_n)
              << " gamma_d=" << detail::fmt_g17(r.state.gamma.gamma_d)
              << " gamma_b=" << detail::fmt_g17(r.state.gamma.gamma_b) << "\n"
              << "wrote pm image and trace to " << dir.string() << "\n";
}

struct MapArgs {
    std::string data;
    double fwhm = 6.0;
    std::string gamma;  // "gn,gd,gb", required
    std::string huber;  // "lambda,s" or empty for the log-erf potential
    double tol = 1e-8;
    int max_iter = 120000;
    std::string out = "map_run";
};

void cmd_map(const MapArgs& a) {
    Image y = read_image(a.data);
    Kernel h = gaussian_psf(y.size(), a.fwhm);
    HyperParams g = parse_gamma_triple(a.gamma, "--gamma");

    MapOptions opt;
    opt.tol = a.tol;
    opt.max_iter = a.max_iter;
    std::string variant = "logerf";
    HyperParams run = g;
    if (!a.huber.empty()) {
        auto [lambda, s] = parse_pair(a.huber, "--huber");
        run = HyperParams{g.gamma_n, lambda, 2.0 * lambda * s};
        variant = "huber";
    }
    MapResult r = map_estimate(y, h, run, opt);

    fs::path dir = make_run_dir(a.out);
    write_image_pair(dir, "map", r.x);
    Manifest()
        .add("command", "map")
        .add("data", a.data)
        .add("size", y.size())
        .add("psf_fwhm", a.fwhm)
        .add("gamma", a.gamma)
        .add("variant", variant)
        .add("huber", a.huber.empty() ? std::string("none") : a.huber)
        .add("tol", a.tol)
        .add("max_iter", a.max_iter)
        .add("iters", r.iters)
        .add("criterion", r.criterion)
        .add("converged", int(r.converged))
        .write(dir);
    std::cout << variant << " map: " << r.iters << " iterations, criterion "
              << detail::fmt_g17(r.criterion)
              << (r.converged ? "" : " (cap hit, not converged)") << "\n"
              << "wrote map image to " << dir.string() << "\n";
}

struct ExperimentArgs {
    std::string config;
    std::string out;  // overrides the config's out_dir
    bool quiet = false;
};

void cmd_experiment(const ExperimentArgs& a) {
    RunConfig rc = parse_config(slurp_file(a.config));

    ExperimentConfig ec;
    ec.size = rc.size;
    ec.fwhm = rc.fwhm;
    ec.noise_variance = rc.noise_variance;
    ec.T = rc.T;
    ec.seed = rc.seed_set ? rc.seed : fresh_seed();
    if (!rc.seed_set)
        std::cerr << "seed not in config, generated seed=" << ec.seed << "\n";
    ec.max_iter = rc.max_iter;
    ec.ghat_burn_in = rc.ghat_burn_in;
    ec.sweep_factors = rc.sweep_factors;
    ec.prior = rc.prior();
    ec.out_dir = !a.out.empty() ? a.out
                 : !rc.out_dir.empty() ? rc.out_dir
                                       : std::string("experiment_run");
    if (!a.quiet) ec.log = &std::cerr;

    ExperimentReport rep = run_paper_experiment(ec);

    auto row = [](const char* nm, const Metrics& m) {
        std::cout << "  " << nm << ": l2 " << detail::fmt_g17(m.l2_percent)
                  << "%, l1 " << detail::fmt_g17(m.l1_percent) << "%\n";
    };
    std::cout << "chain stopped at " << rep.stop_iter
              << (rep.converged ? "" : " (cap hit, not converged)") << "\n";
    std::cout << "ghat: gamma_n=" << detail::fmt_g17(rep.ghat.gamma_n)
              << " gamma_d=" << detail::fmt_g17(rep.ghat.gamma_d)
              << " gamma_b=" << detail::fmt_g17(rep.ghat.gamma_b)
              << " (lambda=" << detail::fmt_g17(rep.lambda_hat)
              << ", s=" << detail::fmt_g17(rep.s_hat) << ")\n";
    std::cout << "distances to truth:\n";
    row("data", rep.d_data);
    row("pm", rep.d_pm);
    row("cpm", rep.d_cpm);
    row("map_logerf", rep.d_map_logerf);
    row("map_huber", rep.d_map_huber);
    std::cout << "cpm gap " << detail::fmt_g17(rep.cpm_gap_percent)
              << "%, map pair " << detail::fmt_g17(rep.map_pair_percent)
              << "%\n";
    std::cout << "run directory: " << ec.out_dir << "\n";
}

void cmd_metrics(const std::string& estimate, const std::string& truth) {
    Image e = read_image(estimate);
    Image t = read_image(truth);
    Metrics m = distances(e, t);
    std::cout << "l2_percent=" << detail::fmt_g17(m.l2_percent) << "\n"
              << "l1_percent=" << detail::fmt_g17(m.l1_percent) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compound-field Bayesian deconvolution"};
    app.require_subcommand(1);

    SamplePriorArgs sp;
    auto* c_sp = app.add_subcommand(
        "sample-prior", "draw (X, B) from the compound prior field");
    c_sp->add_option("--size", sp.size, "grid side P")->capture_default_str();
    c_sp->add_option("--gamma-d", sp.gamma_d, "field precision")
        ->capture_default_str();
    c_sp->add_option("--gamma-b", sp.gamma_b, "auxiliary Laplace rate")
        ->capture_default_str();
    c_sp->add_option("--eps", sp.eps, "DC regularization of the field kernel")
        ->capture_default_str();
    c_sp->add_option("--seed", sp.seed, "master seed");
    c_sp->add_option("--out", sp.out, "run directory")->capture_default_str();
    c_sp->add_option("--bins", sp.bins, "histogram bins")
        ->capture_default_str();
    c_sp->callback([&] { cmd_sample_prior(sp); });

    PotentialArgs pa;
    auto* c_pot = app.add_subcommand(
        "potential", "tabulate phi, phi', and the equivalent Huber pair");
    c_pot->add_option("--gamma-d", pa.gamma_d, "field precision")
        ->capture_default_str();
    c_pot->add_option("--gamma-b", pa.gamma_b, "auxiliary Laplace rate")
        ->capture_default_str();
    c_pot->add_option("--xmax", pa.xmax, "tabulate on [-xmax, xmax]")
        ->capture_default_str();
    c_pot->add_option("--points", pa.points, "table rows")
        ->capture_default_str();
    c_pot->add_option("--out", pa.out, "CSV path (default stdout)");
    c_pot->callback([&] { cmd_potential(pa); });

    double eq_gd = 1.0, eq_gb = 1.0;
    auto* c_eq = app.add_subcommand(
        "equiv", "print the Huber equivalence (lambda, s) for (gamma_d, gamma_b)");
    c_eq->add_option("--gamma-d", eq_gd, "field precision")
        ->capture_default_str();
    c_eq->add_option("--gamma-b", eq_gb, "auxiliary Laplace rate")
        ->capture_default_str();
    c_eq->callback([&] { cmd_equiv(eq_gd, eq_gb); });

    MakePhantomArgs mp;
    auto* c_mp = app.add_subcommand("make-phantom",
                                    "write the three-object benchmark phantom");
    c_mp->add_option("--size", mp.size, "grid side P")->capture_default_str();
    c_mp->add_option("--seed", mp.seed, "logged in the manifest")
        ->capture_default_str();
    c_mp->add_option("--out", mp.out, "run directory")->capture_default_str();
    c_mp->callback([&] { cmd_make_phantom(mp); });

    DeconvolveArgs da;
    auto* c_dc = app.add_subcommand(
        "deconvolve", "Gibbs-sample the posterior and write the mean estimate");
    c_dc->add_option("--data", da.data, "observed image (.img)")->required();
    c_dc->add_option("--psf-fwhm", da.fwhm, "Gaussian PSF FWHM in pixels")
        ->capture_default_str();
    c_dc->add_option("--T", da.T, "stopping threshold")->capture_default_str();
    c_dc->add_option("--seed", da.seed, "master seed");
    c_dc->add_option("--fixed-gamma", da.fixed_gamma,
                     "pin hyperparameters to gn,gd,gb (skips the gamma move)");
    c_dc->add_option("--burn-in", da.burn_in,
                     "samples excluded from the mean (default 0)");
    c_dc->add_option("--max-iter", da.max_iter, "iteration cap")
        ->capture_default_str();
    c_dc->add_option("--out", da.out, "run directory")->capture_default_str();
    c_dc->add_flag("--quiet", da.quiet, "suppress the per-100-iteration line");
    c_dc->callback([&] { cmd_deconvolve(da); });

    MapArgs ma;
    auto* c_map = app.add_subcommand(
        "map", "joint MAP estimate by exact alternation");
    c_map->add_option("--data", ma.data, "observed image (.img)")->required();
    c_map->add_option("--psf-fwhm", ma.fwhm, "Gaussian PSF FWHM in pixels")
        ->capture_default_str();
    c_map->add_option("--gamma", ma.gamma, "hyperparameters gn,gd,gb")
        ->required();
    c_map->add_option("--huber", ma.huber,
                      "use the Huber potential with lambda,s instead of log-erf");
    c_map->add_option("--tol", ma.tol, "relative criterion decrease to stop")
        ->capture_default_str();
    c_map->add_option("--max-iter", ma.max_iter, "iteration cap")
        ->capture_default_str();
    c_map->add_option("--out", ma.out, "run directory")->capture_default_str();
    c_map->callback([&] { cmd_map(ma); });

    ExperimentArgs ea;
    auto* c_ex = app.add_subcommand(
        "experiment", "run the full benchmark battery from a config file");
    c_ex->add_option("--config", ea.config, "key=value config file")
        ->required();
    c_ex->add_option("--out", ea.out, "run directory (overrides the config)");
    c_ex->add_flag("--quiet", ea.quiet, "suppress progress lines");
    c_ex->callback([&] { cmd_experiment(ea); });

    std::string me, mt;
    auto* c_me = app.add_subcommand("metrics",
                                    "relative l2/l1 distances to a truth image");
    c_me->add_option("--estimate", me, "estimate image (.img)")->required();
    c_me->add_option("--truth", mt, "truth image (.img)")->required();
    c_me->callback([&] { cmd_metrics(me, mt); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
