// Plain-text key=value run configuration. '#' starts a comment, blank lines
// are skipped, unknown keys are errors (they are always typos). Defaults are
// the benchmark experiment: 128 grid, FWHM 6 blur, noise variance 2e-2,
// stopping threshold 5e-4, Jeffreys hyperprior on every gamma.
//
// beta_* accept "inf"; (alpha, beta) = (1, inf) is the uniform prior, the
// (0, inf) default is Jeffreys.

#pragma once

#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "deconv/sampler.hpp"

namespace deconv {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int size = 128;
    double fwhm = 6.0;
    double noise_variance = 0.02;
    double T = 5e-4;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int burn_in = 0;
    int max_iter = 100000;
    int ghat_burn_in = 400;
    double alpha_n = 0.0, alpha_d = 0.0, alpha_b = 0.0;
    double beta_n = std::numeric_limits<double>::infinity();
    double beta_d = std::numeric_limits<double>::infinity();
    double beta_b = std::numeric_limits<double>::infinity();
    std::vector<double> sweep_factors{0.5, 2.0};
    std::string out_dir;

    GammaPrior prior() const {
        GammaPrior p;
        p.alpha_n = alpha_n;
        p.alpha_d = alpha_d;
        p.alpha_b = alpha_b;
        p.beta_n = beta_n;
        p.beta_d = beta_d;
        p.beta_b = beta_b;
        return p;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_real(const std::string& v, const std::string& key,
                         int line) {
    if (v == "inf" || v == "+inf")
        return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line) + ": key '" +
                          key + "' has unparsable value '" + v + "'");
    }
}

inline long long parse_int(const std::string& v, const std::string& key,
                           int line) {
    try {
        std::size_t pos = 0;
        long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config line " + std::to_string(line) + ": key '" +
                          key + "' has unparsable value '" + v + "'");
    }
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw.substr(0, raw.find('#'));
        s = detail::trim(s);
        if (s.empty()) continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line) +
                              ": expected key=value, got '" + s + "'");
        std::string key = detail::trim(s.substr(0, eq));
        std::string val = detail::trim(s.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("config line " + std::to_string(line) +
                              ": empty key or value");

        if (key == "size") {
            long long v = detail::parse_int(val, key, line);
            if (v < 2 || v > 32768)
                throw ConfigError("config line " + std::to_string(line) +
                                  ": key 'size' out of range");
            cfg.size = int(v);
        } else if (key == "fwhm") {
            cfg.fwhm = detail::parse_real(val, key, line);
            if (!(cfg.fwhm > 0.0))
                throw ConfigError("config line " + std::to_string(line) +
                                  ": key 'fwhm' must be positive");
        } else if (key == "noise_variance") {
            cfg.noise_variance = detail::parse_real(val, key, line);
            if (!(cfg.noise_variance >= 0.0))
                throw ConfigError("config line " + std::to_string(line) +
                                  ": key 'noise_variance' must be >= 0");
        } else if (key == "T") {
            cfg.T = detail::parse_real(val, key, line);
            if (!(cfg.T > 0.0))
                throw ConfigError("config line " + std::to_string(line) +
                                  ": key 'T' must be positive");
        } else if (key == "seed") {
            cfg.seed = std::uint64_t(detail::parse_int(val, key, line));
            cfg.seed_set = true;
        } else if (key == "burn_in") {
            cfg.burn_in = int(detail::parse_int(val, key, line));
        } else if (key == "max_iter") {
            cfg.max_iter = int(detail::parse_int(val, key, line));
        } else if (key == "ghat_burn_in") {
            cfg.ghat_burn_in = int(detail::parse_int(val, key, line));
        } else if (key == "alpha_n") {
            cfg.alpha_n = detail::parse_real(val, key, line);
        } else if (key == "alpha_d") {
            cfg.alpha_d = detail::parse_real(val, key, line);
        } else if (key == "alpha_b") {
            cfg.alpha_b = detail::parse_real(val, key, line);
        } else if (key == "beta_n") {
            cfg.beta_n = detail::parse_real(val, key, line);
        } else if (key == "beta_d") {
            cfg.beta_d = detail::parse_real(val, key, line);
        } else if (key == "beta_b") {
            cfg.beta_b = detail::parse_real(val, key, line);
        } else if (key == "sweep_factors") {
            cfg.sweep_factors.clear();
            std::istringstream fs(val);
            std::string tok;
            while (std::getline(fs, tok, ','))
                cfg.sweep_factors.push_back(
                    detail::parse_real(detail::trim(tok), key, line));
            if (cfg.sweep_factors.empty())
                throw ConfigError("config line " + std::to_string(line) +
                                  ": key 'sweep_factors' is empty");
        } else if (key == "out_dir") {
            cfg.out_dir = val;
        } else {
            throw ConfigError("config line " + std::to_string(line) +
                              ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

}  // namespace deconv
