// Experiment presets and configuration parsing.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gstokes/fields.hpp"
#include "gstokes/rheology.hpp"

namespace gstokes {

class parse_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class validation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Preset { Exp1, Exp2, Custom };

struct PresetFields {
    FieldExpr v_in, sigma, g, F;
};

namespace detail {
// psi-bump components: f(t) = t^2 (1-t)^2 and f'(t) = 2t - 6t^2 + 4t^3
inline double bump(double t) { return t * t * (1.0 - t) * (1.0 - t); }
inline double bump_d(double t) { return 2.0 * t - 6.0 * t * t + 4.0 * t * t * t; }
}  // namespace detail

// 10^3 (f(x) f'(y), -f(y) f'(x)): exactly solenoidal, zero trace.
inline FieldExpr vortex_bump_field() {
    return make_field([](Vec2 p) {
        return Vec2{1e3 * detail::bump(p.x) * detail::bump_d(p.y),
                    -1e3 * detail::bump(p.y) * detail::bump_d(p.x)};
    });
}

inline FieldExpr exp1_forcing() {
    return make_field([](Vec2 p) {
        return Vec2{1e2 * std::sin(2.0 * M_PI * p.x) * std::sin(4.0 * M_PI * p.y),
                    -1e2 * std::sin(4.0 * M_PI * p.x) * std::sin(2.0 * M_PI * p.y)};
    });
}

// (1,0) on the lid {y=1}, zero elsewhere.
inline FieldExpr lid_indicator_field() {
    return make_field([](Vec2 p) {
        return std::abs(p.y - 1.0) <= 1e-12 ? Vec2{1.0, 0.0} : Vec2{0.0, 0.0};
    });
}

inline PresetFields preset_fields(Preset preset) {
    PresetFields f;
    switch (preset) {
        case Preset::Exp1:
            f.v_in = vortex_bump_field();
            f.sigma = vortex_bump_field();
            f.g = FieldExpr::zero();
            f.F = exp1_forcing();
            break;
        case Preset::Exp2:
            f.v_in = FieldExpr::zero();
            f.sigma = vortex_bump_field();
            f.g = lid_indicator_field();
            f.F = FieldExpr::zero();
            break;
        case Preset::Custom:
            break;
    }
    return f;
}

struct ExperimentConfig {
    Preset preset = Preset::Exp1;
    int nx = 13, ny = 13;
    double p = 2.0;
    double kappa = 0.1;
    double tau = std::pow(2.0, -7);
    double horizon = 1.0;  // T; N = T / tau
    int samples = 1000;    // L
    std::uint64_t seed = 1;
    bool stochastic = true;
    int threads = 1;
    std::string out_dir = "out";
    std::string profile;  // "", "desk" or "paper"

    int steps() const { return static_cast<int>(std::llround(horizon / tau)); }

    void apply_profile() {
        if (profile == "desk") {
            nx = ny = 9;
            samples = 100;
            tau = std::pow(2.0, -5);
            horizon = 1.0;
        } else if (profile == "paper") {
            nx = ny = 13;
            samples = 1000;
            tau = std::pow(2.0, -9);
            horizon = 1.0;
        } else if (!profile.empty()) {
            throw validation_error("unknown profile '" + profile + "' (expected desk or paper)");
        }
    }

    void validate() const {
        std::vector<std::string> errs;
        if (nx < 2 || ny < 2) errs.push_back("mesh vertex counts must be >= 2");
        if (!(p > 1.0)) errs.push_back("p must exceed 1");
        if (kappa < 0.0) errs.push_back("kappa must be nonnegative");
        if (p < 2.0 && kappa == 0.0) errs.push_back("p < 2 requires kappa > 0");
        if (!(tau > 0.0)) errs.push_back("tau must be positive");
        if (samples < 1) errs.push_back("sample size must be >= 1");
        if (threads < 1) errs.push_back("threads must be >= 1");
        const int N = steps();
        if (N < 1 || std::abs(tau * N - horizon) > 1e-12)
            errs.push_back("horizon must be an integer multiple of tau");
        if (!errs.empty()) {
            std::string msg = "invalid configuration:";
            for (const auto& e : errs) msg += "\n  - " + e;
            throw validation_error(msg);
        }
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

// key = value file; '#' starts a comment; unknown keys are rejected.
inline ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<config>") {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw parse_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        try {
            if (key == "preset") {
                if (val == "exp1") cfg.preset = Preset::Exp1;
                else if (val == "exp2") cfg.preset = Preset::Exp2;
                else if (val == "custom") cfg.preset = Preset::Custom;
                else throw parse_error("unknown preset '" + val + "'");
            } else if (key == "nx") cfg.nx = std::stoi(val);
            else if (key == "ny") cfg.ny = std::stoi(val);
            else if (key == "p") cfg.p = std::stod(val);
            else if (key == "kappa") cfg.kappa = std::stod(val);
            else if (key == "tau") cfg.tau = std::stod(val);
            else if (key == "horizon") cfg.horizon = std::stod(val);
            else if (key == "samples") cfg.samples = std::stoi(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "threads") cfg.threads = std::stoi(val);
            else if (key == "out") cfg.out_dir = val;
            else if (key == "profile") cfg.profile = val;
            else if (key == "stochastic") {
                if (val == "true" || val == "1" || val == "on") cfg.stochastic = true;
                else if (val == "false" || val == "0" || val == "off") cfg.stochastic = false;
                else throw parse_error("expected boolean, got '" + val + "'");
            } else {
                throw parse_error("unknown key '" + key + "'");
            }
        } catch (const parse_error&) {
            throw;
        } catch (const std::exception&) {
            throw parse_error(origin + ":" + std::to_string(lineno) + ": cannot parse value '" + val +
                              "' for key '" + key + "'");
        }
    }
    cfg.apply_profile();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

// Canonical one-line-per-field rendering used for hashing and the manifest.
inline std::string canonical_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os.precision(17);
    os << "preset=" << (c.preset == Preset::Exp1 ? "exp1" : c.preset == Preset::Exp2 ? "exp2" : "custom")
       << "\nnx=" << c.nx << "\nny=" << c.ny << "\np=" << c.p << "\nkappa=" << c.kappa
       << "\ntau=" << c.tau << "\nhorizon=" << c.horizon << "\nsamples=" << c.samples
       << "\nseed=" << c.seed << "\nstochastic=" << (c.stochastic ? "true" : "false") << "\n";
    return os.str();
}

}  // namespace gstokes
