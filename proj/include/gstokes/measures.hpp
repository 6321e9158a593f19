// Monte-Carlo ensemble driver, occupation measures, semigroup-defect and
// increment-constant estimators, field statistics.
#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "gstokes/dynamics.hpp"

namespace gstokes {

// Low-dimensional functional of a reconstructed velocity state.
struct Observable {
    std::string name;
    int dim = 1;
    std::function<std::vector<double>(const GradientDiscretisation&, const AssembledForms&,
                                      const Vector& v_free)>
        eval;
};

inline Observable kinetic_energy_observable() {
    return {"energy", 1,
            [](const GradientDiscretisation&, const AssembledForms& forms, const Vector& v) {
                return std::vector<double>{kinetic_energy(forms, v)};
            }};
}

inline Observable point_velocity_observable(Vec2 pt = {0.5, 0.75}) {
    return {"point_velocity", 2,
            [pt](const GradientDiscretisation& gd, const AssembledForms&, const Vector& v) {
                const Vec2 u = velocity_value(gd, FreeView{v}, pt);
                return std::vector<double>{u.x, u.y};
            }};
}

// Bounded Lipschitz test functional f(v) = 1 / (1 + ||Pi v||_{L^2}), sup|f| = 1.
inline Observable bounded_test_observable() {
    return {"bounded_test", 1,
            [](const GradientDiscretisation&, const AssembledForms& forms, const Vector& v) {
                const double nrm = std::sqrt(std::max(0.0, v.dot(forms.M * v)));
                return std::vector<double>{1.0 / (1.0 + nrm)};
            }};
}

struct EnsembleConfig {
    int L = 1;
    std::uint64_t master_seed = 0;
    StepperConfig stepper;
    int threads = 1;
    bool strict = true;      // any trajectory failure fails the ensemble
    bool stochastic = true;  // false: zero increments (deterministic companion runs)
};

struct TrajectoryData {
    std::vector<std::vector<double>> integer_obs;  // [n = 0..N][flattened observables]
    std::vector<std::vector<double>> shifted_obs;  // [n = 0..N-1]
    std::vector<double> energy;                    // at integer steps
    std::vector<double> increment_l2_sq;           // per step
    Vector final_full;                             // full nodal field at the final step
    bool failed = false;
    std::string error;
};

struct EnsembleRecord {
    int L = 0;
    int N = 0;
    std::vector<std::string> observable_names;
    std::vector<int> observable_dims;
    std::vector<TrajectoryData> trajectories;  // indexed by trajectory, merge is order-free
    bool partial = false;                      // lenient mode with failures
};

inline EnsembleRecord run_ensemble(const GradientDiscretisation& gd, const AssembledForms& forms,
                                   const EnsembleConfig& cfg, const Vector& init_load,
                                   const std::vector<Observable>& observables) {
    EnsembleRecord rec;
    rec.L = cfg.L;
    rec.N = cfg.stepper.N;
    for (const auto& o : observables) {
        rec.observable_names.push_back(o.name);
        rec.observable_dims.push_back(o.dim);
    }
    rec.trajectories.resize(cfg.L);

    auto run_one = [&](int ell) {
        TrajectoryData& td = rec.trajectories[ell];
        // tau = 0 makes every increment vanish without touching the stepper
        NoisePath noise{cfg.master_seed, ell + 1, cfg.stochastic ? cfg.stepper.tau : 0.0};
        TrajectoryObservers obs;
        obs.on_integer = [&](int, const DiscreteState& s) {
            std::vector<double> row;
            for (const auto& o : observables) {
                auto v = o.eval(gd, forms, s.v);
                row.insert(row.end(), v.begin(), v.end());
            }
            td.integer_obs.push_back(std::move(row));
            td.energy.push_back(kinetic_energy(forms, s.v));
        };
        obs.on_shifted = [&](int, const Vector& w) {
            std::vector<double> row;
            for (const auto& o : observables) {
                auto v = o.eval(gd, forms, w);
                row.insert(row.end(), v.begin(), v.end());
            }
            td.shifted_obs.push_back(std::move(row));
        };
        try {
            auto tr = run_trajectory(gd, forms, cfg.stepper, init_load, noise, obs);
            for (const auto& s : tr.steps) td.increment_l2_sq.push_back(s.increment_l2_sq);
            td.final_full = embed_full(gd, tr.final_state.v);
        } catch (const std::exception& e) {
            td.failed = true;
            td.error = e.what();
        }
    };

    const int n_threads = std::max(1, cfg.threads);
    if (n_threads == 1 || cfg.L == 1) {
        for (int ell = 0; ell < cfg.L; ++ell) run_one(ell);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int t = 0; t < n_threads; ++t)
            pool.emplace_back([&] {
                for (int ell = next.fetch_add(1); ell < cfg.L; ell = next.fetch_add(1)) run_one(ell);
            });
        for (auto& t : pool) t.join();
    }

    for (const auto& td : rec.trajectories) {
        if (td.failed) {
            if (cfg.strict) throw solver_error("run_ensemble: trajectory failed: " + td.error);
            rec.partial = true;
        }
    }
    return rec;
}

enum class MeasureKind { Integer, Shifted };

// Empirical occupation measure over {observable(S(n)) : n = 0..N-1, all trajectories}.
struct OccupationMeasure {
    MeasureKind kind = MeasureKind::Integer;
    int N = 0, L = 0;
    std::vector<std::vector<double>> samples;  // N*L values of the observable
    double weight = 0.0;                       // uniform, 1/(N*L)

    double total_mass() const { return weight * static_cast<double>(samples.size()); }
};

namespace detail {

inline std::pair<int, int> observable_slice(const EnsembleRecord& rec, int obs_index) {
    int off = 0;
    for (int i = 0; i < obs_index; ++i) off += rec.observable_dims[i];
    return {off, rec.observable_dims[obs_index]};
}

}  // namespace detail

inline OccupationMeasure occupation_measure(const EnsembleRecord& rec, MeasureKind kind,
                                            int obs_index, int N) {
    if (N < 1 || N > rec.N) throw std::out_of_range("occupation_measure: N exceeds steps run");
    const auto [off, dim] = detail::observable_slice(rec, obs_index);
    OccupationMeasure mu;
    mu.kind = kind;
    mu.N = N;
    mu.L = rec.L;
    mu.weight = 1.0 / (static_cast<double>(N) * rec.L);
    mu.samples.reserve(static_cast<std::size_t>(N) * rec.L);
    for (const auto& td : rec.trajectories) {
        const auto& rows = (kind == MeasureKind::Integer) ? td.integer_obs : td.shifted_obs;
        for (int n = 0; n < N; ++n)
            mu.samples.emplace_back(rows[n].begin() + off, rows[n].begin() + off + dim);
    }
    return mu;
}

struct DefectEstimate {
    double defect = 0.0;
    double standard_error = 0.0;
};

// Asymptotic-invariance defect of the first measure sequence, telescoped form:
// |(1/N) sum_l mean_f(n+l) - (1/N) sum_l mean_f(l)| with per-trajectory SE.
inline DefectEstimate invariance_defect(const EnsembleRecord& rec, int obs_index, int n, int N) {
    if (n < 0 || N < 1 || n + N > rec.N + 1)
        throw std::out_of_range("invariance_defect: trajectories were not run to N+n steps");
    const auto [off, dim] = detail::observable_slice(rec, obs_index);
    if (dim != 1) throw std::invalid_argument("invariance_defect: scalar observable required");
    std::vector<double> per_traj;
    per_traj.reserve(rec.L);
    for (const auto& td : rec.trajectories) {
        double d = 0.0;
        for (int l = 0; l < N; ++l) d += td.integer_obs[n + l][off] - td.integer_obs[l][off];
        per_traj.push_back(d / N);
    }
    double mean = 0.0;
    for (double d : per_traj) mean += d;
    mean /= rec.L;
    double var = 0.0;
    for (double d : per_traj) var += (d - mean) * (d - mean);
    var = rec.L > 1 ? var / (rec.L - 1) : 0.0;
    return {std::abs(mean), std::sqrt(var / rec.L)};
}

// Estimator of the increment constant: (1/N) sum_l E||Pi(v^{l+1} - v^l)||^2.
inline DefectEstimate increment_constant(const EnsembleRecord& rec, int N) {
    if (N < 1 || N > rec.N) throw std::out_of_range("increment_constant: N exceeds steps run");
    std::vector<double> per_traj;
    per_traj.reserve(rec.L);
    for (const auto& td : rec.trajectories) {
        double s = 0.0;
        for (int l = 0; l < N; ++l) s += td.increment_l2_sq[l];
        per_traj.push_back(s / N);
    }
    double mean = 0.0;
    for (double d : per_traj) mean += d;
    mean /= rec.L;
    double var = 0.0;
    for (double d : per_traj) var += (d - mean) * (d - mean);
    var = rec.L > 1 ? var / (rec.L - 1) : 0.0;
    return {mean, std::sqrt(var / rec.L)};
}

struct FieldStatistics {
    Vector mean;  // full nodal layout (2 per P2 node)
    Vector sd;
};

// Pointwise-at-node mean and standard deviation of the final-step field.
inline FieldStatistics field_statistics(const EnsembleRecord& rec) {
    FieldStatistics fs;
    if (rec.trajectories.empty()) return fs;
    const auto n = rec.trajectories.front().final_full.size();
    fs.mean = Vector::Zero(n);
    fs.sd = Vector::Zero(n);
    for (const auto& td : rec.trajectories) fs.mean += td.final_full;
    fs.mean /= rec.L;
    if (rec.L > 1) {
        for (const auto& td : rec.trajectories) {
            const Vector d = td.final_full - fs.mean;
            fs.sd += d.cwiseProduct(d);
        }
        fs.sd = (fs.sd / (rec.L - 1)).cwiseSqrt();
    }
    return fs;
}

}  // namespace gstokes
