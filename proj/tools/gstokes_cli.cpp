// Command-line driver: trajectory and ensemble simulation, occupation-measure
// statistics, step-size studies, streamlines, and discretisation diagnostics.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gstokes/csv.hpp"
#include "gstokes/gd_constants.hpp"

namespace fs = std::filesystem;
using namespace gstokes;

namespace {

struct Problem {
    GradientDiscretisation gd;
    AssembledForms forms;
    Vector init_load;
    StepperConfig stepper;
};

Problem build_problem(const ExperimentConfig& cfg) {
    const auto fields = preset_fields(cfg.preset);
    Problem pr{make_taylor_hood(build_uniform(cfg.nx, cfg.ny)), {}, {}, {}};
    std::optional<Vector> g_full;
    if (!fields.g.is_zero()) g_full = interpolate(pr.gd, fields.g);
    pr.forms = assemble_static(pr.gd, fields.sigma, g_full, fields.F);
    pr.init_load = load_vector(pr.gd, fields.v_in);
    pr.stepper.tau = cfg.tau;
    pr.stepper.N = cfg.steps();
    pr.stepper.rheology = RheologyParams(cfg.p, cfg.kappa);
    return pr;
}

EnsembleConfig ensemble_config(const ExperimentConfig& cfg, const Problem& pr) {
    EnsembleConfig ec;
    ec.L = cfg.samples;
    ec.master_seed = cfg.seed;
    ec.stepper = pr.stepper;
    ec.threads = cfg.threads;
    ec.stochastic = cfg.stochastic;
    return ec;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    std::ofstream os(dir / name);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
}

fs::path prepare_out_dir(const ExperimentConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    auto m = open_out(dir, "manifest.txt");
    write_manifest(m, cfg);
    return dir;
}

// Shared experiment flags; values land in cfg when the subcommand runs.
void add_common_options(CLI::App* cmd, ExperimentConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "key = value configuration file, read first");
    cmd->add_option("--preset", [&cfg](const std::vector<std::string>& v) {
        if (v[0] == "exp1") cfg.preset = Preset::Exp1;
        else if (v[0] == "exp2") cfg.preset = Preset::Exp2;
        else if (v[0] == "custom") cfg.preset = Preset::Custom;
        else return false;
        return true;
    }, "experiment preset: exp1 (interior vortex), exp2 (leaky lid)");
    cmd->add_option("--mesh", [&cfg](const std::vector<std::string>& v) {
        cfg.nx = cfg.ny = std::stoi(v[0]);
        return true;
    }, "vertices per side of the uniform grid");
    cmd->add_option("--p", cfg.p, "power-law exponent");
    cmd->add_option("--kappa", cfg.kappa, "stress regularisation");
    cmd->add_option("--tau", cfg.tau, "time step");
    cmd->add_option("--horizon", cfg.horizon, "final time T (N = T / tau)");
    cmd->add_option("--samples", cfg.samples, "number of trajectories L");
    cmd->add_option("--seed", cfg.seed, "master seed");
    cmd->add_option("--threads", cfg.threads, "worker threads for ensembles");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--profile", cfg.profile, "resolution profile: desk or paper");
    cmd->add_flag_callback("--deterministic", [&cfg] { cfg.stochastic = false; },
                           "zero all noise increments");
}

ExperimentConfig finalize(ExperimentConfig cfg, const std::string& config_path,
                          CLI::App* cmd = nullptr) {
    (void)cmd;
    if (!config_path.empty()) {
        // file first, command line wins: file values fill fields still at default
        ExperimentConfig from_file = load_config(config_path);
        ExperimentConfig defaults;
        auto pick = [](auto& dst, const auto& cli, const auto& def, const auto& file) {
            if (cli == def) dst = file;
        };
        ExperimentConfig merged = cfg;
        pick(merged.preset, cfg.preset, defaults.preset, from_file.preset);
        pick(merged.nx, cfg.nx, defaults.nx, from_file.nx);
        pick(merged.ny, cfg.ny, defaults.ny, from_file.ny);
        pick(merged.p, cfg.p, defaults.p, from_file.p);
        pick(merged.kappa, cfg.kappa, defaults.kappa, from_file.kappa);
        pick(merged.tau, cfg.tau, defaults.tau, from_file.tau);
        pick(merged.horizon, cfg.horizon, defaults.horizon, from_file.horizon);
        pick(merged.samples, cfg.samples, defaults.samples, from_file.samples);
        pick(merged.seed, cfg.seed, defaults.seed, from_file.seed);
        pick(merged.stochastic, cfg.stochastic, defaults.stochastic, from_file.stochastic);
        pick(merged.threads, cfg.threads, defaults.threads, from_file.threads);
        pick(merged.out_dir, cfg.out_dir, defaults.out_dir, from_file.out_dir);
        pick(merged.profile, cfg.profile, defaults.profile, from_file.profile);
        cfg = merged;
    }
    cfg.apply_profile();
    cfg.validate();
    return cfg;
}

int cmd_simulate(const ExperimentConfig& cfg) {
    const auto dir = prepare_out_dir(cfg);
    const auto pr = build_problem(cfg);
    ExperimentConfig one = cfg;
    one.samples = 1;
    auto ec = ensemble_config(one, pr);
    const auto rec = run_ensemble(pr.gd, pr.forms, ec, pr.init_load,
                                  {kinetic_energy_observable(), point_velocity_observable()});
    auto e = open_out(dir, "energy.csv");
    write_energy_csv(e, rec, cfg.tau);
    auto p = open_out(dir, "point.csv");
    write_point_csv(p, rec, 1, cfg.tau);
    auto f = open_out(dir, "field.csv");
    write_field_csv(f, pr.gd, rec.trajectories[0].final_full);
    auto vtx = open_out(dir, "mesh_vertices.csv");
    auto tri = open_out(dir, "mesh_triangles.csv");
    export_mesh_csv(pr.gd.mesh, vtx, tri);
    std::cout << "trajectory finished: N = " << pr.stepper.N
              << ", final energy = " << rec.trajectories[0].energy.back() << "\n"
              << "wrote " << dir.string() << "\n";
    return 0;
}

int cmd_ensemble(const ExperimentConfig& cfg) {
    const auto dir = prepare_out_dir(cfg);
    const auto pr = build_problem(cfg);
    const auto ec = ensemble_config(cfg, pr);
    const auto rec = run_ensemble(pr.gd, pr.forms, ec, pr.init_load,
                                  {kinetic_energy_observable(), point_velocity_observable()});
    auto e = open_out(dir, "energy.csv");
    write_energy_csv(e, rec, cfg.tau);
    auto p = open_out(dir, "point.csv");
    write_point_csv(p, rec, 1, cfg.tau);
    const auto mu_int = occupation_measure(rec, MeasureKind::Integer, 0, rec.N);
    auto mi = open_out(dir, "measure_integer.csv");
    write_measure_csv(mi, mu_int, "energy");
    const auto mu_shift = occupation_measure(rec, MeasureKind::Shifted, 0, rec.N);
    auto ms = open_out(dir, "measure_shifted.csv");
    write_measure_csv(ms, mu_shift, "energy");
    const auto fs_stats = field_statistics(rec);
    auto fsout = open_out(dir, "field_stats.csv");
    write_field_stats_csv(fsout, pr.gd, fs_stats);
    std::cout << "ensemble finished: L = " << rec.L << ", N = " << rec.N << "\n"
              << "wrote " << dir.string() << "\n";
    return 0;
}

int cmd_stats(const ExperimentConfig& cfg, const std::vector<int>& shifts) {
    const auto dir = prepare_out_dir(cfg);
    const auto pr = build_problem(cfg);
    const auto ec = ensemble_config(cfg, pr);
    const auto rec = run_ensemble(pr.gd, pr.forms, ec, pr.init_load, {bounded_test_observable()});
    const int n_avg = rec.N / 2;
    auto os = open_out(dir, "stats.csv");
    os << std::setprecision(17) << "quantity,n,value,standard_error\n";
    for (int n : shifts) {
        if (n + n_avg > rec.N) {
            std::cerr << "skipping shift n = " << n << ": needs " << (n + n_avg)
                      << " steps, ran " << rec.N << "\n";
            continue;
        }
        const auto d = invariance_defect(rec, 0, n, n_avg);
        os << "invariance_defect," << n << ',' << d.defect << ',' << d.standard_error << '\n';
        std::cout << "defect(n=" << n << ", N=" << n_avg << ") = " << d.defect
                  << " (SE " << d.standard_error << ")\n";
    }
    const auto c = increment_constant(rec, rec.N);
    os << "increment_constant,0," << c.defect << ',' << c.standard_error << '\n';
    std::cout << "increment constant = " << c.defect << " (SE " << c.standard_error << ")\n"
              << "wrote " << dir.string() << "\n";
    return 0;
}

int cmd_eoc(const ExperimentConfig& cfg, int levels) {
    const auto dir = prepare_out_dir(cfg);
    const auto base = build_problem(cfg);
    auto os = open_out(dir, "eoc.csv");
    os << "experiment,p,tau,c_tau,eoc\n";
    const std::string name = cfg.preset == Preset::Exp1   ? "exp1"
                             : cfg.preset == Preset::Exp2 ? "exp2"
                                                          : "custom";
    double prev_c = 0.0;
    for (int level = 0; level < levels; ++level) {
        ExperimentConfig run = cfg;
        run.tau = cfg.tau / (1 << level);
        const auto pr = build_problem(run);
        const auto ec = ensemble_config(run, pr);
        const auto rec = run_ensemble(pr.gd, pr.forms, ec, pr.init_load, {});
        const double c = increment_constant(rec, rec.N).defect;
        const double eoc = level == 0 ? std::nan("") : std::log2(prev_c / c);
        write_eoc_row(os, name, run.p, run.tau, c, eoc);
        std::cout << "tau = " << run.tau << ": c = " << c;
        if (level > 0) std::cout << ", EOC = " << eoc;
        std::cout << "\n";
        prev_c = c;
    }
    std::cout << "wrote " << dir.string() << "\n";
    return 0;
}

int cmd_streamlines(const ExperimentConfig& cfg, int per_line, double step) {
    const auto dir = prepare_out_dir(cfg);
    const auto pr = build_problem(cfg);
    ExperimentConfig one = cfg;
    one.samples = 1;
    const auto ec = ensemble_config(one, pr);
    const auto rec = run_ensemble(pr.gd, pr.forms, ec, pr.init_load, {});
    const Vector& full = rec.trajectories[0].final_full;

    StreamlineConfig sc;
    sc.step = step;
    const auto seeds = default_seed_lines(per_line);
    const auto lines = trace_streamlines(pr.gd, FullView{full}, seeds, sc);
    auto os = open_out(dir, "streamlines.csv");
    write_streamlines_csv(os, lines);
    auto f = open_out(dir, "field.csv");
    write_field_csv(f, pr.gd, full);
    std::cout << "traced " << lines.size() << " streamlines from " << seeds.size() << " seeds\n"
              << "wrote " << dir.string() << "\n";
    return 0;
}

int cmd_constants(const ExperimentConfig& cfg, bool with_out) {
    const auto gd = make_taylor_hood(build_uniform(cfg.nx, cfg.ny));
    const auto c = estimate_constants_p2(gd);
    std::cout << std::setprecision(10) << "mesh " << cfg.nx << "x" << cfg.ny << "\n"
              << "coercivity C_D(2)       = " << c.coercivity << "\n"
              << "inf-sup beta_D(2)       = " << c.inf_sup << "\n"
              << "inverse estimate B_D(2) = " << c.inverse_estimate << "\n";
    if (with_out) {
        const auto dir = prepare_out_dir(cfg);
        auto os = open_out(dir, "constants.csv");
        os << std::setprecision(17) << "nx,ny,coercivity,inf_sup,inverse_estimate\n"
           << cfg.nx << ',' << cfg.ny << ',' << c.coercivity << ',' << c.inf_sup << ','
           << c.inverse_estimate << '\n';
        std::cout << "wrote " << dir.string() << "\n";
    }
    return 0;
}

int cmd_validate(const ExperimentConfig& cfg) {
    std::cout << canonical_config(cfg) << "config_hash=" << std::hex
              << fnv1a_hash(canonical_config(cfg)) << std::dec << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic power-law Stokes simulator on the unit square"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* cmd = nullptr;
        ExperimentConfig cfg;
        std::string config_path;
    };
    Sub simulate, ensemble, stats, eoc, streamlines, constants, validate;
    simulate.cmd = app.add_subcommand("simulate", "run a single trajectory and dump its series");
    ensemble.cmd = app.add_subcommand("ensemble", "run L trajectories and export measures");
    stats.cmd = app.add_subcommand("stats", "invariance defect and increment constant");
    eoc.cmd = app.add_subcommand("eoc", "increment constant across halved time steps");
    streamlines.cmd = app.add_subcommand("streamlines", "advect particles through the final field");
    constants.cmd = app.add_subcommand("constants", "discrete coercivity / inf-sup / inverse constants");
    validate.cmd = app.add_subcommand("validate", "check a configuration and print its hash");
    for (Sub* s : {&simulate, &ensemble, &stats, &eoc, &streamlines, &constants, &validate})
        add_common_options(s->cmd, s->cfg, s->config_path);

    std::vector<int> shifts{1, 4, 16};
    stats.cmd->add_option("--shifts", shifts, "semigroup shifts n for the defect estimate");
    int levels = 3;
    eoc.cmd->add_option("--levels", levels, "number of tau halvings (starting at --tau)")
        ->check(CLI::Range(2, 10));
    int per_line = 100;
    double sl_step = 1e-3;
    streamlines.cmd->add_option("--seeds-per-line", per_line, "seed count per seeding line");
    streamlines.cmd->add_option("--step", sl_step, "advection step size");
    bool constants_out = false;
    constants.cmd->add_flag("--write", constants_out, "also write constants.csv to --out");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate.cmd->parsed())
            return cmd_simulate(finalize(simulate.cfg, simulate.config_path, simulate.cmd));
        if (ensemble.cmd->parsed())
            return cmd_ensemble(finalize(ensemble.cfg, ensemble.config_path, ensemble.cmd));
        if (stats.cmd->parsed())
            return cmd_stats(finalize(stats.cfg, stats.config_path, stats.cmd), shifts);
        if (eoc.cmd->parsed()) return cmd_eoc(finalize(eoc.cfg, eoc.config_path, eoc.cmd), levels);
        if (streamlines.cmd->parsed())
            return cmd_streamlines(finalize(streamlines.cfg, streamlines.config_path, streamlines.cmd),
                                   per_line, sl_step);
        if (constants.cmd->parsed())
            return cmd_constants(finalize(constants.cfg, constants.config_path, constants.cmd),
                                 constants_out);
        if (validate.cmd->parsed())
            return cmd_validate(finalize(validate.cfg, validate.config_path, validate.cmd));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
