// CSV export and the reproducibility manifest.
#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>

#include "gstokes/config.hpp"
#include "gstokes/gd.hpp"
#include "gstokes/measures.hpp"
#include "gstokes/streamlines.hpp"

namespace gstokes {

inline constexpr const char* kCodeVersion = "0.1.0";

inline std::uint64_t fnv1a_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline void write_manifest(std::ostream& os, const ExperimentConfig& cfg) {
    const std::string canon = canonical_config(cfg);
    os << "config_hash=" << std::hex << fnv1a_hash(canon) << std::dec << "\n"
       << "master_seed=" << cfg.seed << "\n"
       << "code_version=" << kCodeVersion << "\n"
       << "mesh=" << cfg.nx << "x" << cfg.ny << " uniform triangulation of the unit square\n"
       << canon;
}

namespace detail {
inline void set_csv_format(std::ostream& os) { os << std::setprecision(17); }
}  // namespace detail

// energy series: one row per (trajectory, step)
inline void write_energy_csv(std::ostream& os, const EnsembleRecord& rec, double tau) {
    detail::set_csv_format(os);
    os << "l,n,t,E\n";
    for (std::size_t ell = 0; ell < rec.trajectories.size(); ++ell) {
        const auto& td = rec.trajectories[ell];
        for (std::size_t n = 0; n < td.energy.size(); ++n)
            os << (ell + 1) << ',' << n << ',' << n * tau << ',' << td.energy[n] << '\n';
    }
}

inline void write_point_csv(std::ostream& os, const EnsembleRecord& rec, int obs_index, double tau) {
    detail::set_csv_format(os);
    int off = 0;
    for (int i = 0; i < obs_index; ++i) off += rec.observable_dims[i];
    os << "l,n,t,ux,uy\n";
    for (std::size_t ell = 0; ell < rec.trajectories.size(); ++ell) {
        const auto& td = rec.trajectories[ell];
        for (std::size_t n = 0; n < td.integer_obs.size(); ++n)
            os << (ell + 1) << ',' << n << ',' << n * tau << ',' << td.integer_obs[n][off] << ','
               << td.integer_obs[n][off + 1] << '\n';
    }
}

inline void write_measure_csv(std::ostream& os, const OccupationMeasure& mu,
                              const std::string& observable) {
    detail::set_csv_format(os);
    os << "kind,observable,weight";
    const int dim = mu.samples.empty() ? 0 : static_cast<int>(mu.samples.front().size());
    for (int d = 0; d < dim; ++d) os << ",v" << d;
    os << '\n';
    const char* kind = mu.kind == MeasureKind::Integer ? "integer" : "shifted";
    for (const auto& s : mu.samples) {
        os << kind << ',' << observable << ',' << mu.weight;
        for (double v : s) os << ',' << v;
        os << '\n';
    }
}

inline void write_eoc_row(std::ostream& os, const std::string& experiment, double p, double tau,
                          double c_tau, double eoc) {
    detail::set_csv_format(os);
    os << experiment << ',' << p << ',' << tau << ',' << c_tau << ',' << eoc << '\n';
}

inline void write_field_csv(std::ostream& os, const GradientDiscretisation& gd, const Vector& full) {
    detail::set_csv_format(os);
    os << "x,y,u_x,u_y\n";
    for (int n = 0; n < gd.n_p2_nodes; ++n)
        os << gd.p2_coords[n].x << ',' << gd.p2_coords[n].y << ',' << full[2 * n] << ','
           << full[2 * n + 1] << '\n';
}

inline void write_field_stats_csv(std::ostream& os, const GradientDiscretisation& gd,
                                  const FieldStatistics& fs) {
    detail::set_csv_format(os);
    os << "x,y,mean_ux,mean_uy,sd_ux,sd_uy\n";
    for (int n = 0; n < gd.n_p2_nodes; ++n)
        os << gd.p2_coords[n].x << ',' << gd.p2_coords[n].y << ',' << fs.mean[2 * n] << ','
           << fs.mean[2 * n + 1] << ',' << fs.sd[2 * n] << ',' << fs.sd[2 * n + 1] << '\n';
}

inline void write_streamlines_csv(std::ostream& os, const std::vector<Streamline>& lines) {
    detail::set_csv_format(os);
    os << "seed,sample,x,y,speed\n";
    for (const auto& line : lines)
        for (std::size_t k = 0; k < line.samples.size(); ++k)
            os << line.seed_index << ',' << k << ',' << line.samples[k].position.x << ','
               << line.samples[k].position.y << ',' << line.samples[k].speed << '\n';
}

}  // namespace gstokes
