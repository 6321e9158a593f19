// RK4 particle advection through a reconstructed velocity field.
#pragma once

#include <vector>

#include "gstokes/gd.hpp"

namespace gstokes {

struct StreamlineSample {
    Vec2 position;
    double speed = 0.0;
};

struct Streamline {
    int seed_index = -1;
    std::vector<StreamlineSample> samples;
};

struct StreamlineConfig {
    double step = 1e-3;      // advection time step
    long max_steps = 100000; // hard cap per particle
};

// Seeds on both diagonals plus a horizontal and a vertical line through
// (0.5, 0.75); count per line, endpoints strictly inside the domain.
inline std::vector<Vec2> default_seed_lines(int per_line = 100) {
    std::vector<Vec2> seeds;
    seeds.reserve(4 * per_line);
    for (int k = 0; k < per_line; ++k) {
        const double s = (k + 1.0) / (per_line + 1.0);  // in (0,1)
        seeds.push_back({s, s});                        // main diagonal
        seeds.push_back({s, 1.0 - s});                  // anti-diagonal
        seeds.push_back({s, 0.75});                     // horizontal through (0.5,0.75)
        seeds.push_back({0.5, s});                      // vertical through (0.5,0.75)
    }
    return seeds;
}

namespace detail {
inline bool inside_unit_square(Vec2 p) {
    return p.x >= 0.0 && p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0;
}
}  // namespace detail

template <class View>
std::vector<Streamline> trace_streamlines(const GradientDiscretisation& gd, View field,
                                          const std::vector<Vec2>& seeds,
                                          const StreamlineConfig& cfg = {}) {
    std::vector<Streamline> lines;
    lines.reserve(seeds.size());
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        if (!detail::inside_unit_square(seeds[s])) continue;  // skipped with warning by the caller
        Streamline line;
        line.seed_index = static_cast<int>(s);
        Vec2 p = seeds[s];
        Vec2 u = velocity_value(gd, field, p);
        line.samples.push_back({p, norm(u)});
        for (long step = 0; step < cfg.max_steps; ++step) {
            const double h = cfg.step;
            const Vec2 k1 = velocity_value(gd, field, p);
            const Vec2 p2 = p + (0.5 * h) * k1;
            if (!detail::inside_unit_square(p2)) break;
            const Vec2 k2 = velocity_value(gd, field, p2);
            const Vec2 p3 = p + (0.5 * h) * k2;
            if (!detail::inside_unit_square(p3)) break;
            const Vec2 k3 = velocity_value(gd, field, p3);
            const Vec2 p4 = p + h * k3;
            if (!detail::inside_unit_square(p4)) break;
            const Vec2 k4 = velocity_value(gd, field, p4);
            const Vec2 pn = p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!detail::inside_unit_square(pn)) break;
            p = pn;
            u = velocity_value(gd, field, p);
            line.samples.push_back({p, norm(u)});
            if (norm(u) * h < 1e-15) break;  // stagnant particle
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

}  // namespace gstokes
