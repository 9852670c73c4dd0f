#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vpnf/errors.hpp"
#include "vpnf/physics/medium.hpp"
#include "vpnf/random.hpp"

namespace vpnf::roomsim {

// Wall order everywhere: x=0, x=Lx, y=0, y=Ly, z=0, z=Lz.
struct RoomSpec {
    Eigen::Vector3d dims = Eigen::Vector3d(6.0, 6.0, 3.0);
    std::array<double, 6> wall_absorption{0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
    Eigen::Vector3d source_pos = Eigen::Vector3d(1.0, 1.0, 1.5);
    Eigen::Vector3d cube_origin = Eigen::Vector3d(3.0, 3.0, 1.0);
    double cube_size = 1.0;
    std::uint64_t seed = 0;

    Eigen::Vector3d cube_center() const { return cube_origin + Eigen::Vector3d::Constant(0.5 * cube_size); }
    bool operator==(const RoomSpec&) const = default;
};

// Sampling ranges for sample_room.
struct RoomSampling {
    double horizontal_min = 5.0, horizontal_max = 8.0;  // Lx, Ly in [min, max)
    double height_min = 2.5, height_max = 4.5;          // Lz in [min, max)
    double absorption_min = 0.1, absorption_max = 0.9;
    double wall_buffer = 0.5;
    double cube_size = 1.0;
    // Minimum distance between the source and the target cube.
    double source_clearance = 0.25;
    int max_attempts = 10000;
    std::optional<Eigen::Vector3d> fixed_dims;
};

inline double distance_to_box(const Eigen::Vector3d& p, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    Eigen::Vector3d d = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    return d.norm();
}

// Checks the placement constraints: source and all of the cube lie inside the room
// shrunk by the wall buffer, and the source is outside the cube.
inline bool placement_valid(const RoomSpec& r, double buffer, double clearance = 0.0) {
    for (int a = 0; a < 3; ++a) {
        const double lo = buffer, hi = r.dims[a] - buffer;
        if (r.source_pos[a] < lo || r.source_pos[a] > hi) return false;
        if (r.cube_origin[a] < lo || r.cube_origin[a] + r.cube_size > hi) return false;
    }
    const Eigen::Vector3d hi = r.cube_origin + Eigen::Vector3d::Constant(r.cube_size);
    const double d = distance_to_box(r.source_pos, r.cube_origin, hi);
    return d > clearance || (clearance == 0.0 && d > 0.0);
}

// Random shoebox room with frequency-independent wall absorption, a target cube, and a source.
inline RoomSpec sample_room(std::uint64_t seed, const RoomSampling& cfg = {}) {
    Rng rng(seed);
    RoomSpec r;
    r.seed = seed;
    r.cube_size = cfg.cube_size;
    if (cfg.fixed_dims) {
        r.dims = *cfg.fixed_dims;
    } else {
        r.dims[0] = rng.uniform(cfg.horizontal_min, cfg.horizontal_max);
        r.dims[1] = rng.uniform(cfg.horizontal_min, cfg.horizontal_max);
        r.dims[2] = rng.uniform(cfg.height_min, cfg.height_max);
    }
    for (auto& a : r.wall_absorption) a = rng.uniform(cfg.absorption_min, cfg.absorption_max);

    const double b = cfg.wall_buffer;
    for (int a = 0; a < 3; ++a)
        if (r.dims[a] - 2.0 * b < cfg.cube_size)
            throw ConfigurationError("sample_room: room too small for the cube and wall buffer");
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        for (int a = 0; a < 3; ++a) {
            r.cube_origin[a] = rng.uniform(b, r.dims[a] - b - cfg.cube_size);
            r.source_pos[a] = rng.uniform(b, r.dims[a] - b);
        }
        if (placement_valid(r, b, cfg.source_clearance)) return r;
    }
    throw ConfigurationError("sample_room: no valid source/cube placement after " +
                             std::to_string(cfg.max_attempts) + " attempts (room too small)");
}

struct ImageSource {
    Eigen::Vector3d position;
    double amplitude;  // product of wall reflection coefficients, before 1/(4 pi d)
};

// Mirror image sources of a shoebox room (Allen-Berkley enumeration). Along each axis an
// image is indexed by (n, q): coordinate (1 - 2q) s + 2 n L, with |n - q| reflections on
// the lower wall and |n| on the upper wall. Reflection coefficient per wall sqrt(1 - alpha).
// Keeps every image whose distance to the nearest point of the target cube is within
// c0 * horizon, and drops images with zero amplitude. The direct source is always kept.
inline std::vector<ImageSource> image_sources(const RoomSpec& room, double horizon, const physics::Medium& medium) {
    if (!(horizon > 0.0)) throw ConfigurationError("image_sources: horizon must be positive");
    const double radius = medium.sound_speed * horizon;
    const Eigen::Vector3d lo = room.cube_origin;
    const Eigen::Vector3d hi = room.cube_origin + Eigen::Vector3d::Constant(room.cube_size);
    std::array<double, 6> beta;
    for (int w = 0; w < 6; ++w) beta[w] = std::sqrt(std::max(0.0, 1.0 - room.wall_absorption[w]));

    struct AxisImage {
        double coord;
        double gain;
        double gap;  // distance from the coordinate to the cube's extent on this axis
        bool direct;
    };
    std::array<std::vector<AxisImage>, 3> axes;
    for (int a = 0; a < 3; ++a) {
        const double L = room.dims[a], s = room.source_pos[a];
        const int nmax = static_cast<int>(std::ceil((radius + 2.0 * L) / (2.0 * L))) + 1;
        for (int n = -nmax; n <= nmax; ++n)
            for (int q = 0; q <= 1; ++q) {
                const double x = (1 - 2 * q) * s + 2.0 * n * L;
                const double gap = std::max({0.0, lo[a] - x, x - hi[a]});
                const bool direct = n == 0 && q == 0;
                if (gap > radius && !direct) continue;
                const double g = std::pow(beta[2 * a], std::abs(n - q)) * std::pow(beta[2 * a + 1], std::abs(n));
                if (g == 0.0) continue;
                axes[a].push_back({x, g, gap, direct});
            }
    }
    std::vector<ImageSource> out;
    const double r2 = radius * radius;
    for (const auto& ix : axes[0])
        for (const auto& iy : axes[1]) {
            const double dxy = ix.gap * ix.gap + iy.gap * iy.gap;
            if (dxy > r2 && !(ix.direct && iy.direct)) continue;
            for (const auto& iz : axes[2]) {
                const bool direct = ix.direct && iy.direct && iz.direct;
                if (dxy + iz.gap * iz.gap > r2 && !direct) continue;
                out.push_back({Eigen::Vector3d(ix.coord, iy.coord, iz.coord), ix.gain * iy.gain * iz.gain});
            }
        }
    return out;
}

}  // namespace vpnf::roomsim
