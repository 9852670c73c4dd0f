#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "vpnf/errors.hpp"
#include "vpnf/physics/medium.hpp"
#include "vpnf/roomsim/room.hpp"

namespace vpnf::roomsim {

// Regular lattice of count^3 receivers starting at origin.
struct GridSpec {
    Eigen::Vector3d origin = Eigen::Vector3d::Zero();
    double spacing = 0.05;
    int count = 21;

    std::size_t size() const { return static_cast<std::size_t>(count) * count * count; }
    // Index order: x outermost, z innermost.
    std::size_t index(int ix, int iy, int iz) const {
        return (static_cast<std::size_t>(ix) * count + iy) * count + iz;
    }
    Eigen::Vector3d position(int ix, int iy, int iz) const {
        return origin + spacing * Eigen::Vector3d(ix, iy, iz);
    }
    double extent() const { return spacing * (count - 1); }
    Eigen::Vector3d center() const { return origin + Eigen::Vector3d::Constant(0.5 * extent()); }
    bool operator==(const GridSpec&) const = default;
};

// The measurement lattice filling the room's target cube: 21^3 points at 5 cm by default.
inline GridSpec cube_grid(const RoomSpec& room, int count = 21) {
    GridSpec g;
    g.origin = room.cube_origin;
    g.count = count;
    g.spacing = room.cube_size / (count - 1);
    return g;
}

// Grid indices lying on the boundary of the lattice cube: count^3 - (count-2)^3 of them.
inline std::vector<std::size_t> surface_indices(const GridSpec& g) {
    std::vector<std::size_t> out;
    const int last = g.count - 1;
    for (int ix = 0; ix < g.count; ++ix)
        for (int iy = 0; iy < g.count; ++iy)
            for (int iz = 0; iz < g.count; ++iz)
                if (ix == 0 || iy == 0 || iz == 0 || ix == last || iy == last || iz == last)
                    out.push_back(g.index(ix, iy, iz));
    return out;
}

inline constexpr int kFracDelayTaps = 64;

// Taps of a Hann-windowed sinc pulse centred at `delay` samples, normalized to unit sum
// (unit DC gain). taps[k] belongs to sample first + k. For integer delays the pulse is a
// single unit sample.
struct FractionalDelay {
    long first = 0;
    std::array<double, kFracDelayTaps> taps{};

    explicit FractionalDelay(double delay) {
        constexpr int half = kFracDelayTaps / 2;
        const double base = std::floor(delay);
        const double frac = delay - base;
        first = static_cast<long>(base) - (half - 1);
        const double sin_frac = std::sin(std::numbers::pi * frac);
        double sum = 0.0;
        for (int m = -(half - 1), k = 0; m <= half; ++m, ++k) {
            const double x = m - frac;  // n - delay
            double sinc = 1.0;
            if (x != 0.0) {
                // sin(pi (m - frac)) = -(-1)^m sin(pi frac)
                sinc = ((m & 1) ? sin_frac : -sin_frac) / (std::numbers::pi * x);
            }
            taps[k] = sinc * 0.5 * (1.0 + std::cos(std::numbers::pi * x / half));
            sum += taps[k];
        }
        for (auto& t : taps) t /= sum;
    }

    // out[n] += gain * h[n] over the part of the pulse inside [0, length).
    void add_to(double* out, long length, double gain) const {
        for (int k = 0; k < kFracDelayTaps; ++k) {
            const long n = first + k;
            if (n >= 0 && n < length) out[n] += gain * taps[k];
        }
    }
};

// FOA impulse responses on a grid. rirs is position-major, then channel (W, X, Y, Z), then
// time sample; W is the pressure under SN3D.
struct FoaDataset {
    double fs = 8000.0;
    double duration = 0.1;
    int samples = 800;
    Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> positions;
    std::vector<float> rirs;
    physics::Medium medium;
    RoomSpec room;
    GridSpec grid;
    std::uint64_t seed = 0;

    std::size_t size() const { return static_cast<std::size_t>(positions.rows()); }
    const float* rir(std::size_t pos, int channel) const {
        return rirs.data() + (pos * 4 + static_cast<std::size_t>(channel)) * samples;
    }
    float* rir(std::size_t pos, int channel) {
        return rirs.data() + (pos * 4 + static_cast<std::size_t>(channel)) * samples;
    }
    double time(int l) const { return l / fs; }
    Eigen::Vector3d position(std::size_t i) const { return positions.row(static_cast<Eigen::Index>(i)).transpose(); }
};

// Four-channel response at one receiver. Each image contributes a delayed pulse of height
// amplitude / (4 pi d) to W and the same pulse times the unit vector receiver->image to
// (X, Y, Z) (far-field plane-wave encoding, v = p n).
inline Eigen::MatrixXd render_foa_rir(const Eigen::Vector3d& receiver, const std::vector<ImageSource>& images,
                                      double fs, int length, const physics::Medium& medium) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(length, 4);  // column per channel
    for (const auto& img : images) {
        const Eigen::Vector3d diff = img.position - receiver;
        const double d = diff.norm();
        if (d == 0.0) throw SimulationError("render_foa_rir: receiver coincides with an image source");
        const double delay = d / medium.sound_speed * fs;
        if (delay - kFracDelayTaps / 2 >= length) continue;
        const Eigen::Vector3d dir = diff / d;
        const double gain = img.amplitude / (4.0 * std::numbers::pi * d);
        const FractionalDelay pulse(delay);
        pulse.add_to(out.col(0).data(), length, gain);
        for (int a = 0; a < 3; ++a) pulse.add_to(out.col(1 + a).data(), length, gain * dir[a]);
    }
    return out;
}

// Renders every grid receiver of `room`. Deterministic: output depends only on the inputs.
inline FoaDataset build_dataset(const RoomSpec& room, const GridSpec& grid, double fs, double duration,
                                const physics::Medium& medium = {}) {
    medium.validate();
    if (!(fs > 0.0) || !(duration > 0.0)) throw ConfigurationError("build_dataset: fs and duration must be positive");
    FoaDataset ds;
    ds.fs = fs;
    ds.duration = duration;
    ds.samples = static_cast<int>(std::lround(fs * duration));
    ds.medium = medium;
    ds.room = room;
    ds.grid = grid;
    ds.seed = room.seed;
    const std::size_t n = grid.size();
    ds.positions.resize(static_cast<Eigen::Index>(n), 3);
    for (int ix = 0; ix < grid.count; ++ix)
        for (int iy = 0; iy < grid.count; ++iy)
            for (int iz = 0; iz < grid.count; ++iz)
                ds.positions.row(static_cast<Eigen::Index>(grid.index(ix, iy, iz))) = grid.position(ix, iy, iz).transpose();

    const auto images = image_sources(room, duration, medium);
    ds.rirs.assign(n * 4 * static_cast<std::size_t>(ds.samples), 0.0f);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::MatrixXd r = render_foa_rir(ds.position(i), images, fs, ds.samples, medium);
        for (int c = 0; c < 4; ++c) {
            float* dst = ds.rir(i, c);
            for (int l = 0; l < ds.samples; ++l) dst[l] = static_cast<float>(r(l, c));
        }
    }
    return ds;
}

}  // namespace vpnf::roomsim
