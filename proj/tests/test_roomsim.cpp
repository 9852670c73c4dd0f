#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "vpnf/roomsim/dataset.hpp"
#include "vpnf/roomsim/room.hpp"

using namespace vpnf;
using namespace vpnf::roomsim;

namespace {

constexpr double kPi = std::numbers::pi;

bool room_invariants_hold(const RoomSpec& r) {
    const RoomSampling cfg;
    for (int a = 0; a < 3; ++a) {
        if (r.source_pos[a] < cfg.wall_buffer || r.source_pos[a] > r.dims[a] - cfg.wall_buffer) return false;
        if (r.cube_origin[a] < cfg.wall_buffer || r.cube_origin[a] + r.cube_size > r.dims[a] - cfg.wall_buffer)
            return false;
    }
    const Eigen::Vector3d hi = r.cube_origin + Eigen::Vector3d::Constant(r.cube_size);
    return distance_to_box(r.source_pos, r.cube_origin, hi) > 0.0;
}

// Single image at `source` seen from `receiver`.
Eigen::MatrixXd free_field(const Eigen::Vector3d& receiver, const Eigen::Vector3d& source, double fs, int length,
                           const physics::Medium& medium = {}) {
    return render_foa_rir(receiver, {{source, 1.0}}, fs, length, medium);
}

}  // namespace

TEST(SampleRoom, DeterministicPerSeed) {
    EXPECT_EQ(sample_room(42), sample_room(42));
    EXPECT_FALSE(sample_room(42) == sample_room(43));
}

TEST(SampleRoom, ThousandRoomsSatisfyConstraints) {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const RoomSpec r = sample_room(seed);
        ASSERT_TRUE(room_invariants_hold(r)) << "seed " << seed;
        EXPECT_GE(r.dims[0], 5.0);
        EXPECT_LT(r.dims[0], 8.0);
        EXPECT_GE(r.dims[1], 5.0);
        EXPECT_LT(r.dims[1], 8.0);
        EXPECT_GE(r.dims[2], 2.5);
        EXPECT_LT(r.dims[2], 4.5);
        for (double a : r.wall_absorption) {
            EXPECT_GE(a, 0.1);
            EXPECT_LT(a, 0.9);
        }
        EXPECT_EQ(r.seed, seed);
        EXPECT_EQ(r.cube_size, 1.0);
    }
}

TEST(SampleRoom, SmallestRoomIsFeasible) {
    RoomSampling cfg;
    cfg.fixed_dims = Eigen::Vector3d(5.0, 5.0, 2.5);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const RoomSpec r = sample_room(seed, cfg);
        EXPECT_TRUE(room_invariants_hold(r));
        EXPECT_LE(r.cube_origin[0], 3.5);
    }
}

TEST(SampleRoom, TooSmallRoomFails) {
    RoomSampling cfg;
    cfg.fixed_dims = Eigen::Vector3d(1.8, 5.0, 3.0);
    EXPECT_THROW(sample_room(1, cfg), ConfigurationError);
    // Cube fits but the source never can: a 2.0 m room leaves no space outside the cube.
    cfg.fixed_dims = Eigen::Vector3d(2.0, 2.0, 2.0);
    cfg.max_attempts = 200;
    EXPECT_THROW(sample_room(1, cfg), ConfigurationError);
}

TEST(ImageSources, FullAbsorptionLeavesDirectSound) {
    RoomSpec r = sample_room(3);
    r.wall_absorption.fill(1.0);
    const auto images = image_sources(r, 0.1, {});
    ASSERT_EQ(images.size(), 1u);
    EXPECT_EQ(images[0].position, r.source_pos);
    EXPECT_EQ(images[0].amplitude, 1.0);
}

TEST(ImageSources, TinyHorizonLeavesDirectSound) {
    RoomSpec r = sample_room(4);
    r.source_pos = r.cube_origin - Eigen::Vector3d(1.0, 0.0, 0.0);
    r.source_pos[1] += 0.5;
    r.source_pos[2] += 0.5;
    const auto images = image_sources(r, 1e-9, {});
    ASSERT_EQ(images.size(), 1u);
    EXPECT_EQ(images[0].position, r.source_pos);
    EXPECT_THROW(image_sources(r, 0.0, {}), ConfigurationError);
}

TEST(ImageSources, CorridorMatchesBruteForceMirroring) {
    // Only the x walls reflect, so every image lies on the source's (y, z) line.
    RoomSpec r;
    r.dims = Eigen::Vector3d(6.3, 5.0, 3.0);
    r.wall_absorption = {0.36, 0.19, 1.0, 1.0, 1.0, 1.0};
    r.source_pos = Eigen::Vector3d(1.7, 2.0, 1.4);
    r.cube_origin = Eigen::Vector3d(3.5, 1.5, 1.0);
    const double horizon = 0.1;
    const physics::Medium medium;
    const double radius = medium.sound_speed * horizon;
    const double b0 = std::sqrt(1.0 - 0.36), b1 = std::sqrt(1.0 - 0.19);

    // Mirror repeatedly in the two walls (never the same wall twice in a row).
    std::map<long long, double> brute;  // coordinate in micrometers -> gain
    struct Node {
        double x, gain;
        int last, order;
    };
    std::vector<Node> frontier{{r.source_pos[0], 1.0, -1, 0}};
    brute[std::llround(r.source_pos[0] * 1e6)] = 1.0;
    while (!frontier.empty()) {
        Node n = frontier.back();
        frontier.pop_back();
        if (n.order == 20) continue;
        for (int wall = 0; wall < 2; ++wall) {
            if (wall == n.last) continue;
            const double x = wall == 0 ? -n.x : 2.0 * r.dims[0] - n.x;
            const Node child{x, n.gain * (wall == 0 ? b0 : b1), wall, n.order + 1};
            brute[std::llround(x * 1e6)] = child.gain;
            frontier.push_back(child);
        }
    }
    std::map<long long, double> expected;
    for (const auto& [key, gain] : brute) {
        const double x = key * 1e-6;
        const double gap = std::max({0.0, r.cube_origin[0] - x, x - (r.cube_origin[0] + 1.0)});
        if (gap <= radius) expected[key] = gain;
    }
    std::map<long long, double> got;
    for (const auto& img : image_sources(r, horizon, medium)) {
        EXPECT_EQ(img.position[1], r.source_pos[1]);
        EXPECT_EQ(img.position[2], r.source_pos[2]);
        got[std::llround(img.position[0] * 1e6)] = img.amplitude;
    }
    ASSERT_EQ(got.size(), expected.size());
    for (const auto& [key, gain] : expected) {
        ASSERT_TRUE(got.count(key)) << "missing image at x = " << key * 1e-6;
        EXPECT_NEAR(got[key], gain, 1e-12);
    }
}

TEST(ImageSources, AllImagesWithinHorizonAreKept) {
    const RoomSpec r = sample_room(9);
    const physics::Medium medium;
    const double horizon = 0.05, radius = medium.sound_speed * horizon;
    const auto images = image_sources(r, horizon, medium);
    const Eigen::Vector3d hi = r.cube_origin + Eigen::Vector3d::Constant(r.cube_size);
    std::set<std::tuple<long long, long long, long long>> seen;
    for (const auto& img : images) {
        EXPECT_LE(distance_to_box(img.position, r.cube_origin, hi), radius + 1e-9);
        EXPECT_GT(img.amplitude, 0.0);
        EXPECT_LE(img.amplitude, 1.0);
        seen.insert({std::llround(img.position[0] * 1e6), std::llround(img.position[1] * 1e6),
                     std::llround(img.position[2] * 1e6)});
    }
    EXPECT_EQ(seen.size(), images.size());
    // Brute-force count over small index ranges.
    std::size_t count = 0;
    for (int nx = -10; nx <= 10; ++nx)
        for (int qx = 0; qx <= 1; ++qx)
            for (int ny = -10; ny <= 10; ++ny)
                for (int qy = 0; qy <= 1; ++qy)
                    for (int nz = -14; nz <= 14; ++nz)
                        for (int qz = 0; qz <= 1; ++qz) {
                            const Eigen::Vector3d p((1 - 2 * qx) * r.source_pos[0] + 2 * nx * r.dims[0],
                                                    (1 - 2 * qy) * r.source_pos[1] + 2 * ny * r.dims[1],
                                                    (1 - 2 * qz) * r.source_pos[2] + 2 * nz * r.dims[2]);
                            if (distance_to_box(p, r.cube_origin, hi) <= radius) ++count;
                        }
    EXPECT_EQ(images.size(), count);
}

TEST(FractionalDelay, UnitSumAndIntegerDelayIsImpulse) {
    for (double d : {10.0, 10.25, 10.5, 33.9}) {
        const FractionalDelay f(d);
        double sum = 0.0;
        for (double t : f.taps) sum += t;
        EXPECT_NEAR(sum, 1.0, 1e-14);
    }
    const FractionalDelay f(40.0);
    for (int k = 0; k < kFracDelayTaps; ++k) {
        if (f.first + k == 40) EXPECT_EQ(f.taps[k], 1.0);
        else EXPECT_EQ(f.taps[k], 0.0);
    }
}

TEST(RenderFoaRir, FreeFieldAlignedPeak) {
    const physics::Medium medium{1.2, 400.0};  // 1 m is exactly 20 samples at 8 kHz
    const Eigen::MatrixXd rir = free_field(Eigen::Vector3d::Zero(), Eigen::Vector3d(1.0, 0.0, 0.0), 8000.0, 100, medium);
    Eigen::Index peak;
    rir.col(0).maxCoeff(&peak);
    EXPECT_EQ(peak, 20);
    EXPECT_NEAR(rir(20, 0), 1.0 / (4.0 * kPi), 1e-15);
    EXPECT_NEAR(1.0 / (4.0 * kPi), 0.07958, 1e-5);
}

TEST(RenderFoaRir, AxisAlignedDirection) {
    const Eigen::MatrixXd rir = free_field(Eigen::Vector3d(1.0, 1.0, 1.0), Eigen::Vector3d(2.7, 1.0, 1.0), 8000.0, 200);
    const double on = rir.col(1).cwiseAbs().maxCoeff();
    EXPECT_GT(on, 0.0);
    EXPECT_LE((rir.col(1) - rir.col(0)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE(rir.col(2).cwiseAbs().maxCoeff(), 1e-12 * on);
    EXPECT_LE(rir.col(3).cwiseAbs().maxCoeff(), 1e-12 * on);
    // Source behind (-x) flips the sign of X.
    const Eigen::MatrixXd back = free_field(Eigen::Vector3d(1.0, 1.0, 1.0), Eigen::Vector3d(-0.7, 1.0, 1.0), 8000.0, 200);
    EXPECT_LE((back.col(1) + back.col(0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RenderFoaRir, PulseDirectionIsUnitVectorTowardImage) {
    const Eigen::Vector3d rec(0.3, 0.2, 0.1), src(2.1, -1.3, 0.9);
    const Eigen::Vector3d n = (src - rec).normalized();
    const Eigen::MatrixXd rir = free_field(rec, src, 8000.0, 200);
    Eigen::Index peak;
    rir.col(0).cwiseAbs().maxCoeff(&peak);
    const Eigen::Vector3d dir = rir.row(peak).tail<3>().transpose() / rir(peak, 0);
    EXPECT_LE((dir - n).norm(), 1e-9);
}

TEST(RenderFoaRir, AmplitudeAndArrivalTime) {
    const physics::Medium medium;
    const double fs = 8000.0;
    for (double d : {0.6, 1.0, 1.37, 2.91}) {
        const Eigen::MatrixXd rir = free_field(Eigen::Vector3d::Zero(), Eigen::Vector3d(0.0, d, 0.0), fs, 200);
        const double sum = rir.col(0).sum();
        EXPECT_NEAR(sum / (1.0 / (4.0 * kPi * d)), 1.0, 0.01);
        double first_moment = 0.0;
        for (Eigen::Index n = 0; n < rir.rows(); ++n) first_moment += n * rir(n, 0);
        EXPECT_NEAR(first_moment / sum, d / medium.sound_speed * fs, 0.5);
    }
}

TEST(RenderFoaRir, EnergyFollowsInverseSquareLaw) {
    const double d1 = 0.8, d2 = 2.3;
    const Eigen::MatrixXd a = free_field(Eigen::Vector3d::Zero(), Eigen::Vector3d(d1, 0, 0), 8000.0, 200);
    const Eigen::MatrixXd b = free_field(Eigen::Vector3d::Zero(), Eigen::Vector3d(d2, 0, 0), 8000.0, 200);
    const double ratio = a.col(0).squaredNorm() / b.col(0).squaredNorm();
    EXPECT_NEAR(ratio / ((d2 / d1) * (d2 / d1)), 1.0, 0.01);
}

TEST(RenderFoaRir, CoincidentImageIsAnError) {
    EXPECT_THROW(free_field(Eigen::Vector3d(1, 2, 3), Eigen::Vector3d(1, 2, 3), 8000.0, 50), SimulationError);
}

TEST(Grid, CountsAndOrdering) {
    const RoomSpec r = sample_room(5);
    const GridSpec g = cube_grid(r);
    EXPECT_EQ(g.size(), 9261u);
    EXPECT_DOUBLE_EQ(g.spacing, 0.05);
    EXPECT_EQ(surface_indices(g).size(), 2402u);
    EXPECT_EQ(g.index(1, 0, 0), 441u);
    EXPECT_EQ(g.index(0, 0, 1), 1u);
    EXPECT_LE((g.position(20, 20, 20) - (r.cube_origin + Eigen::Vector3d::Constant(1.0))).norm(), 1e-12);
}

TEST(BuildDataset, DefaultGridAndLength) {
    const RoomSpec r = sample_room(6);
    const FoaDataset ds = build_dataset(r, cube_grid(r), 8000.0, 0.005);
    EXPECT_EQ(ds.size(), 9261u);
    EXPECT_EQ(ds.samples, 40);
    EXPECT_EQ(ds.rirs.size(), 9261u * 4u * 40u);
    const FoaDataset small = build_dataset(r, cube_grid(r, 3), 8000.0, 0.1);
    EXPECT_EQ(small.samples, 800);
    for (float v : small.rirs) ASSERT_TRUE(std::isfinite(v));
    double energy = 0.0;
    for (float v : small.rirs) energy += double(v) * v;
    EXPECT_GT(energy, 0.0);
    EXPECT_EQ(small.position(small.grid.index(2, 1, 0)), small.grid.position(2, 1, 0));
    EXPECT_THROW(build_dataset(r, cube_grid(r, 3), 0.0, 0.1), ConfigurationError);
}

TEST(BuildDataset, Deterministic) {
    const RoomSpec r = sample_room(7);
    const FoaDataset a = build_dataset(r, cube_grid(r, 4), 8000.0, 0.1);
    const FoaDataset b = build_dataset(sample_room(7), cube_grid(r, 4), 8000.0, 0.1);
    EXPECT_EQ(a.rirs, b.rirs);
    EXPECT_EQ(a.positions, b.positions);
}

TEST(BuildDataset, MatchesPerReceiverRendering) {
    const RoomSpec r = sample_room(8);
    const physics::Medium medium;
    const FoaDataset ds = build_dataset(r, cube_grid(r, 3), 8000.0, 0.05, medium);
    const auto images = image_sources(r, 0.05, medium);
    const std::size_t i = ds.grid.index(1, 2, 0);
    const Eigen::MatrixXd rir = render_foa_rir(ds.position(i), images, 8000.0, ds.samples, medium);
    for (int c = 0; c < 4; ++c)
        for (int l = 0; l < ds.samples; ++l) ASSERT_EQ(ds.rir(i, c)[l], static_cast<float>(rir(l, c)));
}
