#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "vpnf/diffcore/modified_mlp.hpp"
#include "vpnf/fields/field_model.hpp"
#include "vpnf/random.hpp"
#include "vpnf/roomsim/dataset.hpp"

namespace vpnf::fixtures {

// max |a - b| / max |b| (absolute when b is all zero).
inline double rel_err(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
    const double scale = b.cwiseAbs().maxCoeff();
    const double err = (a - b).cwiseAbs().maxCoeff();
    return scale > 0.0 ? err / scale : err;
}

using ScalarFn = std::function<double(const Eigen::Vector4d&)>;

// Central-difference gradient and Hessian of a scalar function. Per-axis steps allow
// physical coordinates with very different scales (meters vs seconds).
struct FdJet {
    Eigen::Vector4d grad;
    Eigen::Matrix4d hess;
};

inline FdJet finite_difference_jet(const ScalarFn& f, const Eigen::Vector4d& x, const Eigen::Vector4d& h) {
    FdJet out;
    const double f0 = f(x);
    for (int i = 0; i < 4; ++i) {
        Eigen::Vector4d e = Eigen::Vector4d::Zero();
        e[i] = h[i];
        const double fp = f(x + e), fm = f(x - e);
        out.grad[i] = (fp - fm) / (2.0 * h[i]);
        out.hess(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    }
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            Eigen::Vector4d ei = Eigen::Vector4d::Zero(), ej = Eigen::Vector4d::Zero();
            ei[i] = h[i];
            ej[j] = h[j];
            const double v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * h[i] * h[j]);
            out.hess(i, j) = out.hess(j, i) = v;
        }
    return out;
}

inline FdJet finite_difference_jet(const ScalarFn& f, const Eigen::Vector4d& x, double h) {
    return finite_difference_jet(f, x, Eigen::Vector4d::Constant(h));
}

inline Eigen::VectorXd jet_grad(const diffcore::Jet2& j) { return Eigen::Map<const Eigen::Vector4d>(j.grad.data()); }

inline Eigen::VectorXd jet_hess_flat(const diffcore::Jet2& j) {
    Eigen::VectorXd v(16);
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) v[4 * i + k] = j.h(i, k);
    return v;
}

inline Eigen::VectorXd flat(const Eigen::Matrix4d& m) {
    Eigen::VectorXd v(16);
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) v[4 * i + k] = m(i, k);
    return v;
}

inline diffcore::ParamStore random_params(int width, int depth, int out_dim, std::uint64_t seed, double omega0 = 30.0) {
    diffcore::ParamStore p({4, width, depth, out_dim}, omega0);
    p.init_siren(seed);
    return p;
}

// Uniform points in [-1, 1]^4, one per column.
inline Eigen::MatrixXd random_unit_points(Eigen::Index n, Rng& rng) {
    Eigen::MatrixXd x(4, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (int i = 0; i < 4; ++i) x(i, j) = rng.uniform(-1.0, 1.0);
    return x;
}

// A model over a 1 m cube at `origin`, time horizon `duration`.
inline fields::FieldModel random_model(fields::Head head, int width, int depth, std::uint64_t seed,
                                       const Eigen::Vector3d& origin = {2.0, 3.0, 1.0}, double output_scale = 0.7) {
    const physics::Medium medium;
    const auto norm = fields::NormalizationRecord::fit(origin + Eigen::Vector3d::Constant(0.5), 0.5,
                                                       medium.sound_speed, output_scale);
    return fields::FieldModel::create(head, width, depth, 30.0, norm, medium, seed);
}

// Physical (r, t) points inside the cube [origin, origin + 1] x [0, duration].
inline Eigen::MatrixXd random_physical_points(Eigen::Index n, Rng& rng, const Eigen::Vector3d& origin = {2.0, 3.0, 1.0},
                                              double duration = 0.1) {
    Eigen::MatrixXd p(4, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (int i = 0; i < 3; ++i) p(i, j) = origin[i] + rng.uniform();
        p(3, j) = rng.uniform(0.0, duration);
    }
    return p;
}

// FOA data of a plane wave travelling along `k` (rad/m) with omega = c0 |k|:
//   w = cos(k.r - omega t),  (x, y, z) = -khat w,
// i.e. the potential psi = -sin(k.r - omega t) / |k|. The DOA vector points back toward
// the source, against the direction of travel.
inline roomsim::FoaDataset plane_wave_dataset(const Eigen::Vector3d& k, int grid_count, double fs, double duration,
                                              const Eigen::Vector3d& origin = {2.0, 3.0, 1.0}) {
    roomsim::FoaDataset ds;
    ds.fs = fs;
    ds.duration = duration;
    ds.samples = static_cast<int>(std::lround(fs * duration));
    ds.room.cube_origin = origin;
    ds.room.cube_size = 1.0;
    ds.grid = roomsim::cube_grid(ds.room, grid_count);
    const std::size_t n = ds.grid.size();
    ds.positions.resize(static_cast<Eigen::Index>(n), 3);
    ds.rirs.assign(n * 4 * static_cast<std::size_t>(ds.samples), 0.0f);
    const double omega = ds.medium.sound_speed * k.norm();
    const Eigen::Vector3d khat = k.normalized();
    for (int ix = 0; ix < grid_count; ++ix)
        for (int iy = 0; iy < grid_count; ++iy)
            for (int iz = 0; iz < grid_count; ++iz) {
                const std::size_t i = ds.grid.index(ix, iy, iz);
                const Eigen::Vector3d r = ds.grid.position(ix, iy, iz);
                ds.positions.row(static_cast<Eigen::Index>(i)) = r.transpose();
                for (int l = 0; l < ds.samples; ++l) {
                    const double w = std::cos(k.dot(r) - omega * ds.time(l));
                    ds.rir(i, 0)[l] = static_cast<float>(w);
                    for (int a = 0; a < 3; ++a) ds.rir(i, 1 + a)[l] = static_cast<float>(-khat[a] * w);
                }
            }
    return ds;
}

// Wave vector with |k| = 4 pi (two 0.5 m wavelengths across the 1 m cube) in a generic direction.
inline Eigen::Vector3d two_wavelength_k() {
    return 4.0 * std::numbers::pi * Eigen::Vector3d(0.6, 0.48, 0.64).normalized();
}

}  // namespace vpnf::fixtures
