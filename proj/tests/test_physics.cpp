#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "vpnf/fields/field_model.hpp"
#include "vpnf/physics/medium.hpp"

using namespace vpnf;
using namespace vpnf::physics;

TEST(Medium, DefaultsAndValidation) {
    const Medium m;
    EXPECT_EQ(m.density, 1.2);
    EXPECT_EQ(m.sound_speed, 343.0);
    EXPECT_NO_THROW(m.validate());
    EXPECT_THROW((Medium{0.0, 343.0}.validate()), ConfigurationError);
    EXPECT_THROW((Medium{1.2, -1.0}.validate()), ConfigurationError);
    EXPECT_THROW((Medium{1.2, std::numeric_limits<double>::infinity()}.validate()), ConfigurationError);
    EXPECT_THROW((Medium{std::nan(""), 343.0}.validate()), ConfigurationError);
}

TEST(VelocityFromFoa, Examples) {
    const Medium m;
    EXPECT_EQ(velocity_from_foa(Eigen::Vector3d::Zero(), m), Eigen::Vector3d::Zero());
    const Eigen::Vector3d u = velocity_from_foa(Eigen::Vector3d(m.density * m.sound_speed, 0, 0), m);
    EXPECT_NEAR(u[0], -1.0, 1e-15);
    EXPECT_EQ(u[1], 0.0);
    const Eigen::Vector3d v(0.3, -2.0, 7.5);
    EXPECT_LE((foa_from_velocity(velocity_from_foa(v, m), m) - v).cwiseAbs().maxCoeff(), 1e-12 * v.norm());
}

TEST(MomentumResidual, Examples) {
    const Medium m;
    EXPECT_EQ(momentum_residual(Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), m), Eigen::Vector3d::Zero());
    EXPECT_EQ(momentum_residual(Eigen::Vector3d::UnitX(), Eigen::Vector3d::Zero(), m), Eigen::Vector3d::UnitX());
    // Plane wave psi = sin(phi), phi = k.r - omega t: grad w = |k| k sin(phi), dv/dt = c0 |k| k sin(phi).
    const Eigen::Vector3d k(1.0, 2.0, -2.0);
    const double sphi = std::sin(0.7);
    const Eigen::Vector3d grad_w = k.norm() * k * sphi;
    const Eigen::Vector3d dv_dt = m.sound_speed * k.norm() * k * sphi;
    EXPECT_LE(momentum_residual(grad_w, dv_dt, m).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ContinuityResidual, Examples) {
    const Medium m;
    EXPECT_EQ(continuity_residual(0.0, 0.0, m), 0.0);
    EXPECT_EQ(continuity_residual(1.0, m.sound_speed, m), 0.0);
    // Plane wave: div v = -|k|^2 sin(phi), dw/dt = -c0 |k|^2 sin(phi).
    const double k2 = 9.0, sphi = std::sin(1.3);
    EXPECT_NEAR(continuity_residual(-k2 * sphi, -m.sound_speed * k2 * sphi, m), 0.0, 1e-13);
}

TEST(WaveResidual, Examples) {
    const Medium m;
    EXPECT_EQ(wave_residual(0.0, 0.0, m), 0.0);
    // psi = t^2
    EXPECT_DOUBLE_EQ(wave_residual(0.0, 2.0, m), -2.0 / (343.0 * 343.0));
    // psi = sin(k.r - omega t): lap = -|k|^2 psi, psi_tt = -omega^2 psi.
    const double k2 = 14.0, omega = m.sound_speed * std::sqrt(k2), psi = std::sin(0.4);
    EXPECT_NEAR(wave_residual(-k2 * psi, -omega * omega * psi, m), 0.0, 1e-12);
}

TEST(WaveResidual, LinearInPotential) {
    const Medium m;
    const double a = 1.7, b = -0.3;
    const double l1 = 3.2, t1 = 5e5, l2 = -1.1, t2 = 2e4;
    const double lhs = wave_residual(a * l1 + b * l2, a * t1 + b * t2, m);
    const double rhs = a * wave_residual(l1, t1, m) + b * wave_residual(l2, t2, m);
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * std::abs(rhs));
}

TEST(MomentumResidual, VanishesForRandomPotentialFields) {
    Rng rng(31);
    double worst = 0.0;
    int draws = 0;
    for (int model = 0; model < 10; ++model) {
        const auto m = fixtures::random_model(model % 2 ? fields::Head::VPNFPlus : fields::Head::VPNF, 16, 3, 500 + model);
        const Eigen::MatrixXd pts = fixtures::random_physical_points(100, rng);
        for (Eigen::Index j = 0; j < pts.cols(); ++j, ++draws) {
            const auto p = fields::predict_foa(m, pts.col(j).head<3>(), pts(3, j));
            worst = std::max(worst, momentum_residual(p.grad_w, p.dv_dt, m.medium).cwiseAbs().maxCoeff());
        }
    }
    EXPECT_EQ(draws, 1000);
    EXPECT_LE(worst, 1e-10);
}
