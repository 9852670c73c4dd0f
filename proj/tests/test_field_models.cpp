#include <cmath>

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "vpnf/fields/field_model.hpp"
#include "vpnf/physics/medium.hpp"

using namespace vpnf;
using namespace vpnf::fields;
using vpnf::fixtures::rel_err;

namespace {

const Eigen::Vector3d kOrigin(2.0, 3.0, 1.0);

// Physical jets rescaled so the time axis is c0 * t; makes one relative tolerance fair
// across space and time entries.
Eigen::VectorXd scaled_grad(const Eigen::Vector4d& g, double c0) {
    Eigen::VectorXd v = g;
    v[3] /= c0;
    return v;
}

Eigen::VectorXd scaled_hess(const Eigen::Matrix4d& h, double c0) {
    Eigen::Matrix4d s = h;
    s.row(3) /= c0;
    s.col(3) /= c0;
    return fixtures::flat(s);
}

Eigen::Matrix4d hess_matrix(const Jet2& j) {
    Eigen::Matrix4d m;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) m(a, b) = j.h(a, b);
    return m;
}

double potential_value(const FieldModel& m, const Eigen::Vector4d& p) {
    return field_forward(m, p, JetOrder::Value).at(0, 0, 0);
}

void expect_potential_matches_fd(const FieldModel& m, const Eigen::Vector4d& p) {
    const double c0 = m.medium.sound_speed;
    const Jet2 j = eval_potential(m, p.head<3>(), p[3]);
    const auto fd = fixtures::finite_difference_jet([&](const Eigen::Vector4d& y) { return potential_value(m, y); }, p,
                                                   Eigen::Vector4d(1e-4, 1e-4, 1e-4, 1e-7));
    Eigen::Vector4d g(j.grad[0], j.grad[1], j.grad[2], j.grad[3]);
    EXPECT_LE(rel_err(scaled_grad(fd.grad, c0), scaled_grad(g, c0)), 1e-5);
    EXPECT_LE(rel_err(scaled_hess(fd.hess, c0), scaled_hess(hess_matrix(j), c0)), 1e-5);
}

}  // namespace

TEST(Normalization, RoundTripAndChain) {
    const auto n = NormalizationRecord::fit(Eigen::Vector3d(1.5, 2.5, 3.5), 0.5, 343.0, 2.0);
    const Eigen::Vector3d r(1.2, 2.9, 3.1);
    const double t = 0.0371;
    const Eigen::Vector4d x = n.normalize(r, t);
    EXPECT_NEAR(x[0], -0.6, 1e-12);
    EXPECT_NEAR(x[3], 343.0 * t * 2.0, 1e-12);
    const auto [r2, t2] = n.denormalize(x);
    EXPECT_LE((r2 - r).cwiseAbs().maxCoeff(), 1e-12 * r.norm());
    EXPECT_NEAR(t2, t, 1e-12 * t);
    const auto f = n.chain();
    EXPECT_EQ(f[0], 2.0);
    EXPECT_EQ(f[3], 686.0);
    EXPECT_THROW(NormalizationRecord::fit(r, 0.0, 343.0), ConfigurationError);
}

TEST(FieldModel, HeadOutputDimensions) {
    EXPECT_EQ(fixtures::random_model(Head::DANF, 8, 2, 1).params.shape().output_dim, 4);
    EXPECT_EQ(fixtures::random_model(Head::VPNF, 8, 2, 1).params.shape().output_dim, 1);
    EXPECT_EQ(fixtures::random_model(Head::VPNFPlus, 8, 2, 1).params.shape().output_dim, 4);
    EXPECT_EQ(head_from_name("VPNF+"), Head::VPNFPlus);
    EXPECT_STREQ(head_name(Head::VPNFPlus), "VPNF+");
    EXPECT_THROW(head_from_name("MLP"), ConfigurationError);
}

TEST(FieldModel, VpnfPlusWithConstantNetworkIsLinearInCoordinates) {
    FieldModel m = fixtures::random_model(Head::VPNFPlus, 8, 3, 1);
    m.params.values().setZero();
    const Eigen::Vector4d mvec(0.3, -0.7, 1.1, 0.45);  // (x, y, z, tau) weights
    m.params.vector(m.params.head_layer() + 1) = mvec;
    const Eigen::Vector3d r = kOrigin + Eigen::Vector3d(0.2, 0.9, 0.4);
    const double t = 0.013;
    const Jet2 j = eval_potential(m, r, t);
    const auto& n = m.norm;
    const Eigen::Vector4d q = n.normalize(r, t);
    EXPECT_NEAR(j.value, n.output_scale * q.dot(mvec), 1e-14);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(j.grad[i], n.output_scale * n.input_scale * mvec[i], 1e-14);
    EXPECT_NEAR(j.grad[3], n.output_scale * n.input_scale * m.medium.sound_speed * mvec[3], 1e-11);
    for (double h : j.hess) EXPECT_EQ(h, 0.0);
}

TEST(FieldModel, ZeroParametersGiveZeroPotential) {
    FieldModel m = fixtures::random_model(Head::VPNF, 8, 3, 1);
    m.params.values().setZero();
    const Jet2 j = eval_potential(m, kOrigin + Eigen::Vector3d::Constant(0.3), 0.05);
    EXPECT_EQ(j.value, 0.0);
    for (double g : j.grad) EXPECT_EQ(g, 0.0);
    for (double h : j.hess) EXPECT_EQ(h, 0.0);
}

TEST(FieldModel, PhysicalDerivativesMatchFiniteDifferences) {
    Rng rng(12);
    for (Head head : {Head::VPNF, Head::VPNFPlus}) {
        for (int trial = 0; trial < 3; ++trial) {
            const FieldModel m = fixtures::random_model(head, 24, 3, 40 + trial);
            expect_potential_matches_fd(m, fixtures::random_physical_points(1, rng).col(0));
        }
    }
}

TEST(FieldModel, UnitRestorationSurvivesRescaledNormalization) {
    Rng rng(13);
    FieldModel m = fixtures::random_model(Head::VPNFPlus, 16, 3, 5);
    m.norm = NormalizationRecord::fit(m.norm.center, 2.0 * m.norm.spatial_half_extent, m.medium.sound_speed,
                                      m.norm.output_scale);
    expect_potential_matches_fd(m, fixtures::random_physical_points(1, rng).col(0));
}

TEST(FieldModel, EvalPotentialRejectsDirectHead) {
    const FieldModel m = fixtures::random_model(Head::DANF, 8, 2, 1);
    EXPECT_THROW(eval_potential(m, kOrigin, 0.01), UsageError);
}

TEST(PredictFoa, PlaneWavePotential) {
    // depth 1, width 1: psi = sin(k.r - omega t) exactly.
    FieldModel m = fixtures::random_model(Head::VPNF, 1, 1, 1);
    m.params.values().setZero();
    const double c0 = m.medium.sound_speed, w0 = m.params.omega0();
    const Eigen::Vector3d k(3.0, -2.0, 6.0);
    const double omega = c0 * k.norm();
    const double s = m.norm.input_scale;
    auto w1 = m.params.matrix(diffcore::ParamStore::kFirst);
    w1.block<1, 3>(0, 0) = k.transpose() / (w0 * s);
    w1(0, 3) = -omega / (w0 * c0 * s);
    m.params.vector(diffcore::ParamStore::kFirst + 1)[0] = k.dot(m.norm.center) / w0;
    m.params.matrix(m.params.head_layer())(0, 0) = 1.0 / m.norm.output_scale;

    const Eigen::Vector3d r = kOrigin + Eigen::Vector3d(0.31, 0.62, 0.17);
    const double t = 0.0042;
    const double phase = k.dot(r) - omega * t;
    const FoaPrediction p = predict_foa(m, r, t);
    EXPECT_NEAR(p.w, -k.norm() * std::cos(phase), 1e-10);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(p.v[i], k[i] * std::cos(phase), 1e-10);
    EXPECT_LE(physics::momentum_residual(p.grad_w, p.dv_dt, m.medium).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(physics::continuity_residual(p.div_v, p.dw_dt, m.medium), 0.0, 1e-9 * k.squaredNorm());
}

TEST(PredictFoa, ConstantPotentialHasNoField) {
    FieldModel m = fixtures::random_model(Head::VPNF, 8, 3, 1);
    m.params.values().setZero();
    m.params.vector(m.params.head_layer() + 1)[0] = 2.5;
    const FoaPrediction p = predict_foa(m, kOrigin + Eigen::Vector3d::Constant(0.5), 0.02);
    EXPECT_EQ(p.w, 0.0);
    EXPECT_EQ(p.v.cwiseAbs().maxCoeff(), 0.0);
}

TEST(PredictFoa, MomentumHoldsByConstructionForPotentialHeads) {
    Rng rng(21);
    for (Head head : {Head::VPNF, Head::VPNFPlus}) {
        double worst = 0.0;
        for (int trial = 0; trial < 4; ++trial) {
            const FieldModel m = fixtures::random_model(head, 32, 3, 300 + trial);
            const Eigen::MatrixXd pts = fixtures::random_physical_points(250, rng);
            for (Eigen::Index j = 0; j < pts.cols(); ++j) {
                const FoaPrediction p = predict_foa(m, pts.col(j).head<3>(), pts(3, j));
                worst = std::max(worst, physics::momentum_residual(p.grad_w, p.dv_dt, m.medium).cwiseAbs().maxCoeff());
            }
        }
        EXPECT_LE(worst, 1e-10) << head_name(head);
    }
}

TEST(PredictFoa, DirectHeadHasNoMomentumGuarantee) {
    Rng rng(22);
    const FieldModel m = fixtures::random_model(Head::DANF, 32, 3, 8);
    const Eigen::MatrixXd pts = fixtures::random_physical_points(20, rng);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
        const FoaPrediction p = predict_foa(m, pts.col(j).head<3>(), pts(3, j));
        worst = std::max(worst, physics::momentum_residual(p.grad_w, p.dv_dt, m.medium).cwiseAbs().maxCoeff());
    }
    EXPECT_GT(worst, 1e-3);
}

TEST(PredictFoa, BatchMatchesPointwise) {
    Rng rng(23);
    for (Head head : {Head::DANF, Head::VPNF, Head::VPNFPlus}) {
        const FieldModel m = fixtures::random_model(head, 16, 2, 9);
        const Eigen::MatrixXd pts = fixtures::random_physical_points(9, rng);
        const Eigen::MatrixXd batch = predict_foa_batch(m, pts, 4);
        for (Eigen::Index j = 0; j < pts.cols(); ++j) {
            const FoaPrediction p = predict_foa(m, pts.col(j).head<3>(), pts(3, j));
            EXPECT_NEAR(batch(0, j), p.w, 1e-12 * (1.0 + std::abs(p.w)));
            for (int i = 0; i < 3; ++i) EXPECT_NEAR(batch(1 + i, j), p.v[i], 1e-12 * (1.0 + std::abs(p.v[i])));
        }
    }
}

TEST(FieldBackward, ParameterGradientMatchesFiniteDifferences) {
    Rng rng(24);
    for (Head head : {Head::DANF, Head::VPNF, Head::VPNFPlus}) {
        FieldModel m = fixtures::random_model(head, 8, 2, 10);
        const Eigen::MatrixXd pts = fixtures::random_physical_points(3, rng);
        const JetOrder order = JetOrder::Hessian;
        auto loss = [&](const FieldModel& mm, JetBatch* adjoint, FieldTape* tape) {
            JetBatch out = field_forward(mm, pts, order, tape);
            // Weights keep every component O(1) despite the c0 factors on time derivatives.
            double value = 0.0;
            JetBatch adj = out;
            const auto f = mm.norm.chain();
            for (int c = 0; c < out.components(); ++c) {
                double scale = 1.0;
                if (c >= 1 && c <= 4) scale = 1.0 / f[c - 1];
                if (c > 4) {
                    auto [i, j] = out.layout.pairs[c - 5];
                    scale = 1.0 / (f[i] * f[j]);
                }
                value += 0.5 * scale * scale * out.comp(c).squaredNorm();
                adj.comp(c) *= scale * scale;
            }
            if (adjoint) *adjoint = adj;
            return value;
        };
        FieldTape tape;
        JetBatch adj;
        loss(m, &adj, &tape);
        diffcore::GradAccumulator g(m.params);
        field_backward(m, tape, adj, g);
        Eigen::VectorXd fd(m.params.size());
        for (Eigen::Index k = 0; k < fd.size(); ++k) {
            const double keep = m.params.values()[k];
            m.params.values()[k] = keep + 1e-6;
            const double lp = loss(m, nullptr, nullptr);
            m.params.values()[k] = keep - 1e-6;
            const double lm = loss(m, nullptr, nullptr);
            m.params.values()[k] = keep;
            fd[k] = (lp - lm) / 2e-6;
        }
        EXPECT_LE(rel_err(fd, g.values), 1e-5) << head_name(head);
    }
}
