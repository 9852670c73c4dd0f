#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "vpnf/diffcore/modified_mlp.hpp"
#include "vpnf/errors.hpp"
#include "vpnf/physics/medium.hpp"

namespace vpnf::training {

using diffcore::JetBatch;
using diffcore::JetLayout;
using diffcore::JetOrder;
using diffcore::LossAndAdjoint;

// All losses below read physical-unit jets (derivatives with respect to x, y, z in meters
// and t in seconds) and return the loss value plus its adjoint with the same layout.

namespace detail {
inline double sign(double x) { return (x > 0.0) - (x < 0.0); }

inline JetBatch zero_like(const JetBatch& b) { return JetBatch(b.layout.order, b.units(), b.points); }

inline void require_points(const JetBatch& b, const char* who) {
    if (b.points == 0) throw UsageError(std::string(who) + ": empty batch");
}
}  // namespace detail

// Mean over points of |(1/c0) dpsi/dt - w| + ||grad psi - v||_1.
// `psi` needs gradients; `targets` is 4 x points with rows (w, x, y, z).
inline LossAndAdjoint data_loss_potential(const JetBatch& psi, const Eigen::Ref<const Eigen::MatrixXd>& targets,
                                          double c0) {
    detail::require_points(psi, "data_loss_potential");
    if (!psi.layout.has_gradient()) throw UsageError("data_loss_potential: potential jets need gradients");
    if (targets.rows() != 4 || targets.cols() != psi.points) throw ConfigurationError("data_loss_potential: target shape");
    LossAndAdjoint la{0.0, detail::zero_like(psi)};
    const double inv_n = 1.0 / static_cast<double>(psi.points);
    double total = 0.0;
    for (Eigen::Index p = 0; p < psi.points; ++p) {
        const double rw = psi.at(0, JetLayout::grad_index(3), p) / c0 - targets(0, p);
        total += std::abs(rw);
        la.adjoint.at(0, JetLayout::grad_index(3), p) = detail::sign(rw) * inv_n / c0;
        for (int i = 0; i < 3; ++i) {
            const double rv = psi.at(0, JetLayout::grad_index(i), p) - targets(1 + i, p);
            total += std::abs(rv);
            la.adjoint.at(0, JetLayout::grad_index(i), p) = detail::sign(rv) * inv_n;
        }
    }
    la.value = total * inv_n;
    return la;
}

// Mean over points of |w_hat - w| + ||v_hat - v||_1 on four direct output channels.
inline LossAndAdjoint data_loss_direct(const JetBatch& out, const Eigen::Ref<const Eigen::MatrixXd>& targets) {
    detail::require_points(out, "data_loss_direct");
    if (out.units() != 4) throw UsageError("data_loss_direct: needs 4 output channels");
    if (targets.rows() != 4 || targets.cols() != out.points) throw ConfigurationError("data_loss_direct: target shape");
    LossAndAdjoint la{0.0, detail::zero_like(out)};
    const double inv_n = 1.0 / static_cast<double>(out.points);
    const Eigen::ArrayXXd r = out.value().array() - targets.array();
    la.value = r.abs().sum() * inv_n;
    la.adjoint.value() = (r.sign() * inv_n).matrix();
    return la;
}

// Mean over points of |lap psi - (1/c0^2) d2psi/dt2|. Needs at least the Hessian diagonal.
inline LossAndAdjoint wave_loss(const JetBatch& psi, double c0) {
    detail::require_points(psi, "wave_loss");
    const JetLayout& L = psi.layout;
    int idx[4];
    for (int i = 0; i < 4; ++i) {
        idx[i] = L.hess_component(i, i);
        if (idx[i] < 0) throw UsageError("wave_loss: potential jets need second derivatives");
    }
    LossAndAdjoint la{0.0, detail::zero_like(psi)};
    const double inv_n = 1.0 / static_cast<double>(psi.points);
    const double inv_c2 = 1.0 / (c0 * c0);
    double total = 0.0;
    for (Eigen::Index p = 0; p < psi.points; ++p) {
        const double r = physics::wave_residual(psi.at(0, idx[0], p) + psi.at(0, idx[1], p) + psi.at(0, idx[2], p),
                                                psi.at(0, idx[3], p), {1.0, c0});
        total += std::abs(r);
        const double g = detail::sign(r) * inv_n;
        for (int i = 0; i < 3; ++i) la.adjoint.at(0, idx[i], p) = g;
        la.adjoint.at(0, idx[3], p) = -g * inv_c2;
    }
    la.value = total * inv_n;
    return la;
}

struct PenaltyLosses {
    LossAndAdjoint momentum;
    LossAndAdjoint continuity;
};

// Physics penalties of the direct (DANF) head: batch means of
//   || grad w - (1/c0) dv/dt ||_1   and   | div v - (1/c0) dw/dt |.
inline PenaltyLosses pidanf_penalties(const JetBatch& out, double c0) {
    detail::require_points(out, "pidanf_penalties");
    if (out.units() != 4 || !out.layout.has_gradient())
        throw UsageError("pidanf_penalties: needs 4 output channels with gradients");
    PenaltyLosses pl{{0.0, detail::zero_like(out)}, {0.0, detail::zero_like(out)}};
    const double inv_n = 1.0 / static_cast<double>(out.points);
    const int gt = JetLayout::grad_index(3);
    double mom = 0.0, cont = 0.0;
    for (Eigen::Index p = 0; p < out.points; ++p) {
        for (int i = 0; i < 3; ++i) {
            const double r = out.at(0, JetLayout::grad_index(i), p) - out.at(1 + i, gt, p) / c0;
            mom += std::abs(r);
            const double g = detail::sign(r) * inv_n;
            pl.momentum.adjoint.at(0, JetLayout::grad_index(i), p) = g;
            pl.momentum.adjoint.at(1 + i, gt, p) = -g / c0;
        }
        double div = 0.0;
        for (int i = 0; i < 3; ++i) div += out.at(1 + i, JetLayout::grad_index(i), p);
        const double r = div - out.at(0, gt, p) / c0;
        cont += std::abs(r);
        const double g = detail::sign(r) * inv_n;
        for (int i = 0; i < 3; ++i) pl.continuity.adjoint.at(1 + i, JetLayout::grad_index(i), p) = g;
        pl.continuity.adjoint.at(0, gt, p) = -g / c0;
    }
    pl.momentum.value = mom * inv_n;
    pl.continuity.value = cont * inv_n;
    return pl;
}

// Learnable log-weights s_k = log eps_k of the adaptive balance
//   L_all = sum_k L_k / (2 eps_k^2) + log(prod_k eps_k).
struct LossState {
    std::vector<double> log_eps;

    static LossState from_eps(std::initializer_list<double> eps) {
        LossState s;
        for (double e : eps) s.log_eps.push_back(std::log(e));
        return s;
    }
    double eps(std::size_t k) const { return std::exp(log_eps.at(k)); }
};

struct AdaptiveTotal {
    double value = 0.0;
    std::vector<double> term_weights;  // d L_all / d L_k = 1 / (2 eps_k^2)
    std::vector<double> log_eps_grad;  // d L_all / d s_k = 1 - L_k / eps_k^2
};

inline AdaptiveTotal adaptive_total(const std::vector<double>& losses, const LossState& state) {
    if (losses.size() != state.log_eps.size()) throw ConfigurationError("adaptive_total: term count mismatch");
    AdaptiveTotal t;
    for (std::size_t k = 0; k < losses.size(); ++k) {
        const double s = state.log_eps[k];
        if (!std::isfinite(s)) throw TrainingDiverged("adaptive_total: non-finite log-weight");
        const double inv_eps2 = std::exp(-2.0 * s);
        t.value += 0.5 * inv_eps2 * losses[k] + s;
        t.term_weights.push_back(0.5 * inv_eps2);
        t.log_eps_grad.push_back(1.0 - losses[k] * inv_eps2);
    }
    return t;
}

inline AdaptiveTotal adaptive_total(double data_loss, double penalty_loss, const LossState& state) {
    return adaptive_total(std::vector<double>{data_loss, penalty_loss}, state);
}

}  // namespace vpnf::training
