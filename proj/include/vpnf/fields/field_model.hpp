#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "vpnf/diffcore/modified_mlp.hpp"
#include "vpnf/errors.hpp"
#include "vpnf/physics/medium.hpp"

namespace vpnf::fields {

using diffcore::Jet2;
using diffcore::JetBatch;
using diffcore::JetLayout;
using diffcore::JetOrder;
using diffcore::kInputDim;

enum class Head {
    DANF,      // network outputs (w, x, y, z) directly
    VPNF,      // network outputs the scaled potential psi
    VPNFPlus,  // psi = [x; y; z; tau] . MLP^4(x, y, z, tau)
};

inline const char* head_name(Head h) {
    switch (h) {
        case Head::DANF: return "DANF";
        case Head::VPNF: return "VPNF";
        case Head::VPNFPlus: return "VPNF+";
    }
    return "?";
}

inline Head head_from_name(const std::string& s) {
    if (s == "DANF") return Head::DANF;
    if (s == "VPNF") return Head::VPNF;
    if (s == "VPNF+" || s == "VPNFPlus") return Head::VPNFPlus;
    throw ConfigurationError("unknown head '" + s + "'");
}

inline int head_output_dim(Head h) { return h == Head::VPNF ? 1 : 4; }
inline bool is_potential_head(Head h) { return h != Head::DANF; }

// Maps physical (r [m], t [s]) to network coordinates
//   x_n = (r - center) * input_scale,  tau_n = c0 * t * input_scale
// so the target region spans [-1, 1] and time is measured in the same (scaled) meters.
// The network output is multiplied by output_scale to restore physical amplitude.
struct NormalizationRecord {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    double spatial_half_extent = 0.5;
    double time_scale = 343.0;
    double input_scale = 2.0;
    double output_scale = 1.0;

    static NormalizationRecord fit(const Eigen::Vector3d& center, double half_extent, double c0,
                                   double output_scale = 1.0) {
        if (!(half_extent > 0.0)) throw ConfigurationError("NormalizationRecord: half extent must be positive");
        NormalizationRecord n;
        n.center = center;
        n.spatial_half_extent = half_extent;
        n.time_scale = c0;
        n.input_scale = 1.0 / half_extent;
        n.output_scale = output_scale;
        return n;
    }

    Eigen::Vector4d normalize(const Eigen::Vector3d& r, double t) const {
        Eigen::Vector4d x;
        x.head<3>() = (r - center) * input_scale;
        x[3] = time_scale * t * input_scale;
        return x;
    }
    std::pair<Eigen::Vector3d, double> denormalize(const Eigen::Vector4d& x) const {
        return {x.head<3>() / input_scale + center, x[3] / (input_scale * time_scale)};
    }

    // Columns are physical (x, y, z, t) points.
    Eigen::MatrixXd normalize_batch(const Eigen::Ref<const Eigen::MatrixXd>& phys) const {
        Eigen::MatrixXd x(kInputDim, phys.cols());
        x.topRows<3>() = (phys.topRows<3>().colwise() - center) * input_scale;
        x.row(3) = phys.row(3) * (time_scale * input_scale);
        return x;
    }

    // d(network coordinate)/d(physical coordinate) for x, y, z, t.
    std::array<double, kInputDim> chain() const {
        return {input_scale, input_scale, input_scale, time_scale * input_scale};
    }
    bool operator==(const NormalizationRecord&) const = default;
};

struct FieldModel {
    diffcore::ParamStore params;
    Head head = Head::VPNF;
    NormalizationRecord norm;
    physics::Medium medium;

    static FieldModel create(Head head, int width, int depth, double omega0, const NormalizationRecord& norm,
                             const physics::Medium& medium, std::uint64_t seed) {
        FieldModel m;
        m.head = head;
        m.params = diffcore::ParamStore({kInputDim, width, depth, head_output_dim(head)}, omega0);
        m.params.init_siren(seed);
        m.norm = norm;
        m.medium = medium;
        return m;
    }

    int channels() const { return head == Head::DANF ? 4 : 1; }
};

struct FieldTape {
    diffcore::MlpTape mlp;
    JetBatch mlp_out;
    Eigen::MatrixXd net_coords;
};

namespace detail {

// psi = sum_k q_k m_k with q the identity jets of the network coordinates.
inline JetBatch inner_product_head(const JetBatch& m, const Eigen::MatrixXd& q) {
    const JetLayout& L = m.layout;
    JetBatch psi(L.order, 1, m.points);
    for (int c = 0; c < L.components; ++c)
        psi.comp(c).array() = (m.comp(c).array() * q.array()).colwise().sum();
    if (L.has_gradient())
        for (int i = 0; i < kInputDim; ++i) psi.grad(i).row(0) += m.value().row(i);
    for (int h = 0; h < L.hess_count; ++h) {
        auto [i, j] = L.pairs[h];
        psi.comp(JetLayout::hess_index(h)).row(0) += m.grad(j).row(i) + m.grad(i).row(j);
    }
    return psi;
}

inline JetBatch inner_product_head_backward(const JetBatch& gpsi, const Eigen::MatrixXd& q) {
    const JetLayout& L = gpsi.layout;
    JetBatch gm(L.order, kInputDim, gpsi.points);
    for (int c = 0; c < L.components; ++c)
        gm.comp(c).array() = q.array().rowwise() * gpsi.comp(c).array().row(0);
    if (L.has_gradient())
        for (int i = 0; i < kInputDim; ++i) gm.value().row(i) += gpsi.grad(i).row(0);
    for (int h = 0; h < L.hess_count; ++h) {
        auto [i, j] = L.pairs[h];
        auto g = gpsi.comp(JetLayout::hess_index(h)).row(0);
        gm.grad(j).row(i) += g;
        gm.grad(i).row(j) += g;
    }
    return gm;
}

// Per-component factor taking network-unit jets to physical units.
inline Eigen::VectorXd physical_factors(const FieldModel& m, const JetLayout& L) {
    const auto f = m.norm.chain();
    const double s = m.norm.output_scale;
    Eigen::VectorXd k(L.components);
    k[0] = s;
    if (L.has_gradient())
        for (int i = 0; i < kInputDim; ++i) k[JetLayout::grad_index(i)] = s * f[i];
    for (int h = 0; h < L.hess_count; ++h) {
        auto [i, j] = L.pairs[h];
        k[JetLayout::hess_index(h)] = s * f[i] * f[j];
    }
    return k;
}

inline void scale_components(JetBatch& b, const Eigen::VectorXd& factors) {
    for (int c = 0; c < b.components(); ++c) b.comp(c) *= factors[c];
}

}  // namespace detail

// Head outputs at physical points (columns (x, y, z, t)), with derivatives with respect
// to physical x, y, z [m] and t [s]. One channel (psi) for potential heads, four (w, x, y, z)
// for DANF.
inline JetBatch field_forward(const FieldModel& m, const Eigen::Ref<const Eigen::MatrixXd>& phys_points,
                              JetOrder order, FieldTape* tape = nullptr) {
    if (phys_points.rows() != kInputDim) throw ConfigurationError("field_forward: points must have 4 rows");
    Eigen::MatrixXd q = m.norm.normalize_batch(phys_points);
    diffcore::MlpTape* mt = tape ? &tape->mlp : nullptr;
    JetBatch net = diffcore::modified_mlp_forward(m.params, diffcore::input_jets(q, order), mt);
    JetBatch out;
    if (m.head == Head::VPNFPlus) {
        out = detail::inner_product_head(net, q);
    } else {
        out = net;
    }
    detail::scale_components(out, detail::physical_factors(m, out.layout));
    if (tape) {
        tape->mlp_out = std::move(net);
        tape->net_coords = std::move(q);
    }
    return out;
}

// Accumulates d(loss)/d(theta) given the adjoint of field_forward's output.
inline void field_backward(const FieldModel& m, const FieldTape& tape, JetBatch gout, diffcore::GradAccumulator& grad) {
    detail::scale_components(gout, detail::physical_factors(m, gout.layout));
    if (m.head == Head::VPNFPlus) gout = detail::inner_product_head_backward(gout, tape.net_coords);
    diffcore::modified_mlp_backward(m.params, tape.mlp, gout, grad);
}

// Potential jet at one physical point, derivatives with respect to (x, y, z, t).
inline Jet2 eval_potential(const FieldModel& m, const Eigen::Vector3d& r, double t) {
    if (!is_potential_head(m.head)) throw UsageError("eval_potential: DANF head has no potential");
    Eigen::Matrix<double, 4, 1> p;
    p << r, t;
    JetBatch b = field_forward(m, p, JetOrder::Hessian);
    return Jet2::from_batch(b, 0, 0);
}

// Predicted FOA channels plus the derivative panels the physics residuals need.
struct FoaPrediction {
    double w = 0.0;
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    Eigen::Vector3d grad_w = Eigen::Vector3d::Zero();
    Eigen::Vector3d dv_dt = Eigen::Vector3d::Zero();
    double div_v = 0.0;
    double dw_dt = 0.0;
};

// FOA panels from a physical potential jet: w = (1/c0) dpsi/dt, v = grad psi.
inline FoaPrediction foa_from_potential(const Jet2& psi, double c0) {
    FoaPrediction p;
    p.w = psi.grad[3] / c0;
    p.dw_dt = psi.h(3, 3) / c0;
    for (int i = 0; i < 3; ++i) {
        p.v[i] = psi.grad[i];
        p.grad_w[i] = psi.h(i, 3) / c0;
        p.dv_dt[i] = psi.h(i, 3);
        p.div_v += psi.h(i, i);
    }
    return p;
}

inline FoaPrediction predict_foa(const FieldModel& m, const Eigen::Vector3d& r, double t) {
    if (is_potential_head(m.head)) return foa_from_potential(eval_potential(m, r, t), m.medium.sound_speed);
    Eigen::Matrix<double, 4, 1> pt;
    pt << r, t;
    JetBatch b = field_forward(m, pt, JetOrder::Gradient);
    FoaPrediction p;
    p.w = b.at(0, 0, 0);
    p.dw_dt = b.at(0, JetLayout::grad_index(3), 0);
    for (int i = 0; i < 3; ++i) {
        p.v[i] = b.at(i + 1, 0, 0);
        p.grad_w[i] = b.at(0, JetLayout::grad_index(i), 0);
        p.dv_dt[i] = b.at(i + 1, JetLayout::grad_index(3), 0);
        p.div_v += b.at(i + 1, JetLayout::grad_index(i), 0);
    }
    return p;
}

// Channel values only, (w, x, y, z) rows for every column of `phys_points`. Evaluated in
// chunks so arbitrarily many points fit in memory.
inline Eigen::MatrixXd predict_foa_batch(const FieldModel& m, const Eigen::Ref<const Eigen::MatrixXd>& phys_points,
                                         Eigen::Index chunk = 4096) {
    Eigen::MatrixXd out(4, phys_points.cols());
    const JetOrder order = is_potential_head(m.head) ? JetOrder::Gradient : JetOrder::Value;
    for (Eigen::Index start = 0; start < phys_points.cols(); start += chunk) {
        const Eigen::Index n = std::min(chunk, phys_points.cols() - start);
        JetBatch b = field_forward(m, phys_points.middleCols(start, n), order);
        if (is_potential_head(m.head)) {
            out.block(0, start, 1, n) = b.grad(3) / m.medium.sound_speed;
            for (int i = 0; i < 3; ++i) out.block(1 + i, start, 1, n) = b.grad(i);
        } else {
            out.middleCols(start, n) = b.value();
        }
    }
    return out;
}

}  // namespace vpnf::fields
