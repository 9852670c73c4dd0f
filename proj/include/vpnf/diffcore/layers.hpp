#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "vpnf/diffcore/fast_sincos.hpp"
#include "vpnf/diffcore/jet.hpp"
#include "vpnf/errors.hpp"

namespace vpnf::diffcore {

// Cached quantities of one sine activation, enough to run it backwards.
struct SineCache {
    JetBatch pre;          // pre-activation jets a
    Eigen::ArrayXXd sin_;  // sin(w0 * a.value)
    Eigen::ArrayXXd cos_;  // cos(w0 * a.value)
    JetBatch out;
};

// out = W * in + b. The bias only enters the value component.
inline JetBatch linear_jet(const JetBatch& in, const Eigen::Ref<const Eigen::MatrixXd>& weight,
                           const Eigen::Ref<const Eigen::VectorXd>& bias) {
    if (weight.cols() != in.units())
        throw ConfigurationError("linear_jet: weight has " + std::to_string(weight.cols()) +
                                 " columns but input has " + std::to_string(in.units()) + " units");
    if (bias.size() != weight.rows()) throw ConfigurationError("linear_jet: bias length mismatch");
    JetBatch out;
    out.layout = in.layout;
    out.points = in.points;
    out.data.noalias() = weight * in.data;
    out.value().colwise() += bias;
    return out;
}

// Parameter and input adjoints of linear_jet. Accumulates into dweight/dbias; returns the
// adjoint of `in` only when asked.
inline void linear_jet_backward(const JetBatch& in, const Eigen::Ref<const Eigen::MatrixXd>& weight,
                                const JetBatch& gout, Eigen::Ref<Eigen::MatrixXd> dweight,
                                Eigen::Ref<Eigen::VectorXd> dbias, JetBatch* gin) {
    dweight.noalias() += gout.data * in.data.transpose();
    dbias += gout.value().rowwise().sum();
    if (gin) {
        gin->layout = in.layout;
        gin->points = in.points;
        gin->data.noalias() = weight.transpose() * gout.data;
    }
}

// Elementwise sin(w0 * a) on jets:
//   value = sin(w0 a)
//   grad  = w0 cos(w0 a) a_i
//   hess  = w0 cos(w0 a) a_ij - w0^2 sin(w0 a) a_i a_j
inline SineCache sine_jet(JetBatch pre, double omega0) {
    SineCache c;
    const JetLayout& L = pre.layout;
    Eigen::ArrayXXd arg = omega0 * pre.value().array();
    c.sin_.resize(arg.rows(), arg.cols());
    c.cos_.resize(arg.rows(), arg.cols());
    sincos_array(arg.data(), c.sin_.data(), c.cos_.data(), static_cast<std::size_t>(arg.size()));
    c.out.layout = L;
    c.out.points = pre.points;
    c.out.data.resize(pre.units(), pre.data.cols());
    c.out.value() = c.sin_.matrix();
    if (L.has_gradient()) {
        Eigen::ArrayXXd wc = omega0 * c.cos_;
        for (int i = 0; i < kInputDim; ++i) c.out.grad(i).array() = wc * pre.grad(i).array();
        if (L.has_hessian()) {
            Eigen::ArrayXXd w2s = (omega0 * omega0) * c.sin_;
            for (int h = 0; h < L.hess_count; ++h) {
                auto [i, j] = L.pairs[h];
                const int k = JetLayout::hess_index(h);
                c.out.comp(k).array() = wc * pre.comp(k).array() -
                                        w2s * pre.grad(i).array() * pre.grad(j).array();
            }
        }
    }
    c.pre = std::move(pre);
    return c;
}

// Adjoint of the pre-activation jets given the adjoint of the sine output.
inline JetBatch sine_jet_backward(const SineCache& c, const JetBatch& gout, double omega0) {
    const JetLayout& L = c.pre.layout;
    const JetBatch& a = c.pre;
    JetBatch ga(L.order, a.units(), a.points);
    Eigen::ArrayXXd wc = omega0 * c.cos_;
    auto g0 = ga.value().array();
    g0 = wc * gout.value().array();
    if (!L.has_gradient()) return ga;

    Eigen::ArrayXXd w2s = (omega0 * omega0) * c.sin_;
    for (int i = 0; i < kInputDim; ++i) {
        ga.grad(i).array() = wc * gout.grad(i).array();
        g0 -= w2s * a.grad(i).array() * gout.grad(i).array();
    }
    if (L.has_hessian()) {
        Eigen::ArrayXXd w3c = (omega0 * omega0 * omega0) * c.cos_;
        for (int h = 0; h < L.hess_count; ++h) {
            auto [i, j] = L.pairs[h];
            const int k = JetLayout::hess_index(h);
            auto gh = gout.comp(k).array();
            ga.comp(k).array() = wc * gh;
            g0 -= gh * (w2s * a.comp(k).array() + w3c * a.grad(i).array() * a.grad(j).array());
            if (i == j) {
                ga.grad(i).array() -= 2.0 * w2s * a.grad(i).array() * gh;
            } else {
                ga.grad(i).array() -= w2s * a.grad(j).array() * gh;
                ga.grad(j).array() -= w2s * a.grad(i).array() * gh;
            }
        }
    }
    return ga;
}

// Elementwise product a * b with the exact product rule on every stored component.
inline JetBatch product_jet(const JetBatch& a, const JetBatch& b) {
    const JetLayout& L = a.layout;
    JetBatch out(L.order, a.units(), a.points);
    auto a0 = a.value().array();
    auto b0 = b.value().array();
    out.value().array() = a0 * b0;
    if (L.has_gradient())
        for (int i = 0; i < kInputDim; ++i)
            out.grad(i).array() = a.grad(i).array() * b0 + a0 * b.grad(i).array();
    for (int h = 0; h < L.hess_count; ++h) {
        auto [i, j] = L.pairs[h];
        const int k = JetLayout::hess_index(h);
        out.comp(k).array() = a.comp(k).array() * b0 + a.grad(i).array() * b.grad(j).array() +
                              a.grad(j).array() * b.grad(i).array() + a0 * b.comp(k).array();
    }
    return out;
}

// Accumulates the adjoint of one factor of a product given the other factor.
inline void product_factor_backward(const JetBatch& other, const JetBatch& gout, JetBatch& gself) {
    const JetLayout& L = gout.layout;
    auto o0 = other.value().array();
    auto s0 = gself.value().array();
    s0 += gout.value().array() * o0;
    if (L.has_gradient())
        for (int i = 0; i < kInputDim; ++i) {
            s0 += gout.grad(i).array() * other.grad(i).array();
            gself.grad(i).array() += gout.grad(i).array() * o0;
        }
    for (int h = 0; h < L.hess_count; ++h) {
        auto [i, j] = L.pairs[h];
        const int k = JetLayout::hess_index(h);
        auto gh = gout.comp(k).array();
        s0 += gh * other.comp(k).array();
        gself.comp(k).array() += gh * o0;
        gself.grad(i).array() += gh * other.grad(j).array();
        gself.grad(j).array() += gh * other.grad(i).array();
    }
}

}  // namespace vpnf::diffcore
