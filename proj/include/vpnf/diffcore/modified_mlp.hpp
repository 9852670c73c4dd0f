#pragma once

#include <vector>

#include <Eigen/Dense>

#include "vpnf/diffcore/jet.hpp"
#include "vpnf/diffcore/layers.hpp"
#include "vpnf/diffcore/params.hpp"

namespace vpnf::diffcore {

// Modified MLP with sine activations:
//   U = sin(w0 (Wu x + bu)),  V = sin(w0 (Wv x + bv))
//   H1 = sin(w0 (W1 x + b1))
//   Z_k = sin(w0 (Wk H_k + bk)),  H_{k+1} = (1 - Z_k) * U + Z_k * V = U + Z_k * (V - U)
//   out = Wo H_depth + bo
// Everything is propagated as jets so the outputs carry exact input derivatives.

// Intermediate state of a forward pass, kept for the backward pass.
struct MlpTape {
    JetBatch input;
    SineCache enc_u, enc_v, first;
    JetBatch diff;                  // V - U
    std::vector<SineCache> gates;   // Z_k, k = 1..depth-1
    std::vector<JetBatch> hidden;   // H_1 .. H_depth (H_1 aliases first.out)
};

namespace detail {
inline void check_manifest(const ParamStore& p, const JetBatch& input) {
    const MlpShape& s = p.shape();
    if (input.units() != s.input_dim)
        throw ConfigurationError("modified_mlp: input has " + std::to_string(input.units()) +
                                 " rows, manifest expects " + std::to_string(s.input_dim));
    const std::size_t expected = 6 + 2 * static_cast<std::size_t>(s.depth - 1) + 2;
    if (p.manifest().size() != expected)
        throw ConfigurationError("modified_mlp: manifest does not match configured depth");
}
}  // namespace detail

// Forward pass over a batch of input jets (4 x points). Fills `tape` when given.
inline JetBatch modified_mlp_forward(const ParamStore& p, JetBatch input, MlpTape* tape = nullptr) {
    detail::check_manifest(p, input);
    const double w0 = p.omega0();
    const int depth = p.shape().depth;

    SineCache u = sine_jet(linear_jet(input, p.matrix(ParamStore::kEncU), p.vector(ParamStore::kEncU + 1)), w0);
    SineCache v = sine_jet(linear_jet(input, p.matrix(ParamStore::kEncV), p.vector(ParamStore::kEncV + 1)), w0);
    SineCache first = sine_jet(linear_jet(input, p.matrix(ParamStore::kFirst), p.vector(ParamStore::kFirst + 1)), w0);

    JetBatch diff;
    diff.layout = u.out.layout;
    diff.points = u.out.points;
    diff.data = v.out.data - u.out.data;

    JetBatch h = first.out;
    std::vector<SineCache> gates;
    std::vector<JetBatch> hidden;
    if (tape) hidden.push_back(h);
    for (int k = 1; k < depth; ++k) {
        const auto layer = ParamStore::gate_layer(k);
        SineCache z = sine_jet(linear_jet(h, p.matrix(layer), p.vector(layer + 1)), w0);
        JetBatch mixed = product_jet(z.out, diff);
        mixed.data += u.out.data;
        h = std::move(mixed);
        if (tape) {
            gates.push_back(std::move(z));
            hidden.push_back(h);
        }
    }
    const auto head = p.head_layer();
    JetBatch out = linear_jet(h, p.matrix(head), p.vector(head + 1));

    if (tape) {
        tape->input = std::move(input);
        tape->enc_u = std::move(u);
        tape->enc_v = std::move(v);
        tape->first = std::move(first);
        tape->diff = std::move(diff);
        tape->gates = std::move(gates);
        tape->hidden = std::move(hidden);
    }
    return out;
}

// Convenience: jets of the network at raw 4-vectors (columns of `coords`).
inline JetBatch modified_mlp_jet(const ParamStore& p, const Eigen::Ref<const Eigen::MatrixXd>& coords,
                                 JetOrder order = JetOrder::Hessian) {
    return modified_mlp_forward(p, input_jets(coords, order));
}

// Reverse accumulation of d(loss)/d(theta) through the jet computation. `gout` is the
// adjoint of every output component (same layout as the forward output).
inline void modified_mlp_backward(const ParamStore& p, const MlpTape& tape, const JetBatch& gout,
                                  GradAccumulator& grad) {
    const double w0 = p.omega0();
    const int depth = p.shape().depth;
    const JetLayout& L = gout.layout;
    const Eigen::Index n = p.shape().width, P = gout.points;

    JetBatch gh;
    const auto head = p.head_layer();
    linear_jet_backward(tape.hidden.back(), p.matrix(head), gout, grad.matrix(p, head),
                        grad.vector(p, head + 1), &gh);

    JetBatch gu(L.order, n, P), gdiff(L.order, n, P);
    for (int k = depth - 1; k >= 1; --k) {
        const SineCache& z = tape.gates[static_cast<std::size_t>(k - 1)];
        // H_{k+1} = U + Z * D
        gu.data += gh.data;
        JetBatch gz(L.order, n, P);
        product_factor_backward(tape.diff, gh, gz);
        product_factor_backward(z.out, gh, gdiff);
        JetBatch gpre = sine_jet_backward(z, gz, w0);
        const auto layer = ParamStore::gate_layer(k);
        linear_jet_backward(tape.hidden[static_cast<std::size_t>(k - 1)], p.matrix(layer), gpre,
                            grad.matrix(p, layer), grad.vector(p, layer + 1), &gh);
    }
    // D = V - U
    gu.data -= gdiff.data;
    const JetBatch& gv = gdiff;

    JetBatch gpre = sine_jet_backward(tape.first, gh, w0);
    linear_jet_backward(tape.input, p.matrix(ParamStore::kFirst), gpre, grad.matrix(p, ParamStore::kFirst),
                        grad.vector(p, ParamStore::kFirst + 1), nullptr);
    gpre = sine_jet_backward(tape.enc_u, gu, w0);
    linear_jet_backward(tape.input, p.matrix(ParamStore::kEncU), gpre, grad.matrix(p, ParamStore::kEncU),
                        grad.vector(p, ParamStore::kEncU + 1), nullptr);
    gpre = sine_jet_backward(tape.enc_v, gv, w0);
    linear_jet_backward(tape.input, p.matrix(ParamStore::kEncV), gpre, grad.matrix(p, ParamStore::kEncV),
                        grad.vector(p, ParamStore::kEncV + 1), nullptr);
}

// Scalar loss over the network's output jets together with its adjoint.
struct LossAndAdjoint {
    double value = 0.0;
    JetBatch adjoint;
};

// d(loss)/d(theta) for a loss built from the output jets at `coords`. `loss_fn` maps the
// output JetBatch to a LossAndAdjoint.
template <class LossFn>
GradAccumulator loss_param_grad(const ParamStore& p, const Eigen::Ref<const Eigen::MatrixXd>& coords,
                                JetOrder order, LossFn&& loss_fn, double* loss_value = nullptr) {
    MlpTape tape;
    JetBatch out = modified_mlp_forward(p, input_jets(coords, order), &tape);
    LossAndAdjoint la = loss_fn(static_cast<const JetBatch&>(out));
    GradAccumulator g(p);
    modified_mlp_backward(p, tape, la.adjoint, g);
    if (loss_value) *loss_value = la.value;
    return g;
}

}  // namespace vpnf::diffcore
