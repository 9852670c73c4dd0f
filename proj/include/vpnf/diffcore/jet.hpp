#pragma once

#include <array>
#include <cstddef>
#include <utility>

#include <Eigen/Dense>

#include "vpnf/errors.hpp"

namespace vpnf::diffcore {

// Coordinates of every jet are (x, y, z, tau). Inside the network tau = c0 * t in
// normalized units; jets handed back in physical units use t in seconds instead.
inline constexpr int kInputDim = 4;
inline constexpr int kHessEntries = 10;

// How many derivative orders a batch carries.
//   Value           value only
//   Gradient        value + 4 first derivatives
//   HessianDiagonal value + gradient + the 4 pure second derivatives
//   Hessian         value + gradient + all 10 unique second derivatives
enum class JetOrder { Value, Gradient, HessianDiagonal, Hessian };

// Index of the (i, j) entry of a symmetric 4x4 matrix stored as its upper triangle, row-major.
constexpr int sym_index(int i, int j) {
    if (i > j) std::swap(i, j);
    return i * kInputDim - i * (i - 1) / 2 + (j - i);
}

// Component layout of one jet: 0 is the value, 1..4 the gradient, then the stored
// second-derivative pairs.
struct JetLayout {
    JetOrder order = JetOrder::Value;
    int components = 1;
    int hess_count = 0;
    std::array<std::pair<int, int>, kHessEntries> pairs{};

    static constexpr JetLayout of(JetOrder order) {
        JetLayout l;
        l.order = order;
        switch (order) {
            case JetOrder::Value:
                break;
            case JetOrder::Gradient:
                l.components = 1 + kInputDim;
                break;
            case JetOrder::HessianDiagonal:
                l.hess_count = kInputDim;
                for (int i = 0; i < kInputDim; ++i) l.pairs[i] = {i, i};
                l.components = 1 + kInputDim + l.hess_count;
                break;
            case JetOrder::Hessian: {
                l.hess_count = kHessEntries;
                int h = 0;
                for (int i = 0; i < kInputDim; ++i)
                    for (int j = i; j < kInputDim; ++j) l.pairs[h++] = {i, j};
                l.components = 1 + kInputDim + l.hess_count;
                break;
            }
        }
        return l;
    }

    constexpr bool has_gradient() const { return order != JetOrder::Value; }
    constexpr bool has_hessian() const { return hess_count > 0; }
    static constexpr int value_index() { return 0; }
    static constexpr int grad_index(int i) { return 1 + i; }
    static constexpr int hess_index(int h) { return 1 + kInputDim + h; }

    // Component index of the (i, j) second derivative, or -1 if this layout does not store it.
    constexpr int hess_component(int i, int j) const {
        for (int h = 0; h < hess_count; ++h) {
            auto [a, b] = pairs[h];
            if ((a == i && b == j) || (a == j && b == i)) return hess_index(h);
        }
        return -1;
    }
};

// A batch of jets for `units` channels at `points` evaluation points.
// Storage is component-major: data.middleCols(c * points, points) holds component c for
// every unit (row) and point (column), so one GEMM transforms all components at once.
struct JetBatch {
    JetLayout layout = JetLayout::of(JetOrder::Value);
    Eigen::Index points = 0;
    Eigen::MatrixXd data;

    JetBatch() = default;
    JetBatch(JetOrder order, Eigen::Index units, Eigen::Index npoints)
        : layout(JetLayout::of(order)), points(npoints),
          data(Eigen::MatrixXd::Zero(units, layout.components * npoints)) {}

    Eigen::Index units() const { return data.rows(); }
    int components() const { return layout.components; }

    auto comp(int c) { return data.middleCols(static_cast<Eigen::Index>(c) * points, points); }
    auto comp(int c) const { return data.middleCols(static_cast<Eigen::Index>(c) * points, points); }
    auto value() { return comp(0); }
    auto value() const { return comp(0); }
    auto grad(int i) { return comp(JetLayout::grad_index(i)); }
    auto grad(int i) const { return comp(JetLayout::grad_index(i)); }

    double& at(Eigen::Index unit, int component, Eigen::Index point) {
        return data(unit, component * points + point);
    }
    double at(Eigen::Index unit, int component, Eigen::Index point) const {
        return data(unit, component * points + point);
    }
};

// One scalar with its full gradient and (symmetric) Hessian.
struct Jet2 {
    double value = 0.0;
    std::array<double, kInputDim> grad{};
    std::array<double, kHessEntries> hess{};

    double h(int i, int j) const { return hess[sym_index(i, j)]; }
    double& h(int i, int j) { return hess[sym_index(i, j)]; }

    // Missing components of lower-order layouts read as zero.
    static Jet2 from_batch(const JetBatch& b, Eigen::Index unit, Eigen::Index point) {
        Jet2 j;
        j.value = b.at(unit, 0, point);
        if (b.layout.has_gradient())
            for (int i = 0; i < kInputDim; ++i)
                j.grad[i] = b.at(unit, JetLayout::grad_index(i), point);
        for (int h = 0; h < b.layout.hess_count; ++h) {
            auto [a, c] = b.layout.pairs[h];
            j.hess[sym_index(a, c)] = b.at(unit, JetLayout::hess_index(h), point);
        }
        return j;
    }
};

// Seed jets for the identity map on the 4 inputs: row i has value x_i, gradient e_i and zero
// second derivatives.
inline JetBatch input_jets(const Eigen::Ref<const Eigen::MatrixXd>& coords, JetOrder order) {
    if (coords.rows() != kInputDim)
        throw ConfigurationError("input_jets: expected 4 coordinate rows");
    JetBatch b(order, kInputDim, coords.cols());
    b.value() = coords;
    if (b.layout.has_gradient())
        for (int i = 0; i < kInputDim; ++i) b.grad(i).row(i).setOnes();
    return b;
}

}  // namespace vpnf::diffcore
