#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vpnf/errors.hpp"
#include "vpnf/random.hpp"

namespace vpnf::diffcore {

enum class LayerRole : std::uint32_t {
    EncoderUWeight = 0,
    EncoderUBias = 1,
    EncoderVWeight = 2,
    EncoderVBias = 3,
    HiddenWeight = 4,
    HiddenBias = 5,
    HeadWeight = 6,
    HeadBias = 7,
};

inline const char* role_name(LayerRole r) {
    switch (r) {
        case LayerRole::EncoderUWeight: return "encoder-U.weight";
        case LayerRole::EncoderUBias: return "encoder-U.bias";
        case LayerRole::EncoderVWeight: return "encoder-V.weight";
        case LayerRole::EncoderVBias: return "encoder-V.bias";
        case LayerRole::HiddenWeight: return "hidden.weight";
        case LayerRole::HiddenBias: return "hidden.bias";
        case LayerRole::HeadWeight: return "head.weight";
        case LayerRole::HeadBias: return "head.bias";
    }
    return "?";
}

struct LayerRecord {
    LayerRole role;
    Eigen::Index rows;
    Eigen::Index cols;
    Eigen::Index offset;
    Eigen::Index size() const { return rows * cols; }
    bool operator==(const LayerRecord&) const = default;
};

// Topology of the modified MLP. `depth` counts hidden layers: the first is a plain sine
// layer on the input, the remaining depth-1 are gated by the two encoders.
struct MlpShape {
    int input_dim = 4;
    int width = 512;
    int depth = 3;
    int output_dim = 1;
    bool operator==(const MlpShape&) const = default;
};

// Flat parameter vector plus the manifest describing how it splits into layers.
// Matrices are stored column-major, matching Eigen's default.
class ParamStore {
public:
    ParamStore() = default;

    explicit ParamStore(const MlpShape& shape, double omega0 = 30.0) : shape_(shape), omega0_(omega0) {
        if (shape.width < 1 || shape.depth < 1 || shape.output_dim < 1 || shape.input_dim < 1)
            throw ConfigurationError("ParamStore: width, depth, output_dim must be positive");
        const Eigen::Index n = shape.width, in = shape.input_dim;
        add(LayerRole::EncoderUWeight, n, in);
        add(LayerRole::EncoderUBias, n, 1);
        add(LayerRole::EncoderVWeight, n, in);
        add(LayerRole::EncoderVBias, n, 1);
        add(LayerRole::HiddenWeight, n, in);
        add(LayerRole::HiddenBias, n, 1);
        for (int k = 1; k < shape.depth; ++k) {
            add(LayerRole::HiddenWeight, n, n);
            add(LayerRole::HiddenBias, n, 1);
        }
        add(LayerRole::HeadWeight, shape.output_dim, n);
        add(LayerRole::HeadBias, shape.output_dim, 1);
        values_ = Eigen::VectorXd::Zero(next_offset_);
    }

    // Rebuild from a manifest read off disk; it must match the layout `shape` implies.
    ParamStore(const MlpShape& shape, double omega0, const std::vector<LayerRecord>& manifest,
               Eigen::VectorXd values)
        : ParamStore(shape, omega0) {
        if (manifest != manifest_)
            throw ConfigurationError("ParamStore: manifest does not match the configured topology");
        if (values.size() != values_.size())
            throw ConfigurationError("ParamStore: parameter count does not match manifest");
        values_ = std::move(values);
    }

    const MlpShape& shape() const { return shape_; }
    double omega0() const { return omega0_; }
    const std::vector<LayerRecord>& manifest() const { return manifest_; }
    Eigen::Index size() const { return values_.size(); }

    Eigen::VectorXd& values() { return values_; }
    const Eigen::VectorXd& values() const { return values_; }

    // Layer views. Index layout: 0 U.w, 1 U.b, 2 V.w, 3 V.b, 4 H1.w, 5 H1.b,
    // 6 + 2(k-1) gate k weight, then its bias, and the head last.
    Eigen::Map<const Eigen::MatrixXd> matrix(std::size_t layer) const {
        const auto& r = manifest_.at(layer);
        return {values_.data() + r.offset, r.rows, r.cols};
    }
    Eigen::Map<Eigen::MatrixXd> matrix(std::size_t layer) {
        const auto& r = manifest_.at(layer);
        return {values_.data() + r.offset, r.rows, r.cols};
    }
    Eigen::Map<const Eigen::VectorXd> vector(std::size_t layer) const {
        const auto& r = manifest_.at(layer);
        return {values_.data() + r.offset, r.size()};
    }
    Eigen::Map<Eigen::VectorXd> vector(std::size_t layer) {
        const auto& r = manifest_.at(layer);
        return {values_.data() + r.offset, r.size()};
    }

    static constexpr std::size_t kEncU = 0, kEncV = 2, kFirst = 4;
    static std::size_t gate_layer(int k) { return kFirst + 2 * static_cast<std::size_t>(k); }
    std::size_t head_layer() const { return manifest_.size() - 2; }

    // SIREN initialization. Layers that read the raw input (both encoders and the first
    // hidden layer) draw weights from U(-1/n_in, 1/n_in); every later layer from
    // U(-sqrt(6/n_in)/w0, sqrt(6/n_in)/w0). Biases from U(-1/sqrt(n_in), 1/sqrt(n_in)).
    void init_siren(std::uint64_t seed) {
        Rng rng(seed);
        // Records always come in (weight, bias) pairs.
        for (std::size_t i = 0; i + 1 < manifest_.size(); i += 2) {
            const auto& w = manifest_[i];
            const auto& b = manifest_[i + 1];
            const double fan_in = static_cast<double>(w.cols);
            const bool reads_input = i <= kFirst;
            const double wbound = reads_input ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / omega0_;
            const double bbound = 1.0 / std::sqrt(fan_in);
            for (Eigen::Index k = 0; k < w.size(); ++k) values_[w.offset + k] = rng.uniform(-wbound, wbound);
            for (Eigen::Index k = 0; k < b.size(); ++k) values_[b.offset + k] = rng.uniform(-bbound, bbound);
        }
    }

private:
    void add(LayerRole role, Eigen::Index rows, Eigen::Index cols) {
        manifest_.push_back({role, rows, cols, next_offset_});
        next_offset_ += rows * cols;
    }

    MlpShape shape_;
    double omega0_ = 30.0;
    std::vector<LayerRecord> manifest_;
    Eigen::Index next_offset_ = 0;
    Eigen::VectorXd values_;
};

// dLoss/dtheta aligned with a ParamStore.
struct GradAccumulator {
    Eigen::VectorXd values;

    GradAccumulator() = default;
    explicit GradAccumulator(const ParamStore& p) : values(Eigen::VectorXd::Zero(p.size())) {}

    void zero() { values.setZero(); }
    Eigen::Map<Eigen::MatrixXd> matrix(const ParamStore& p, std::size_t layer) {
        const auto& r = p.manifest().at(layer);
        return {values.data() + r.offset, r.rows, r.cols};
    }
    Eigen::Map<Eigen::VectorXd> vector(const ParamStore& p, std::size_t layer) {
        const auto& r = p.manifest().at(layer);
        return {values.data() + r.offset, r.size()};
    }
};

}  // namespace vpnf::diffcore
