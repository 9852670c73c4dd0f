#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vpnf/errors.hpp"

namespace vpnf::metrics {

inline constexpr double kNmseFloorDb = -120.0;

// 10 log10( sum ||s_hat - s||^2 / sum ||s||^2 ) over positions (rows) and time (columns),
// clamped below at -120 dB.
inline double nmse_db_from_sums(double error_energy, double signal_energy) {
    if (!(signal_energy > 0.0)) throw MetricError("nmse_db: reference signal is identically zero");
    const double ratio = error_energy / signal_energy;
    if (!(ratio > 0.0)) return kNmseFloorDb;
    return std::max(kNmseFloorDb, 10.0 * std::log10(ratio));
}

inline double nmse_db(const Eigen::Ref<const Eigen::MatrixXd>& reference,
                      const Eigen::Ref<const Eigen::MatrixXd>& predicted) {
    if (reference.rows() != predicted.rows() || reference.cols() != predicted.cols())
        throw MetricError("nmse_db: shape mismatch");
    return nmse_db_from_sums((predicted - reference).squaredNorm(), reference.squaredNorm());
}

// Pearson correlation of one pair of time series after removing each one's mean.
// NaN when either is constant; callers count that as a degenerate position.
inline double centered_correlation(const Eigen::Ref<const Eigen::RowVectorXd>& ref,
                                   const Eigen::Ref<const Eigen::RowVectorXd>& pred) {
    if (ref.size() == 0 || ref.minCoeff() == ref.maxCoeff() || pred.minCoeff() == pred.maxCoeff())
        return std::nan("");
    const Eigen::RowVectorXd r = ref.array() - ref.mean();
    const Eigen::RowVectorXd p = pred.array() - pred.mean();
    const double nr = r.norm(), np = p.norm();
    return std::clamp(p.dot(r) / (np * nr), -1.0, 1.0);
}

// Mean over positions (rows) of the per-position centred correlation. Positions where
// either signal is constant contribute 0 and are counted in `degenerate`.
inline double pcc(const Eigen::Ref<const Eigen::MatrixXd>& reference,
                  const Eigen::Ref<const Eigen::MatrixXd>& predicted, std::size_t* degenerate = nullptr) {
    if (reference.rows() != predicted.rows() || reference.cols() != predicted.cols())
        throw MetricError("pcc: shape mismatch");
    if (reference.rows() == 0) throw MetricError("pcc: no positions");
    double sum = 0.0;
    std::size_t bad = 0;
    for (Eigen::Index d = 0; d < reference.rows(); ++d) {
        const double c = centered_correlation(reference.row(d), predicted.row(d));
        if (std::isnan(c)) ++bad;
        else sum += c;
    }
    if (degenerate) *degenerate = bad;
    return sum / static_cast<double>(reference.rows());
}

// Streaming form of nmse_db and pcc for one channel, fed one position at a time.
class ChannelAccumulator {
public:
    void add(const Eigen::Ref<const Eigen::RowVectorXd>& ref, const Eigen::Ref<const Eigen::RowVectorXd>& pred) {
        error_ += (pred - ref).squaredNorm();
        energy_ += ref.squaredNorm();
        const double c = centered_correlation(ref, pred);
        if (std::isnan(c)) ++degenerate_;
        else pcc_sum_ += c;
        ++positions_;
    }
    double nmse_db() const { return nmse_db_from_sums(error_, energy_); }
    double pcc() const {
        if (positions_ == 0) throw MetricError("pcc: no positions");
        return pcc_sum_ / static_cast<double>(positions_);
    }
    std::size_t degenerate() const { return degenerate_; }

private:
    double error_ = 0.0, energy_ = 0.0, pcc_sum_ = 0.0;
    std::size_t positions_ = 0, degenerate_ = 0;
};

// One evaluation of one model on one room and measurement condition.
struct Report {
    std::string model;
    std::string mode;
    std::uint64_t room_seed = 0;
    std::uint64_t split_seed = 0;
    std::size_t measurements = 0;    // D
    std::size_t evaluated = 0;       // number of evaluation positions
    std::array<double, 4> nmse{};    // per channel W, X, Y, Z (dB)
    std::array<double, 4> pcc_ch{};  // per channel
    std::size_t degenerate_positions = 0;

    // XYZ aggregates average the three per-channel values (dB domain for NMSE).
    double nmse_w() const { return nmse[0]; }
    double nmse_xyz() const { return (nmse[1] + nmse[2] + nmse[3]) / 3.0; }
    double pcc_w() const { return pcc_ch[0]; }
    double pcc_xyz() const { return (pcc_ch[1] + pcc_ch[2] + pcc_ch[3]) / 3.0; }
};

}  // namespace vpnf::metrics
