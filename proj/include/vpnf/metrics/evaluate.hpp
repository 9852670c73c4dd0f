#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "vpnf/fields/field_model.hpp"
#include "vpnf/metrics/metrics.hpp"
#include "vpnf/roomsim/dataset.hpp"
#include "vpnf/training/split.hpp"

namespace vpnf::metrics {

// Physical (x, y, z, t) query points for every sample of the given positions, position-major.
inline Eigen::MatrixXd space_time_points(const roomsim::FoaDataset& ds, const std::vector<std::size_t>& positions,
                                         std::size_t first, std::size_t count) {
    const Eigen::Index L = ds.samples;
    Eigen::MatrixXd pts(4, static_cast<Eigen::Index>(count) * L);
    for (std::size_t k = 0; k < count; ++k) {
        const Eigen::Vector3d r = ds.position(positions[first + k]);
        for (Eigen::Index l = 0; l < L; ++l) {
            const Eigen::Index col = static_cast<Eigen::Index>(k) * L + l;
            pts.block<3, 1>(0, col) = r;
            pts(3, col) = ds.time(static_cast<int>(l));
        }
    }
    return pts;
}

// Runs `fn(position_index, predicted 4 x L)` over the positions in chunks.
template <class Fn>
void for_each_prediction(const fields::FieldModel& model, const roomsim::FoaDataset& ds,
                         const std::vector<std::size_t>& positions, Fn&& fn, std::size_t chunk_positions = 16) {
    const Eigen::Index L = ds.samples;
    for (std::size_t first = 0; first < positions.size(); first += chunk_positions) {
        const std::size_t n = std::min(chunk_positions, positions.size() - first);
        const Eigen::MatrixXd pred = fields::predict_foa_batch(model, space_time_points(ds, positions, first, n));
        for (std::size_t k = 0; k < n; ++k)
            fn(positions[first + k], pred.middleCols(static_cast<Eigen::Index>(k) * L, L));
    }
}

inline Eigen::RowVectorXd reference_row(const roomsim::FoaDataset& ds, std::size_t pos, int channel) {
    return Eigen::Map<const Eigen::Matrix<float, 1, Eigen::Dynamic>>(ds.rir(pos, channel), ds.samples).cast<double>();
}

// W-channel NMSE (dB) over the given positions; the checkpoint-selection score.
inline double nmse_w_db(const fields::FieldModel& model, const roomsim::FoaDataset& ds,
                        const std::vector<std::size_t>& positions) {
    ChannelAccumulator acc;
    for_each_prediction(model, ds, positions, [&](std::size_t pos, const Eigen::Ref<const Eigen::MatrixXd>& pred) {
        acc.add(reference_row(ds, pos, 0), pred.row(0));
    });
    return acc.nmse_db();
}

// Per-channel NMSE and PCC of the model's predictions at every evaluation position.
inline Report evaluate(const fields::FieldModel& model, const roomsim::FoaDataset& ds,
                       const std::vector<std::size_t>& positions) {
    if (positions.empty()) throw MetricError("evaluate: no evaluation positions");
    std::array<ChannelAccumulator, 4> acc;
    for_each_prediction(model, ds, positions, [&](std::size_t pos, const Eigen::Ref<const Eigen::MatrixXd>& pred) {
        for (int c = 0; c < 4; ++c) acc[c].add(reference_row(ds, pos, c), pred.row(c));
    });
    Report r;
    r.model = fields::head_name(model.head);
    r.room_seed = ds.room.seed;
    r.evaluated = positions.size();
    for (int c = 0; c < 4; ++c) {
        r.nmse[c] = acc[c].nmse_db();
        r.pcc_ch[c] = acc[c].pcc();
        r.degenerate_positions += acc[c].degenerate();
    }
    return r;
}

inline Report evaluate(const fields::FieldModel& model, const roomsim::FoaDataset& ds, const training::Split& split) {
    Report r = evaluate(model, ds, split.evaluation);
    r.mode = training::split_mode_name(split.mode);
    r.split_seed = split.seed;
    r.measurements = split.train.size();
    return r;
}

}  // namespace vpnf::metrics
