#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vpnf/allocator.hpp"
#include "vpnf/errors.hpp"
#include "vpnf/fields/field_model.hpp"
#include "vpnf/metrics/evaluate.hpp"
#include "vpnf/random.hpp"
#include "vpnf/roomsim/dataset.hpp"
#include "vpnf/training/losses.hpp"
#include "vpnf/training/optim.hpp"
#include "vpnf/training/sampling.hpp"
#include "vpnf/training/split.hpp"

namespace vpnf::training {

using fields::FieldModel;
using fields::Head;

enum class Penalty { None, Wave, MomentumContinuity };

inline const char* penalty_name(Penalty p) {
    switch (p) {
        case Penalty::None: return "none";
        case Penalty::Wave: return "wave";
        case Penalty::MomentumContinuity: return "momentum+continuity";
    }
    return "?";
}

inline Penalty penalty_from_name(const std::string& s) {
    if (s == "none") return Penalty::None;
    if (s == "wave") return Penalty::Wave;
    if (s == "momentum+continuity") return Penalty::MomentumContinuity;
    throw ConfigurationError("unknown penalty '" + s + "'");
}

// The five compared models are head/penalty combinations.
struct ModelVariant {
    std::string name;
    Head head;
    Penalty penalty;
};

inline ModelVariant model_variant(const std::string& name) {
    if (name == "DANF") return {name, Head::DANF, Penalty::None};
    if (name == "PI-DANF") return {name, Head::DANF, Penalty::MomentumContinuity};
    if (name == "VPNF") return {name, Head::VPNF, Penalty::None};
    if (name == "VPNF-Wave") return {name, Head::VPNF, Penalty::Wave};
    if (name == "VPNF+") return {name, Head::VPNFPlus, Penalty::None};
    throw ConfigurationError("unknown model '" + name + "' (expected DANF, PI-DANF, VPNF, VPNF-Wave or VPNF+)");
}

inline std::string variant_name(Head head, Penalty penalty) {
    if (head == Head::DANF) return penalty == Penalty::MomentumContinuity ? "PI-DANF" : "DANF";
    if (head == Head::VPNFPlus) return "VPNF+";
    return penalty == Penalty::Wave ? "VPNF-Wave" : "VPNF";
}

struct TrainConfig {
    Head head = Head::VPNF;
    Penalty penalty = Penalty::None;
    int depth = 3;
    int width = 512;
    double omega0 = 30.0;
    long iterations = 100000;
    double lr0 = 1e-4;
    double lr_min = 1e-6;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int times_per_batch = 250;
    int collocation_count = 25000;
    int collocation_per_iteration = 25000;
    std::uint64_t seed = 0;
    long validation_interval = 500;
    double eps_data_init = 1.0;
    double eps_penalty_init = 0.1;
    // Wall-clock timings are the only nondeterministic log column; off gives bitwise-stable logs.
    bool record_wall_clock = true;

    void validate() const {
        if (depth < 1 || width < 1 || iterations < 1 || times_per_batch < 1 || collocation_count < 1 ||
            collocation_per_iteration < 1 || validation_interval < 1)
            throw ConfigurationError("TrainConfig: counts must be positive");
        if (collocation_per_iteration > collocation_count)
            throw ConfigurationError("TrainConfig: collocation_per_iteration exceeds collocation_count");
        if (!(lr_min <= lr0) || !(lr_min >= 0.0)) throw ConfigurationError("TrainConfig: need 0 <= lr_min <= lr0");
        if (!(omega0 > 0.0)) throw ConfigurationError("TrainConfig: omega0 must be positive");
        if (!(eps_data_init > 0.0 && eps_penalty_init > 0.0))
            throw ConfigurationError("TrainConfig: initial adaptive weights must be positive");
        if (penalty == Penalty::Wave && head == Head::DANF)
            throw ConfigurationError("TrainConfig: the wave penalty needs a potential head");
        if (penalty == Penalty::MomentumContinuity && head != Head::DANF)
            throw ConfigurationError("TrainConfig: momentum+continuity penalties apply to the DANF head");
    }
};

struct ValidationRecord {
    long iteration = 0;
    double nmse_w_db = 0.0;
};

// Index of the best (lowest W-channel NMSE) record; ties resolve to the earliest.
inline std::size_t select_checkpoint(const std::vector<ValidationRecord>& history) {
    if (history.empty()) throw UsageError("select_checkpoint: empty history");
    std::size_t best = 0;
    for (std::size_t i = 1; i < history.size(); ++i)
        if (history[i].nmse_w_db < history[best].nmse_w_db) best = i;
    return best;
}

inline std::size_t select_checkpoint(const std::vector<double>& nmse_history) {
    std::vector<ValidationRecord> h;
    for (std::size_t i = 0; i < nmse_history.size(); ++i) h.push_back({static_cast<long>(i), nmse_history[i]});
    return select_checkpoint(h);
}

struct LogRow {
    long iteration = 0;
    double data_loss = 0.0;
    double penalty_loss = std::numeric_limits<double>::quiet_NaN();  // NaN when no penalty
    std::vector<double> eps;
    double lr = 0.0;
    double wall_ms = 0.0;
    double validation_nmse_w = std::numeric_limits<double>::quiet_NaN();  // NaN between validations
};

struct TrainResult {
    FieldModel best;
    std::vector<ValidationRecord> history;
    std::size_t best_index = 0;
    std::vector<LogRow> log;
    LossState loss_state;
};

// A mini-batch of measured samples: physical query points and FOA targets (w, x, y, z).
struct DataBatch {
    Eigen::MatrixXd points;
    Eigen::MatrixXd targets;
};

inline DataBatch gather_batch(const roomsim::FoaDataset& ds, const std::vector<std::size_t>& positions,
                              const std::vector<std::size_t>& times) {
    DataBatch b;
    const auto n = static_cast<Eigen::Index>(positions.size() * times.size());
    b.points.resize(4, n);
    b.targets.resize(4, n);
    Eigen::Index col = 0;
    for (std::size_t pos : positions) {
        const Eigen::Vector3d r = ds.position(pos);
        for (std::size_t l : times) {
            b.points.block<3, 1>(0, col) = r;
            b.points(3, col) = ds.time(static_cast<int>(l));
            for (int c = 0; c < 4; ++c) b.targets(c, col) = ds.rir(pos, c)[l];
            ++col;
        }
    }
    return b;
}

// Builds an untrained model for the dataset: inputs are centred on the measurement cube
// and scaled so it spans [-1, 1]; the output scale follows the RMS of the training data.
inline FieldModel make_model(const TrainConfig& cfg, const roomsim::FoaDataset& ds, const Split& split) {
    double sum2 = 0.0;
    std::size_t count = 0;
    for (std::size_t pos : split.train)
        for (int c = 0; c < 4; ++c) {
            const float* x = ds.rir(pos, c);
            for (int l = 0; l < ds.samples; ++l) sum2 += static_cast<double>(x[l]) * x[l];
            count += static_cast<std::size_t>(ds.samples);
        }
    double rms = count ? std::sqrt(sum2 / static_cast<double>(count)) : 1.0;
    if (!(rms > 0.0)) rms = 1.0;
    const double half = 0.5 * ds.grid.extent();
    const double out_scale = fields::is_potential_head(cfg.head) ? rms * half : rms;
    const auto norm = fields::NormalizationRecord::fit(ds.grid.center(), half, ds.medium.sound_speed, out_scale);
    return FieldModel::create(cfg.head, cfg.width, cfg.depth, cfg.omega0, norm, ds.medium, cfg.seed);
}

namespace detail {

inline JetOrder data_order(Head h) { return fields::is_potential_head(h) ? JetOrder::Gradient : JetOrder::Value; }

// Loss terms of one iteration with their adjoints already folded into `grad`.
struct StepLosses {
    double data = 0.0;
    std::vector<double> penalties;
};

inline void add_scaled(diffcore::JetBatch& adj, double w) { adj.data *= w; }

}  // namespace detail

// Evaluates the configured objective at one batch and accumulates d(objective)/d(theta)
// into `grad` and d(objective)/d(log eps) into `log_eps_grad`. Returns the raw terms.
inline detail::StepLosses objective_gradient(const FieldModel& model, const TrainConfig& cfg, const DataBatch& data,
                                             const Eigen::MatrixXd* collocation, const LossState& state,
                                             diffcore::GradAccumulator& grad, std::vector<double>& log_eps_grad) {
    const double c0 = model.medium.sound_speed;
    detail::StepLosses out;

    fields::FieldTape data_tape;
    JetBatch data_out = fields::field_forward(model, data.points, detail::data_order(model.head), &data_tape);
    LossAndAdjoint data_loss = fields::is_potential_head(model.head) ? data_loss_potential(data_out, data.targets, c0)
                                                                     : data_loss_direct(data_out, data.targets);
    out.data = data_loss.value;

    if (cfg.penalty == Penalty::None) {
        log_eps_grad.clear();
        fields::field_backward(model, data_tape, std::move(data_loss.adjoint), grad);
        return out;
    }
    if (!collocation) throw UsageError("objective_gradient: penalty needs collocation points");

    fields::FieldTape col_tape;
    std::vector<LossAndAdjoint> penalty_terms;
    if (cfg.penalty == Penalty::Wave) {
        JetBatch psi = fields::field_forward(model, *collocation, JetOrder::HessianDiagonal, &col_tape);
        penalty_terms.push_back(wave_loss(psi, c0));
    } else {
        JetBatch o = fields::field_forward(model, *collocation, JetOrder::Gradient, &col_tape);
        PenaltyLosses pl = pidanf_penalties(o, c0);
        penalty_terms.push_back(std::move(pl.momentum));
        penalty_terms.push_back(std::move(pl.continuity));
    }
    std::vector<double> values{data_loss.value};
    for (const auto& t : penalty_terms) {
        values.push_back(t.value);
        out.penalties.push_back(t.value);
    }
    const AdaptiveTotal total = adaptive_total(values, state);
    log_eps_grad = total.log_eps_grad;

    detail::add_scaled(data_loss.adjoint, total.term_weights[0]);
    fields::field_backward(model, data_tape, std::move(data_loss.adjoint), grad);
    JetBatch penalty_adj = std::move(penalty_terms[0].adjoint);
    penalty_adj.data *= total.term_weights[1];
    for (std::size_t k = 1; k < penalty_terms.size(); ++k)
        penalty_adj.data += total.term_weights[k + 1] * penalty_terms[k].adjoint.data;
    fields::field_backward(model, col_tape, std::move(penalty_adj), grad);
    return out;
}

using ProgressFn = std::function<void(const LogRow&)>;

// Trains `model` in place and returns the best validation checkpoint. Per iteration:
// draw times_per_batch time indices and use every training position at those times; with a
// penalty, draw a fresh Latin hypercube of collocation points over the cube x [0, T] and
// balance the terms adaptively; one Adam step with cosine-annealed learning rate. Every
// validation_interval iterations the W-channel NMSE on the validation split is recorded.
inline TrainResult train(FieldModel model, const roomsim::FoaDataset& ds, const Split& split, const TrainConfig& cfg,
                         const ProgressFn& progress = {}) {
    cfg.validate();
    if (split.train.empty()) throw ConfigurationError("train: split has no training positions");
    if (split.validation.empty()) throw ConfigurationError("train: split has no validation positions");
    if (model.head != cfg.head) throw ConfigurationError("train: model head does not match configuration");
    tune_allocator();

    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    Adam adam(model.params.size(), {cfg.beta1, cfg.beta2, cfg.adam_eps});
    TrainResult result;
    result.loss_state.log_eps.push_back(std::log(cfg.eps_data_init));
    if (cfg.penalty == Penalty::Wave) result.loss_state.log_eps.push_back(std::log(cfg.eps_penalty_init));
    if (cfg.penalty == Penalty::MomentumContinuity) {
        result.loss_state.log_eps.push_back(std::log(cfg.eps_penalty_init));
        result.loss_state.log_eps.push_back(std::log(cfg.eps_penalty_init));
    }
    const bool adaptive = cfg.penalty != Penalty::None;
    Adam adam_eps(static_cast<Eigen::Index>(result.loss_state.log_eps.size()), {cfg.beta1, cfg.beta2, cfg.adam_eps});

    Eigen::VectorXd lo(4), hi(4);
    lo << ds.grid.origin, 0.0;
    hi << ds.grid.origin + Eigen::Vector3d::Constant(ds.grid.extent()), ds.duration;

    const auto t_start = std::chrono::steady_clock::now();
    diffcore::GradAccumulator grad(model.params);
    std::vector<double> log_eps_grad;
    double best_nmse = std::numeric_limits<double>::infinity();

    for (long it = 1; it <= cfg.iterations; ++it) {
        const double lr = cosine_lr(it - 1, cfg.iterations, cfg.lr0, cfg.lr_min);
        const auto times = rng.choose(static_cast<std::size_t>(ds.samples), static_cast<std::size_t>(cfg.times_per_batch));
        const DataBatch batch = gather_batch(ds, split.train, times);
        Eigen::MatrixXd collocation;
        if (adaptive) {
            Eigen::MatrixXd pool = lhs_sample(static_cast<std::size_t>(cfg.collocation_count), lo, hi, rng);
            if (cfg.collocation_per_iteration == cfg.collocation_count) {
                collocation = std::move(pool);
            } else {
                const auto pick = rng.choose(static_cast<std::size_t>(cfg.collocation_count),
                                             static_cast<std::size_t>(cfg.collocation_per_iteration));
                collocation.resize(4, static_cast<Eigen::Index>(pick.size()));
                for (std::size_t k = 0; k < pick.size(); ++k)
                    collocation.col(static_cast<Eigen::Index>(k)) = pool.col(static_cast<Eigen::Index>(pick[k]));
            }
        }

        grad.zero();
        const detail::StepLosses losses =
            objective_gradient(model, cfg, batch, adaptive ? &collocation : nullptr, result.loss_state, grad, log_eps_grad);

        double penalty_sum = 0.0;
        for (double p : losses.penalties) penalty_sum += p;
        if (!std::isfinite(losses.data) || !std::isfinite(penalty_sum) || !grad.values.allFinite()) {
            std::ostringstream os;
            os << "training diverged at iteration " << it << ": data_loss=" << losses.data
               << " penalty_loss=" << penalty_sum << " lr=" << lr << " |theta|=" << model.params.values().norm()
               << " grad_finite=" << grad.values.allFinite() << " log_eps=[";
            for (double s : result.loss_state.log_eps) os << s << ' ';
            os << "]";
            throw TrainingDiverged(os.str());
        }

        adam.step(model.params.values(), grad.values, lr);
        if (adaptive) {
            Eigen::Map<Eigen::VectorXd> s(result.loss_state.log_eps.data(), static_cast<Eigen::Index>(log_eps_grad.size()));
            adam_eps.step(s, Eigen::Map<const Eigen::VectorXd>(log_eps_grad.data(), s.size()), lr);
        }

        LogRow row;
        row.iteration = it;
        row.data_loss = losses.data;
        if (adaptive) row.penalty_loss = penalty_sum;
        for (double s : result.loss_state.log_eps) row.eps.push_back(std::exp(s));
        row.lr = lr;

        if (it % cfg.validation_interval == 0 || it == cfg.iterations) {
            const double v = metrics::nmse_w_db(model, ds, split.validation);
            row.validation_nmse_w = v;
            result.history.push_back({it, v});
            if (v < best_nmse || result.history.size() == 1) {
                best_nmse = v;
                result.best = model;
                result.best_index = result.history.size() - 1;
            }
        }
        if (cfg.record_wall_clock)
            row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
        if (progress) progress(row);
        result.log.push_back(std::move(row));
    }
    return result;
}

}  // namespace vpnf::training
