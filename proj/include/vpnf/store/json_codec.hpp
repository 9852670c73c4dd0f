#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "vpnf/errors.hpp"
#include "vpnf/fields/field_model.hpp"
#include "vpnf/physics/medium.hpp"
#include "vpnf/roomsim/dataset.hpp"
#include "vpnf/roomsim/room.hpp"
#include "vpnf/training/split.hpp"
#include "vpnf/training/trainer.hpp"

namespace vpnf::store {

using nlohmann::json;

// Doubles are written with round-trip precision, so every codec below is bit-exact.

namespace detail {

inline json vec3(const Eigen::Vector3d& v) { return json::array({v[0], v[1], v[2]}); }

inline Eigen::Vector3d vec3(const json& j, const char* key) {
    if (!j.is_array() || j.size() != 3) throw FormatError(std::string(key) + ": expected an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

// Rejects unknown keys so that typos in configuration files fail loudly.
inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
    if (!j.is_object()) throw ConfigurationError(std::string(what) + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigurationError(std::string(what) + ": unknown key '" + it.key() + "'");
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline json to_json(const physics::Medium& m) { return {{"density", m.density}, {"sound_speed", m.sound_speed}}; }

inline physics::Medium medium_from_json(const json& j) {
    detail::check_keys(j, {"density", "sound_speed"}, "medium");
    physics::Medium m;
    detail::read_opt(j, "density", m.density);
    detail::read_opt(j, "sound_speed", m.sound_speed);
    m.validate();
    return m;
}

inline json to_json(const roomsim::RoomSpec& r) {
    return {{"dims", detail::vec3(r.dims)},
            {"wall_absorption", r.wall_absorption},
            {"source_pos", detail::vec3(r.source_pos)},
            {"cube_origin", detail::vec3(r.cube_origin)},
            {"cube_size", r.cube_size},
            {"seed", r.seed}};
}

inline roomsim::RoomSpec room_from_json(const json& j) {
    roomsim::RoomSpec r;
    r.dims = detail::vec3(j.at("dims"), "dims");
    r.wall_absorption = j.at("wall_absorption").get<std::array<double, 6>>();
    r.source_pos = detail::vec3(j.at("source_pos"), "source_pos");
    r.cube_origin = detail::vec3(j.at("cube_origin"), "cube_origin");
    r.cube_size = j.at("cube_size").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
}

inline json to_json(const roomsim::GridSpec& g) {
    return {{"origin", detail::vec3(g.origin)}, {"spacing", g.spacing}, {"count", g.count}};
}

inline roomsim::GridSpec grid_from_json(const json& j) {
    roomsim::GridSpec g;
    g.origin = detail::vec3(j.at("origin"), "origin");
    g.spacing = j.at("spacing").get<double>();
    g.count = j.at("count").get<int>();
    return g;
}

inline json to_json(const fields::NormalizationRecord& n) {
    return {{"center", detail::vec3(n.center)},
            {"spatial_half_extent", n.spatial_half_extent},
            {"time_scale", n.time_scale},
            {"input_scale", n.input_scale},
            {"output_scale", n.output_scale}};
}

inline fields::NormalizationRecord normalization_from_json(const json& j) {
    fields::NormalizationRecord n;
    n.center = detail::vec3(j.at("center"), "center");
    n.spatial_half_extent = j.at("spatial_half_extent").get<double>();
    n.time_scale = j.at("time_scale").get<double>();
    n.input_scale = j.at("input_scale").get<double>();
    n.output_scale = j.at("output_scale").get<double>();
    return n;
}

inline json to_json(const training::Split& s) {
    return {{"mode", training::split_mode_name(s.mode)},
            {"seed", s.seed},
            {"train", s.train},
            {"validation", s.validation},
            {"evaluation", s.evaluation}};
}

inline training::Split split_from_json(const json& j) {
    training::Split s;
    s.mode = training::split_mode_from_name(j.at("mode").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train = j.at("train").get<std::vector<std::size_t>>();
    s.validation = j.at("validation").get<std::vector<std::size_t>>();
    s.evaluation = j.at("evaluation").get<std::vector<std::size_t>>();
    return s;
}

// Checks a split against the dataset it will index.
inline void check_split(const training::Split& s, std::size_t positions) {
    std::vector<char> seen(positions, 0);
    for (const auto* part : {&s.train, &s.validation, &s.evaluation})
        for (std::size_t i : *part) {
            if (i >= positions) throw ConfigurationError("split index " + std::to_string(i) + " out of range");
            if (seen[i]) throw ConfigurationError("split index " + std::to_string(i) + " appears twice");
            seen[i] = 1;
        }
}

inline json to_json(const training::TrainConfig& c) {
    return {{"model", training::variant_name(c.head, c.penalty)},
            {"depth", c.depth},
            {"width", c.width},
            {"omega0", c.omega0},
            {"iterations", c.iterations},
            {"lr0", c.lr0},
            {"lr_min", c.lr_min},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"adam_eps", c.adam_eps},
            {"times_per_batch", c.times_per_batch},
            {"collocation_count", c.collocation_count},
            {"collocation_per_iteration", c.collocation_per_iteration},
            {"seed", c.seed},
            {"validation_interval", c.validation_interval},
            {"eps_data_init", c.eps_data_init},
            {"eps_penalty_init", c.eps_penalty_init},
            {"record_wall_clock", c.record_wall_clock}};
}

// Applies the keys present in `j` on top of `base`.
inline training::TrainConfig train_config_from_json(const json& j, training::TrainConfig base = {}) {
    detail::check_keys(j,
                       {"model", "depth", "width", "omega0", "iterations", "lr0", "lr_min", "beta1", "beta2",
                        "adam_eps", "times_per_batch", "collocation_count", "collocation_per_iteration", "seed",
                        "validation_interval", "eps_data_init", "eps_penalty_init", "record_wall_clock"},
                       "train config");
    if (j.contains("model")) {
        const auto v = training::model_variant(j.at("model").get<std::string>());
        base.head = v.head;
        base.penalty = v.penalty;
    }
    detail::read_opt(j, "depth", base.depth);
    detail::read_opt(j, "width", base.width);
    detail::read_opt(j, "omega0", base.omega0);
    detail::read_opt(j, "iterations", base.iterations);
    detail::read_opt(j, "lr0", base.lr0);
    detail::read_opt(j, "lr_min", base.lr_min);
    detail::read_opt(j, "beta1", base.beta1);
    detail::read_opt(j, "beta2", base.beta2);
    detail::read_opt(j, "adam_eps", base.adam_eps);
    detail::read_opt(j, "times_per_batch", base.times_per_batch);
    detail::read_opt(j, "collocation_count", base.collocation_count);
    detail::read_opt(j, "collocation_per_iteration", base.collocation_per_iteration);
    detail::read_opt(j, "seed", base.seed);
    detail::read_opt(j, "validation_interval", base.validation_interval);
    detail::read_opt(j, "eps_data_init", base.eps_data_init);
    detail::read_opt(j, "eps_penalty_init", base.eps_penalty_init);
    detail::read_opt(j, "record_wall_clock", base.record_wall_clock);
    return base;
}

// Rooms x measurement conditions x models.
struct ExperimentConfig {
    int rooms = 10;
    std::vector<std::uint64_t> room_seeds;  // overrides `rooms` when non-empty
    std::uint64_t base_seed = 1;
    double fs = 8000.0;
    double duration = 0.1;
    int grid_count = 21;
    physics::Medium medium;
    std::vector<std::size_t> volume_measurements{30, 50, 70, 100, 150, 200};
    std::vector<std::size_t> surface_measurements{100, 200};
    std::uint64_t split_seed = 0;
    std::vector<std::string> models{"DANF", "PI-DANF", "VPNF", "VPNF-Wave", "VPNF+"};
    json train = json::object();  // TrainConfig overrides
    std::string output_dir = "experiment";

    std::vector<std::uint64_t> seeds() const {
        if (!room_seeds.empty()) return room_seeds;
        std::vector<std::uint64_t> s;
        for (int i = 0; i < rooms; ++i) s.push_back(base_seed + static_cast<std::uint64_t>(i));
        return s;
    }

    // Checks only what simulation needs.
    void validate_simulation() const {
        if (room_seeds.empty() && rooms < 1) throw ConfigurationError("experiment: need at least one room");
        if (!(fs > 0.0 && duration > 0.0)) throw ConfigurationError("experiment: fs and duration must be positive");
        if (grid_count < 3) throw ConfigurationError("experiment: grid_count must be at least 3");
        medium.validate();
    }

    void validate() const {
        validate_simulation();
        for (const auto& m : models) training::model_variant(m);
        train_config_from_json(train);
        const std::size_t n = static_cast<std::size_t>(grid_count);
        const std::size_t volume = n * n * n, surface = volume - (n - 2) * (n - 2) * (n - 2);
        for (std::size_t d : volume_measurements)
            if (d == 0 || d + training::kValidationCount > volume)
                throw ConfigurationError("experiment: volume D=" + std::to_string(d) + " does not fit the grid");
        for (std::size_t d : surface_measurements)
            if (d == 0 || d + training::kValidationCount > surface)
                throw ConfigurationError("experiment: surface D=" + std::to_string(d) + " does not fit the surface pool");
    }
};

inline json to_json(const ExperimentConfig& c) {
    return {{"rooms", c.rooms},
            {"room_seeds", c.room_seeds},
            {"base_seed", c.base_seed},
            {"fs", c.fs},
            {"duration", c.duration},
            {"grid_count", c.grid_count},
            {"medium", to_json(c.medium)},
            {"volume_measurements", c.volume_measurements},
            {"surface_measurements", c.surface_measurements},
            {"split_seed", c.split_seed},
            {"models", c.models},
            {"train", c.train},
            {"output_dir", c.output_dir}};
}

inline ExperimentConfig experiment_config_from_json(const json& j, ExperimentConfig base = {}) {
    detail::check_keys(j,
                       {"rooms", "room_seeds", "base_seed", "fs", "duration", "grid_count", "medium",
                        "volume_measurements", "surface_measurements", "split_seed", "models", "train", "output_dir"},
                       "experiment config");
    detail::read_opt(j, "rooms", base.rooms);
    detail::read_opt(j, "room_seeds", base.room_seeds);
    detail::read_opt(j, "base_seed", base.base_seed);
    detail::read_opt(j, "fs", base.fs);
    detail::read_opt(j, "duration", base.duration);
    detail::read_opt(j, "grid_count", base.grid_count);
    if (j.contains("medium")) base.medium = medium_from_json(j.at("medium"));
    detail::read_opt(j, "volume_measurements", base.volume_measurements);
    detail::read_opt(j, "surface_measurements", base.surface_measurements);
    detail::read_opt(j, "split_seed", base.split_seed);
    detail::read_opt(j, "models", base.models);
    if (j.contains("train")) base.train = j.at("train");
    detail::read_opt(j, "output_dir", base.output_dir);
    return base;
}

inline json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(what + ": " + e.what());
    }
}

}  // namespace vpnf::store
