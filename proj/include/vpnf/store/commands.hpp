#pragma once

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "vpnf/metrics/evaluate.hpp"
#include "vpnf/roomsim/dataset.hpp"
#include "vpnf/roomsim/room.hpp"
#include "vpnf/store/checkpoint.hpp"
#include "vpnf/store/dataset_file.hpp"
#include "vpnf/store/json_codec.hpp"
#include "vpnf/store/tables.hpp"
#include "vpnf/training/split.hpp"
#include "vpnf/training/trainer.hpp"

namespace vpnf::store {

namespace fs = std::filesystem;

inline constexpr const char* kOutputRootEnv = "VPNF_OUTPUT_ROOT";

// Relative output paths are placed under $VPNF_OUTPUT_ROOT when it is set.
inline std::string output_path(const std::string& p) {
    fs::path path(p);
    if (path.is_relative())
        if (const char* root = std::getenv(kOutputRootEnv); root && *root) path = fs::path(root) / path;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    return path.string();
}

// Inputs are taken as given, falling back to $VPNF_OUTPUT_ROOT for relative paths that do
// not exist in the working directory.
inline std::string input_path(const std::string& p) {
    fs::path path(p);
    if (fs::exists(path) || !path.is_relative()) return path.string();
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) {
        fs::path alt = fs::path(root) / path;
        if (fs::exists(alt)) return alt.string();
    }
    return path.string();
}

inline std::string room_file_name(std::uint64_t seed) { return "room_" + std::to_string(seed) + ".foad"; }

// Simulates one dataset per room seed into `out_dir` plus a manifest.json listing them.
inline std::vector<std::string> cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir,
                                             std::ostream* log = nullptr) {
    cfg.validate_simulation();
    const std::string dir = output_path((fs::path(out_dir) / "").string());
    fs::create_directories(dir);
    std::vector<std::string> files;
    json rooms = json::array();
    for (std::uint64_t seed : cfg.seeds()) {
        const roomsim::RoomSpec room = roomsim::sample_room(seed);
        const roomsim::FoaDataset ds =
            roomsim::build_dataset(room, roomsim::cube_grid(room, cfg.grid_count), cfg.fs, cfg.duration, cfg.medium);
        const std::string path = (fs::path(dir) / room_file_name(seed)).string();
        save_dataset(path, ds);
        files.push_back(path);
        rooms.push_back({{"seed", seed}, {"file", room_file_name(seed)}, {"positions", ds.size()}});
        if (log) *log << "simulated room " << seed << " -> " << path << "\n";
    }
    const json manifest = {{"rooms", rooms}, {"fs", cfg.fs}, {"duration", cfg.duration}, {"grid_count", cfg.grid_count}};
    write_file((fs::path(dir) / "manifest.json").string(), manifest.dump(1) + "\n");
    return files;
}

inline training::Split cmd_split(const std::string& dataset_path, training::SplitMode mode, std::size_t measurements,
                                 std::uint64_t seed, const std::string& out_path) {
    const roomsim::FoaDataset ds = load_dataset(input_path(dataset_path));
    training::Split s = training::make_split(ds.grid, mode, measurements, seed);
    save_split(output_path(out_path), s);
    return s;
}

struct TrainOutputs {
    std::string checkpoint;
    std::string log;
};

inline Checkpoint train_checkpoint(const roomsim::FoaDataset& ds, const training::Split& split,
                                   const training::TrainConfig& cfg, std::vector<training::LogRow>* log_rows,
                                   const training::ProgressFn& progress = {}) {
    check_split(split, ds.size());
    fields::FieldModel model = training::make_model(cfg, ds, split);
    training::TrainResult res = training::train(std::move(model), ds, split, cfg, progress);
    Checkpoint c;
    c.model = std::move(res.best);
    c.variant = training::variant_name(cfg.head, cfg.penalty);
    c.seed = cfg.seed;
    const auto& best = res.history[res.best_index];
    c.extra = {{"selected_iteration", best.iteration},
               {"validation_nmse_w_db", best.nmse_w_db},
               {"train_config", to_json(cfg)},
               {"eps", json::array()}};
    for (double s : res.loss_state.log_eps) c.extra["eps"].push_back(std::exp(s));
    if (log_rows) *log_rows = std::move(res.log);
    return c;
}

// Trains and writes the selected checkpoint and the per-iteration log CSV.
inline TrainOutputs cmd_train(const std::string& dataset_path, const std::string& split_path,
                              const training::TrainConfig& cfg, const std::string& checkpoint_path,
                              const std::string& log_path, const training::ProgressFn& progress = {}) {
    const roomsim::FoaDataset ds = load_dataset(input_path(dataset_path));
    const training::Split split = load_split(input_path(split_path));
    std::vector<training::LogRow> rows;
    const Checkpoint c = train_checkpoint(ds, split, cfg, &rows, progress);
    TrainOutputs out{output_path(checkpoint_path), output_path(log_path)};
    save_checkpoint(out.checkpoint, c);
    write_file(out.log, training_log_csv(rows));
    return out;
}

inline metrics::Report evaluate_checkpoint(const Checkpoint& c, const roomsim::FoaDataset& ds,
                                           const training::Split& split) {
    check_split(split, ds.size());
    metrics::Report r = metrics::evaluate(c.model, ds, split);
    if (!c.variant.empty()) r.model = c.variant;
    return r;
}

inline metrics::Report cmd_evaluate(const std::string& checkpoint_path, const std::string& dataset_path,
                                    const std::string& split_path, const std::string& report_path) {
    const Checkpoint c = load_checkpoint(input_path(checkpoint_path));
    const roomsim::FoaDataset ds = load_dataset(input_path(dataset_path));
    const training::Split split = load_split(input_path(split_path));
    const metrics::Report r = evaluate_checkpoint(c, ds, split);
    write_file(output_path(report_path), reports_csv({r}));
    return r;
}

// Aggregates report CSVs into `<out_prefix>_long.csv` and `<out_prefix>_table.csv`.
inline std::vector<ConditionSummary> cmd_report(const std::vector<std::string>& report_paths,
                                                const std::string& out_prefix) {
    if (report_paths.empty()) throw UsageError("report: no report files given");
    std::vector<metrics::Report> all;
    for (const auto& p : report_paths) {
        const std::string path = input_path(p);
        auto rows = parse_reports_csv(read_text(path), path);
        all.insert(all.end(), rows.begin(), rows.end());
    }
    auto summary = aggregate_reports(all);
    write_file(output_path(out_prefix + "_long.csv"), long_format_csv(summary));
    write_file(output_path(out_prefix + "_table.csv"), summary_table_csv(summary));
    return summary;
}

// Whole protocol: simulate every room, then for each split condition and model train,
// evaluate, and finally aggregate. Layout under output_dir:
//   data/room_<seed>.foad, splits/<seed>_<mode>_D<d>.json,
//   runs/<seed>_<mode>_D<d>_<model>.{vpnf,log.csv,report.csv}, summary_{long,table}.csv
inline std::vector<ConditionSummary> cmd_run(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
    cfg.validate();
    const fs::path root(cfg.output_dir);
    const auto datasets = cmd_simulate(cfg, (root / "data").string(), log);
    const auto seeds = cfg.seeds();
    std::vector<std::string> reports;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        std::vector<std::pair<training::SplitMode, std::size_t>> conditions;
        for (auto d : cfg.volume_measurements) conditions.push_back({training::SplitMode::RandomVolume, d});
        for (auto d : cfg.surface_measurements) conditions.push_back({training::SplitMode::Surface, d});
        for (const auto& [mode, d] : conditions) {
            const std::string tag =
                std::to_string(seeds[i]) + "_" + training::split_mode_name(mode) + "_D" + std::to_string(d);
            const std::string split_path = (root / "splits" / (tag + ".json")).string();
            cmd_split(datasets[i], mode, d, cfg.split_seed, split_path);
            for (const auto& model : cfg.models) {
                training::TrainConfig tc = train_config_from_json(cfg.train);
                const auto v = training::model_variant(model);
                tc.head = v.head;
                tc.penalty = v.penalty;
                const std::string base = (root / "runs" / (tag + "_" + model)).string();
                cmd_train(datasets[i], split_path, tc, base + ".vpnf", base + ".log.csv");
                const auto r = cmd_evaluate(base + ".vpnf", datasets[i], split_path, base + ".report.csv");
                reports.push_back(base + ".report.csv");
                if (log)
                    *log << tag << " " << model << ": NMSE W " << fmt(r.nmse_w()) << " dB, XYZ " << fmt(r.nmse_xyz())
                         << " dB\n";
            }
        }
    }
    return cmd_report(reports, (root / "summary").string());
}

// Default configurations, as printed by the `defaults` subcommand.
inline json defaults_json() {
    const roomsim::RoomSampling rs;
    return {{"train", to_json(training::TrainConfig{})},
            {"experiment", to_json(ExperimentConfig{})},
            {"room_sampling",
             {{"horizontal_range", {rs.horizontal_min, rs.horizontal_max}},
              {"height_range", {rs.height_min, rs.height_max}},
              {"absorption_range", {rs.absorption_min, rs.absorption_max}},
              {"wall_buffer", rs.wall_buffer},
              {"cube_size", rs.cube_size},
              {"source_clearance", rs.source_clearance},
              {"max_attempts", rs.max_attempts}}},
            {"output_root_env", kOutputRootEnv}};
}

}  // namespace vpnf::store
