// vpnf command-line tool: simulate, split, train, evaluate, report, run, defaults.

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vpnf/allocator.hpp"
#include "vpnf/store/commands.hpp"

namespace {

using namespace vpnf;
using store::json;

json read_config_file(const std::string& path) {
    if (path.empty()) return json::object();
    const std::string p = store::input_path(path);
    return store::parse_json(store::read_text(p), p);
}

struct TrainFlags {
    std::string config;
    std::string model;
    std::optional<int> depth, width, times_per_batch, collocation_count, collocation_per_iteration;
    std::optional<long> iterations, validation_interval;
    std::optional<double> lr0, lr_min, omega0;
    std::optional<std::uint64_t> seed;
    bool no_wall_clock = false;

    void add(CLI::App* app) {
        app->add_option("--config", config, "JSON train configuration; flags override its values");
        app->add_option("--model", model, "DANF, PI-DANF, VPNF, VPNF-Wave or VPNF+");
        app->add_option("--depth", depth);
        app->add_option("--width", width);
        app->add_option("--iterations", iterations);
        app->add_option("--lr0", lr0);
        app->add_option("--lr-min", lr_min);
        app->add_option("--omega0", omega0);
        app->add_option("--times-per-batch", times_per_batch);
        app->add_option("--collocation-count", collocation_count);
        app->add_option("--collocation-per-iteration", collocation_per_iteration);
        app->add_option("--validation-interval", validation_interval);
        app->add_option("--seed", seed);
        app->add_flag("--no-wall-clock", no_wall_clock, "Leave the wall-clock column of the log at zero");
    }

    training::TrainConfig resolve() const {
        json j = read_config_file(config);
        if (!model.empty()) j["model"] = model;
        if (depth) j["depth"] = *depth;
        if (width) j["width"] = *width;
        if (iterations) j["iterations"] = *iterations;
        if (lr0) j["lr0"] = *lr0;
        if (lr_min) j["lr_min"] = *lr_min;
        if (omega0) j["omega0"] = *omega0;
        if (times_per_batch) j["times_per_batch"] = *times_per_batch;
        if (collocation_count) j["collocation_count"] = *collocation_count;
        if (collocation_per_iteration) j["collocation_per_iteration"] = *collocation_per_iteration;
        if (validation_interval) j["validation_interval"] = *validation_interval;
        if (seed) j["seed"] = *seed;
        if (no_wall_clock) j["record_wall_clock"] = false;
        training::TrainConfig cfg = store::train_config_from_json(j);
        // A smaller collocation pool implies a matching per-iteration draw unless both are given.
        if (!j.contains("collocation_per_iteration") && cfg.collocation_per_iteration > cfg.collocation_count)
            cfg.collocation_per_iteration = cfg.collocation_count;
        cfg.validate();
        return cfg;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"Velocity-potential neural fields for FOA room impulse responses"};
    app.require_subcommand(1);

    std::string exp_config, out_dir;
    std::optional<int> rooms, grid_count;
    std::optional<std::uint64_t> base_seed;
    std::optional<double> fs, duration;
    auto* sim = app.add_subcommand("simulate", "Simulate FOA RIR datasets for randomly sampled rooms");
    sim->add_option("--config", exp_config, "JSON experiment configuration");
    sim->add_option("--rooms", rooms);
    sim->add_option("--base-seed", base_seed);
    sim->add_option("--fs", fs);
    sim->add_option("--duration", duration);
    sim->add_option("--grid-count", grid_count);
    sim->add_option("--out", out_dir, "Output directory")->required();

    std::string dataset, split_out, mode = "random-volume";
    std::size_t measurements = 0;
    std::uint64_t split_seed = 0;
    auto* split = app.add_subcommand("split", "Draw train/validation/evaluation positions");
    split->add_option("--dataset", dataset)->required();
    split->add_option("--mode", mode, "random-volume or surface");
    split->add_option("-D,--measurements", measurements)->required();
    split->add_option("--seed", split_seed);
    split->add_option("--out", split_out)->required();

    std::string split_path, checkpoint, log_path;
    TrainFlags tf;
    auto* train = app.add_subcommand("train", "Train a model and write the selected checkpoint and log");
    train->add_option("--dataset", dataset)->required();
    train->add_option("--split", split_path)->required();
    train->add_option("--out", checkpoint, "Checkpoint path")->required();
    train->add_option("--log", log_path, "Log CSV path (default <checkpoint>.log.csv)");
    tf.add(train);
    bool quiet = false;
    train->add_flag("--quiet", quiet);

    std::string report_out;
    auto* eval = app.add_subcommand("evaluate", "Evaluate a checkpoint on the evaluation positions of a split");
    eval->add_option("--checkpoint", checkpoint)->required();
    eval->add_option("--dataset", dataset)->required();
    eval->add_option("--split", split_path)->required();
    eval->add_option("--out", report_out, "Report CSV path")->required();

    std::vector<std::string> reports;
    std::string prefix;
    auto* report = app.add_subcommand("report", "Average report CSVs over rooms per condition and model");
    report->add_option("reports", reports, "Report CSV files")->required();
    report->add_option("--out", prefix, "Output prefix for <prefix>_long.csv and <prefix>_table.csv")->required();

    auto* runall = app.add_subcommand("run", "Simulate, split, train, evaluate and report a whole experiment");
    runall->add_option("--config", exp_config, "JSON experiment configuration");
    runall->add_option("--out", out_dir, "Output directory (overrides the configuration)");

    app.add_subcommand("defaults", "Print every default configuration value as JSON");

    CLI11_PARSE(app, argc, argv);
    tune_allocator();

    auto experiment = [&] {
        store::ExperimentConfig cfg = store::experiment_config_from_json(read_config_file(exp_config));
        if (rooms) cfg.rooms = *rooms, cfg.room_seeds.clear();
        if (base_seed) cfg.base_seed = *base_seed;
        if (fs) cfg.fs = *fs;
        if (duration) cfg.duration = *duration;
        if (grid_count) cfg.grid_count = *grid_count;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        return cfg;
    };

    if (*sim) {
        store::cmd_simulate(experiment(), out_dir, &std::cout);
    } else if (*split) {
        const auto s = store::cmd_split(dataset, training::split_mode_from_name(mode), measurements, split_seed, split_out);
        std::cout << "train " << s.train.size() << ", validation " << s.validation.size() << ", evaluation "
                  << s.evaluation.size() << "\n";
    } else if (*train) {
        const training::TrainConfig cfg = tf.resolve();
        if (log_path.empty()) log_path = checkpoint + ".log.csv";
        training::ProgressFn progress;
        if (!quiet)
            progress = [](const training::LogRow& r) {
                if (!std::isnan(r.validation_nmse_w))
                    std::cout << "iter " << r.iteration << "  data " << r.data_loss << "  val NMSE_W "
                              << r.validation_nmse_w << " dB\n";
            };
        const auto out = store::cmd_train(dataset, split_path, cfg, checkpoint, log_path, progress);
        std::cout << "wrote " << out.checkpoint << " and " << out.log << "\n";
    } else if (*eval) {
        const auto r = store::cmd_evaluate(checkpoint, dataset, split_path, report_out);
        std::cout << r.model << ": NMSE W " << r.nmse_w() << " dB, XYZ " << r.nmse_xyz() << " dB; PCC W " << r.pcc_w()
                  << ", XYZ " << r.pcc_xyz() << "\n";
    } else if (*report) {
        const auto rows = store::cmd_report(reports, prefix);
        std::cout << store::summary_table_csv(rows);
    } else if (*runall) {
        const auto rows = store::cmd_run(experiment(), &std::cout);
        std::cout << store::summary_table_csv(rows);
    } else {
        std::cout << store::defaults_json().dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "vpnf: error: " << e.what() << "\n";
        return 1;
    }
}
