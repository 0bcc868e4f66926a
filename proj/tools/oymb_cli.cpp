// oymb: experiment runner for the OYMB replay sampler.
//
//   oymb run --config exp.cfg [--out DIR] [--seed N]
//   oymb probe --config probe.cfg --out DIR
//   oymb validate-map --map maze.map
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "oymb/config.hpp"
#include "oymb/envs.hpp"
#include "oymb/harness.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

int command_run(const std::string& config_path, const std::optional<std::string>& out,
                const std::optional<std::uint64_t>& seed) {
    oymb::ExperimentConfig config;
    try {
        config = oymb::load_config(config_path);
    } catch (const oymb::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
    if (out) config.out_dir = *out;
    if (seed) config.base_seed = *seed;

    const auto results = oymb::run_experiment(config);
    for (const auto& arm : results) {
        const auto path = oymb::experiment_csv_path(config.out_dir, config.task, arm.arm.name);
        oymb::write_experiment_csv(arm.aggregate, path);
        const double final_mean =
            arm.aggregate.mean_cumulative.empty() ? 0.0 : arm.aggregate.mean_cumulative.back();
        std::cout << arm.arm.name << " (" << oymb::sampler_name(arm.arm.sampler)
                  << "): mean final cumulative successes " << final_mean << " -> "
                  << path.string() << '\n';
    }
    const auto runs_path = oymb::runs_csv_path(config.out_dir, config.task);
    oymb::write_runs_csv(results, runs_path);
    std::cout << "per-run series -> " << runs_path.string() << '\n';
    return 0;
}

int command_probe(const std::string& config_path, const std::string& out) {
    oymb::ExperimentConfig config;
    try {
        config = oymb::load_config(config_path);
    } catch (const oymb::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
    config.out_dir = out;
    const auto rows = oymb::proportion_probe(config);
    const auto path = oymb::probe_csv_path(config.out_dir, config.task);
    oymb::write_probe_csv(rows, path);
    std::cout << "probe (" << rows.size() << " rows) -> " << path.string() << '\n';
    return 0;
}

int command_validate_map(const std::string& map_path) {
    oymb::MazeMap map;
    try {
        map = oymb::load_map(map_path);
    } catch (const oymb::MapError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsageError;
    }
    std::cout << "start (" << map.start.row << ", " << map.start.col << ")\n";
    for (auto [label, cell] : {std::pair{"E", map.easy}, std::pair{"M", map.medium},
                               std::pair{"H", map.hard}}) {
        std::cout << label << " (" << cell.row << ", " << cell.col << ") distance "
                  << *oymb::bfs_distance(map, map.start, cell) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse-reward DQN experiments comparing HER with the OYMB replay sampler.\n\n" +
                 oymb::describe_defaults()};
    app.require_subcommand(1);

    std::string run_config;
    std::optional<std::string> run_out;
    std::optional<std::uint64_t> run_seed;
    auto* run = app.add_subcommand("run", "Train every arm for every seed and write CSV metrics");
    run->add_option("--config", run_config, "Experiment config file")->required();
    run->add_option("--out", run_out, "Output directory (overrides `out`)");
    run->add_option("--seed", run_seed, "Base seed (overrides `seed`)");

    std::string probe_config, probe_out;
    auto* probe = app.add_subcommand(
        "probe", "Measure the fraction of reward-1 transitions per sampled batch");
    probe->add_option("--config", probe_config, "Config file with an optional [probe] section")
        ->required();
    probe->add_option("--out", probe_out, "Output directory")->required();

    std::string map_path;
    auto* validate = app.add_subcommand("validate-map", "Check a maze file and print BFS distances");
    validate->add_option("--map", map_path, "Maze file (10 lines of 10 chars over #.SEMH)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsageError;
    }

    try {
        if (*run) return command_run(run_config, run_out, run_seed);
        if (*probe) return command_probe(probe_config, probe_out);
        if (*validate) return command_validate_map(map_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kUsageError;
}
