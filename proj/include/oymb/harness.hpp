#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oymb/agent.hpp"
#include "oymb/config.hpp"

namespace oymb {

struct AggregateSeries {
    std::vector<double> mean_cumulative;
    std::vector<double> std_cumulative;  // population standard deviation across runs
    std::vector<double> mean_lambda;
};

// Per-episode mean and standard deviation of cumulative successes across runs.
AggregateSeries aggregate(const std::vector<RunMetrics>& runs);

struct ArmResult {
    ArmConfig arm;
    std::vector<std::uint64_t> seeds;
    std::vector<RunMetrics> runs;
    AggregateSeries aggregate;
};

// Every arm, every run r in [0, runs) with seed base_seed + r. Runs execute
// on up to `threads` worker threads (0 = hardware concurrency); results do
// not depend on the thread count.
std::vector<ArmResult> run_experiment(const ExperimentConfig& config, unsigned threads = 0);

struct ProbeRow {
    int episode = 0;
    SamplerKind sampler = SamplerKind::oymb;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double target_lambda = 0.0;     // 0 for the uniform sampler
    std::size_t preferential = 0;   // round(B_probe * target_lambda)
    std::size_t available = 0;      // reward-1 transitions in memory
    std::size_t memory_size = 0;
};

// Trains one agent per sampler for probe.episodes episodes; after each
// episode draws probe.draws batches of probe.batch_size from that agent's
// memory with its sampler and records the mean/min/max fraction of reward-1
// transitions. Probe draws use a separate stream and never feed training.
std::vector<ProbeRow> proportion_probe(const ExperimentConfig& config);

std::string_view sampler_name(SamplerKind kind);

// `episode,mean_cum_success,std_cum_success,mean_lambda`
void write_experiment_csv(const AggregateSeries& series, const std::filesystem::path& path);
// `arm,run,seed,episode,success,cum_success,lambda,mean_loss,steps`
void write_runs_csv(const std::vector<ArmResult>& results, const std::filesystem::path& path);
// `episode,sampler,mean_prop,min_prop,max_prop`
void write_probe_csv(const std::vector<ProbeRow>& rows, const std::filesystem::path& path);

// Output file names inside an output directory.
std::filesystem::path experiment_csv_path(const std::filesystem::path& dir, Task task,
                                          const std::string& arm);
std::filesystem::path runs_csv_path(const std::filesystem::path& dir, Task task);
std::filesystem::path probe_csv_path(const std::filesystem::path& dir, Task task);

// Decimal text with 17 significant digits; round-trips exactly.
std::string format_number(double value);

// Reads a numeric CSV written by this module (header skipped). Non-numeric
// cells are rejected.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path);

}  // namespace oymb
