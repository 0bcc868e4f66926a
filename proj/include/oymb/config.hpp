#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "oymb/agent.hpp"
#include "oymb/envs.hpp"

namespace oymb {

enum class Task { mountaincar, robo_easy, robo_medium, robo_hard };

std::string_view task_name(Task task);
Task parse_task(std::string_view name);

// Default lambda schedule for a task.
OYMBState default_schedule(Task task);
int default_runs(Task task);

struct ArmConfig {
    std::string name;
    SamplerKind sampler = SamplerKind::oymb;
    OYMBState oymb;
};

struct ProbeConfig {
    std::vector<ScheduleSegment> segments{{0, 0.04}, {25, 0.025}, {50, 0.055}};
    std::size_t draws = 1000;       // K batches per episode
    std::size_t batch_size = 1000;  // B_probe
    int episodes = 100;
};

struct ExperimentConfig {
    Task task = Task::robo_easy;
    std::vector<ArmConfig> arms;
    int runs = 5;
    std::uint64_t base_seed = 0;
    std::filesystem::path out_dir = "results";
    std::filesystem::path map_path;
    AgentConfig agent;  // episodes M lives here
    RoboOptions robo;
    ProbeConfig probe;

    int episodes() const { return agent.episodes; }
};

// Raised for malformed config text; carries the 1-based line number.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, int line = 0);
    int line() const { return line_; }

private:
    int line_;
};

// Parses `key = value` text. Section headers `[arm NAME]` start an arm,
// `[probe]` the probe settings. `base_dir` resolves a relative map path.
ExperimentConfig parse_config(std::string_view text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Throws ConfigError naming the first invalid field.
void validate(const ExperimentConfig& config);

// Defaults for a task with the two standard arms, before any overrides.
ExperimentConfig default_config(Task task);

std::unique_ptr<Environment> make_environment(const ExperimentConfig& config);

// Text of the --help defaults table.
std::string describe_defaults();

}  // namespace oymb
