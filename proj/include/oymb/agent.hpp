#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "oymb/envs.hpp"
#include "oymb/neuralnet.hpp"
#include "oymb/replay.hpp"
#include "oymb/rng.hpp"

namespace oymb {

enum class SamplerKind { oymb, uniform };

// Manual lambda schedule entry: from `begin_episode` on, lambda = `lambda`.
struct ScheduleSegment {
    int begin_episode = 0;
    double lambda = 0.0;
};

struct AgentConfig {
    double gamma = 0.98;
    std::size_t batch_size = 64;
    int episodes = 250;
    double epsilon_start = 1.0;
    double epsilon_end = 0.01;
    SamplerKind sampler = SamplerKind::oymb;
    OYMBState oymb{0.25, 1.0, 0.25};
    // When non-empty, replaces the multiplicative schedule.
    std::vector<ScheduleSegment> manual_schedule;
    AdamConfig adam;
    std::size_t warmup = 64;
    bool her_rewrite_goal = false;
    bool her_terminal = false;
    bool zero_init = false;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

// Linear ramp from epsilon_start at episode 0 to epsilon_end at episode M-1.
double epsilon_at(const AgentConfig& config, int episode);

// Lambda in force during `episode` under a manual schedule.
double scheduled_lambda(std::span<const ScheduleSegment> schedule, int episode);

// y = r + gamma * max_a' Q_target(next_input, a'), or y = r when terminal.
std::vector<double> td_targets(const MLPParameters& target, const Eigen::MatrixXd& next_inputs,
                               std::span<const double> rewards,
                               std::span<const std::uint8_t> terminals, double gamma);

// Greedy action with lowest-index tie-break.
int greedy_action(const QValues& q);

// Sub-streams of one run, split deterministically from the run seed.
struct RunStreams {
    Rng environment;
    Rng policy;
    Rng sampler;
    Rng init;
    Rng probe;

    static RunStreams from_seed(std::uint64_t seed);
};

struct EpisodeRecord {
    bool success = false;
    int steps = 0;
    double lambda = 0.0;        // lambda in force during the episode (0 for uniform)
    double mean_loss = 0.0;     // NaN when no update happened
    std::size_t updates = 0;
    std::size_t relabeled = 0;
};

class Agent {
public:
    Agent(const EnvSpec& spec, AgentConfig config, Rng& init_rng);

    int select_action(std::span<const double> input, double epsilon, Rng& rng) const;

    // One optimisation step from a sampled batch. Returns the mean squared TD
    // error, or nullopt when the memory holds fewer than `warmup` transitions.
    std::optional<double> train_step(const ReplayMemory& memory, const Environment& env,
                                     Rng& rng);

    // Runs one episode: act, store, train every step; then hindsight
    // relabeling, lambda schedule and target-network sync.
    EpisodeRecord run_episode(Environment& env, ReplayMemory& memory, RunStreams& streams);

    const MLPParameters& online() const { return online_; }
    const MLPParameters& target() const { return target_; }
    const AdamState& adam() const { return adam_; }
    const OYMBState& oymb_state() const { return oymb_; }
    const AgentConfig& config() const { return config_; }
    int episode() const { return episode_; }
    // Most recent training batch; empty before the first update.
    const SampleBatch& last_batch() const { return last_batch_; }

    void set_online(const MLPParameters& params);
    void set_target(const MLPParameters& params);

    // Sampling lambda used by train_step in the current episode.
    double current_lambda() const;

private:
    AgentConfig config_;
    EnvSpec spec_;
    MLPParameters online_;
    MLPParameters target_;
    AdamState adam_;
    OYMBState oymb_;
    int episode_ = 0;
    SampleBatch last_batch_;

    // Scratch buffers reused across train steps.
    Eigen::MatrixXd inputs_;
    Eigen::MatrixXd next_inputs_;
    std::vector<int> actions_;
    std::vector<double> rewards_;
    std::vector<std::uint8_t> terminals_;
};

struct RunMetrics {
    std::vector<int> success;           // 0/1 per episode
    std::vector<int> cumulative;        // running sum of success
    std::vector<double> lambda;         // per episode
    std::vector<double> mean_loss;      // per episode, NaN without updates
    std::vector<int> steps;             // per episode
};

// Environment, memory, agent and streams of one seeded run.
class TrainingRun {
public:
    TrainingRun(const Environment& prototype, const AgentConfig& config, std::uint64_t seed);

    EpisodeRecord next_episode();

    const ReplayMemory& memory() const { return memory_; }
    const Agent& agent() const { return agent_; }
    Environment& environment() { return *env_; }
    RunStreams& streams() { return streams_; }
    int episodes_done() const { return agent_.episode(); }

private:
    std::unique_ptr<Environment> env_;
    RunStreams streams_;
    ReplayMemory memory_;
    Agent agent_;
};

RunMetrics run_training(const Environment& prototype, const AgentConfig& config,
                        std::uint64_t seed);

}  // namespace oymb
