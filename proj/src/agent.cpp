#include "oymb/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace oymb {

namespace {

enum Stream : std::uint64_t { kEnvironment = 1, kPolicy, kSampler, kInit, kProbe };

void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok) throw std::invalid_argument(field + ": " + message);
}

}  // namespace

void AgentConfig::validate() const {
    require(gamma > 0.0 && gamma < 1.0, "gamma", "must lie in (0, 1)");
    require(batch_size >= 1, "batch_size", "must be at least 1");
    require(episodes >= 0, "episodes", "must be non-negative");
    require(epsilon_end >= 0.0 && epsilon_end <= epsilon_start && epsilon_start <= 1.0,
            "epsilon_start/epsilon_end", "need 0 <= epsilon_end <= epsilon_start <= 1");
    require(oymb.lambda >= 0.0 && oymb.lambda <= 1.0, "lambda", "must lie in [0, 1]");
    require(oymb.delta > 0.0, "delta", "must be positive");
    require(oymb.limit >= 0.0 && oymb.limit <= 1.0, "limit", "must lie in [0, 1]");
    require(adam.learning_rate >= 0.0, "learning_rate", "must be non-negative");
    require(adam.beta1 >= 0.0 && adam.beta1 < 1.0, "adam_beta1", "must lie in [0, 1)");
    require(adam.beta2 >= 0.0 && adam.beta2 < 1.0, "adam_beta2", "must lie in [0, 1)");
    require(adam.epsilon > 0.0, "adam_epsilon", "must be positive");
    if (!manual_schedule.empty()) {
        require(manual_schedule.front().begin_episode == 0, "schedule",
                "first segment must start at episode 0");
        for (std::size_t i = 0; i < manual_schedule.size(); ++i) {
            const auto& s = manual_schedule[i];
            require(s.lambda >= 0.0 && s.lambda <= 1.0, "schedule", "lambda must lie in [0, 1]");
            if (i > 0) {
                require(s.begin_episode > manual_schedule[i - 1].begin_episode, "schedule",
                        "segments must start at strictly increasing episodes");
            }
        }
    }
}

double epsilon_at(const AgentConfig& config, int episode) {
    if (config.episodes <= 1 || episode <= 0) return config.epsilon_start;
    if (episode >= config.episodes - 1) return config.epsilon_end;
    const double fraction = static_cast<double>(episode) / static_cast<double>(config.episodes - 1);
    return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * fraction;
}

double scheduled_lambda(std::span<const ScheduleSegment> schedule, int episode) {
    double lambda = schedule.empty() ? 0.0 : schedule.front().lambda;
    for (const auto& s : schedule) {
        if (s.begin_episode <= episode) lambda = s.lambda;
    }
    return lambda;
}

std::vector<double> td_targets(const MLPParameters& target, const Eigen::MatrixXd& next_inputs,
                               std::span<const double> rewards,
                               std::span<const std::uint8_t> terminals, double gamma) {
    const auto batch = static_cast<std::size_t>(next_inputs.cols());
    if (rewards.size() != batch || terminals.size() != batch) {
        throw std::invalid_argument("td_targets: batch sizes disagree");
    }
    const Eigen::MatrixXd next_q = forward_batch(target, next_inputs);
    std::vector<double> y(batch);
    for (std::size_t j = 0; j < batch; ++j) {
        y[j] = rewards[j];
        if (!terminals[j]) y[j] += gamma * next_q.col(static_cast<Eigen::Index>(j)).maxCoeff();
    }
    return y;
}

int greedy_action(const QValues& q) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < q.size(); ++i) {
        if (q(i) > q(best)) best = i;
    }
    return static_cast<int>(best);
}

RunStreams RunStreams::from_seed(std::uint64_t seed) {
    return {make_stream(seed, kEnvironment), make_stream(seed, kPolicy),
            make_stream(seed, kSampler), make_stream(seed, kInit), make_stream(seed, kProbe)};
}

Agent::Agent(const EnvSpec& spec, AgentConfig config, Rng& init_rng)
    : config_(std::move(config)), spec_(spec), oymb_(config_.oymb) {
    config_.validate();
    online_ = config_.zero_init ? MLPParameters::zeros(spec.input_dim(), spec.action_count)
                                : MLPParameters::glorot(spec.input_dim(), spec.action_count, init_rng);
    target_ = copy_params(online_);
    adam_ = AdamState::for_params(online_, config_.adam);
    if (!config_.manual_schedule.empty()) {
        oymb_.lambda = scheduled_lambda(config_.manual_schedule, 0);
    }
}

void Agent::set_online(const MLPParameters& params) {
    if (!params.same_shape(online_)) throw std::invalid_argument("online parameters shape mismatch");
    online_ = params;
}

void Agent::set_target(const MLPParameters& params) {
    if (!params.same_shape(target_)) throw std::invalid_argument("target parameters shape mismatch");
    target_ = params;
}

double Agent::current_lambda() const { return oymb_.lambda; }

int Agent::select_action(std::span<const double> input, double epsilon, Rng& rng) const {
    if (epsilon > 0.0 && uniform_real(rng, 0.0, 1.0) < epsilon) {
        return static_cast<int>(uniform_index(rng, static_cast<std::size_t>(spec_.action_count)));
    }
    return greedy_action(forward(online_, input));
}

std::optional<double> Agent::train_step(const ReplayMemory& memory, const Environment& env,
                                        Rng& rng) {
    if (memory.empty() || memory.size() < config_.warmup) return std::nullopt;

    last_batch_ = config_.sampler == SamplerKind::oymb
                      ? oymb_sample(memory, config_.batch_size, oymb_.lambda, rng)
                      : uniform_sample(memory, config_.batch_size, rng);

    const auto batch = static_cast<Eigen::Index>(last_batch_.indices.size());
    const auto dim = static_cast<Eigen::Index>(spec_.input_dim());
    inputs_.resize(dim, batch);
    next_inputs_.resize(dim, batch);
    actions_.resize(static_cast<std::size_t>(batch));
    rewards_.resize(static_cast<std::size_t>(batch));
    terminals_.resize(static_cast<std::size_t>(batch));
    for (Eigen::Index j = 0; j < batch; ++j) {
        const Transition& t = memory.at(last_batch_.indices[static_cast<std::size_t>(j)]);
        env.encode(t.obs, t.goal, std::span<double>(inputs_.col(j).data(), static_cast<std::size_t>(dim)));
        env.encode(t.next_obs, t.goal,
                   std::span<double>(next_inputs_.col(j).data(), static_cast<std::size_t>(dim)));
        actions_[static_cast<std::size_t>(j)] = t.action;
        rewards_[static_cast<std::size_t>(j)] = t.reward;
        terminals_[static_cast<std::size_t>(j)] = t.terminal ? 1 : 0;
    }

    const std::vector<double> y = td_targets(target_, next_inputs_, rewards_, terminals_, config_.gamma);
    BatchGradient g = batch_backward(online_, inputs_, actions_, y);
    adam_step(online_, g.gradient, adam_);
    return g.mean_squared_error;
}

EpisodeRecord Agent::run_episode(Environment& env, ReplayMemory& memory, RunStreams& streams) {
    if (!config_.manual_schedule.empty()) {
        oymb_.lambda = scheduled_lambda(config_.manual_schedule, episode_);
    }
    const double epsilon = epsilon_at(config_, episode_);
    const std::vector<double> goal = env.desired_goal();
    const int horizon = env.spec().episode_length;

    EpisodeRecord record;
    record.lambda = config_.sampler == SamplerKind::oymb ? oymb_.lambda : 0.0;

    std::vector<std::size_t> episode_indices;
    episode_indices.reserve(static_cast<std::size_t>(horizon));
    std::vector<double> obs = env.reset(streams.environment);
    std::vector<double> input(static_cast<std::size_t>(spec_.input_dim()));
    double loss_sum = 0.0;

    for (int step = 0; step < horizon; ++step) {
        env.encode(obs, goal, input);
        const int action = select_action(input, epsilon, streams.policy);
        StepResult result = env.step(action, streams.environment);
        record.success = record.success || result.reward == 1.0;
        ++record.steps;

        const bool terminal = result.terminal;
        std::vector<double> next_obs = result.next_obs;
        episode_indices.push_back(memory.store(Transition{std::move(obs), goal, action,
                                                          result.reward, std::move(result.next_obs),
                                                          std::move(result.achieved_goal), terminal}));
        if (auto loss = train_step(memory, env, streams.sampler)) {
            loss_sum += *loss;
            ++record.updates;
        }
        obs = std::move(next_obs);
        if (terminal) break;
    }

    record.relabeled = memory.relabel_episode(
        episode_indices, goal,
        [&env](std::span<const double> achieved, std::span<const double> desired) {
            return env.goal_reached(achieved, desired);
        },
        RelabelOptions{config_.her_rewrite_goal, config_.her_terminal});

    record.mean_loss = record.updates > 0 ? loss_sum / static_cast<double>(record.updates)
                                          : std::numeric_limits<double>::quiet_NaN();
    if (config_.manual_schedule.empty()) oymb_ = schedule_step(oymb_);
    target_ = copy_params(online_);
    ++episode_;
    return record;
}

TrainingRun::TrainingRun(const Environment& prototype, const AgentConfig& config,
                         std::uint64_t seed)
    : env_(prototype.clone()),
      streams_(RunStreams::from_seed(seed)),
      agent_(env_->spec(), config, streams_.init) {}

EpisodeRecord TrainingRun::next_episode() { return agent_.run_episode(*env_, memory_, streams_); }

RunMetrics run_training(const Environment& prototype, const AgentConfig& config,
                        std::uint64_t seed) {
    TrainingRun run(prototype, config, seed);
    RunMetrics metrics;
    const auto m = static_cast<std::size_t>(std::max(config.episodes, 0));
    metrics.success.reserve(m);
    int total = 0;
    for (std::size_t e = 0; e < m; ++e) {
        const EpisodeRecord r = run.next_episode();
        total += r.success ? 1 : 0;
        metrics.success.push_back(r.success ? 1 : 0);
        metrics.cumulative.push_back(total);
        metrics.lambda.push_back(r.lambda);
        metrics.mean_loss.push_back(r.mean_loss);
        metrics.steps.push_back(r.steps);
    }
    return metrics;
}

}  // namespace oymb
