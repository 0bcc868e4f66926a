#include "oymb/replay.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace oymb {

namespace {

void check_sample_args(const ReplayMemory& memory, std::size_t batch_size) {
    if (memory.empty()) throw std::invalid_argument("cannot sample from an empty replay memory");
    if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
}

void print_vector(std::ostream& out, const std::vector<double>& v) {
    out << '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ',';
        out << v[i];
    }
    out << ']';
}

}  // namespace

bool exact_goal_match(std::span<const double> achieved, std::span<const double> desired) {
    return std::equal(achieved.begin(), achieved.end(), desired.begin(), desired.end());
}

std::size_t ReplayMemory::store(Transition transition) {
    transitions_.push_back(std::move(transition));
    membership_.push_back(GoalList::none);
    return transitions_.size() - 1;
}

void ReplayMemory::list(std::size_t index, GoalList which) {
    if (membership_[index] != GoalList::none) return;
    membership_[index] = which;
    (which == GoalList::real ? real_indices_ : her_indices_).push_back(index);
}

std::size_t ReplayMemory::relabel_episode(std::span<const std::size_t> episode,
                                          std::span<const double> real_goal,
                                          const GoalPredicate& reached,
                                          RelabelOptions options) {
    if (episode.empty()) return 0;
    for (std::size_t index : episode) {
        if (index >= transitions_.size()) {
            throw std::out_of_range("episode index " + std::to_string(index) +
                                    " is past the end of the replay memory");
        }
    }

    const std::vector<double> virtual_goal = transitions_[episode.back()].next_achieved_goal;
    const bool virtual_is_real = reached(virtual_goal, real_goal);
    const GoalList target = virtual_is_real ? GoalList::real : GoalList::her;

    std::size_t changed = 0;
    for (std::size_t index : episode) {
        Transition& t = transitions_[index];
        if (reached(t.next_achieved_goal, virtual_goal)) {
            if (t.reward != 1.0) {
                t.reward = 1.0;
                ++changed;
            }
            if (options.rewrite_goal && !virtual_is_real) t.goal = virtual_goal;
            if (options.mark_terminal) t.terminal = true;
            list(index, target);
        } else if (t.reward == 1.0) {
            list(index, GoalList::real);
        }
    }
    return changed;
}

void ReplayMemory::dump(std::ostream& out) const {
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
        const Transition& t = transitions_[i];
        out << i << " obs=";
        print_vector(out, t.obs);
        out << " goal=";
        print_vector(out, t.goal);
        out << " action=" << t.action << " reward=" << t.reward << " next_obs=";
        print_vector(out, t.next_obs);
        out << " achieved=";
        print_vector(out, t.next_achieved_goal);
        out << " terminal=" << (t.terminal ? 1 : 0) << " list=";
        switch (membership_[i]) {
            case GoalList::none: out << "none"; break;
            case GoalList::real: out << "real"; break;
            case GoalList::her: out << "her"; break;
        }
        out << '\n';
    }
}

OYMBState::LimitKind OYMBState::limit_kind() const {
    if (delta < 1.0) return LimitKind::min;
    if (delta > 1.0) return LimitKind::max;
    return LimitKind::inert;
}

OYMBState schedule_step(OYMBState state) {
    const double next = state.delta * state.lambda;
    switch (state.limit_kind()) {
        case OYMBState::LimitKind::min: state.lambda = std::max(next, state.limit); break;
        case OYMBState::LimitKind::max: state.lambda = std::min(next, state.limit); break;
        case OYMBState::LimitKind::inert: break;
    }
    return state;
}

std::size_t preferential_count(std::size_t batch_size, double lambda) {
    const double n = std::round(static_cast<double>(batch_size) * lambda);
    if (!(n > 0.0)) return 0;
    return std::min(batch_size, static_cast<std::size_t>(n));
}

SampleBatch oymb_sample(const ReplayMemory& memory, std::size_t batch_size, double lambda,
                        Rng& rng) {
    check_sample_args(memory, batch_size);
    const auto real = memory.real_indices();
    const auto her = memory.her_indices();

    const std::size_t n = preferential_count(batch_size, lambda);
    SampleBatch batch;
    batch.n_real_drawn = std::min(n, real.size());
    batch.n_her_drawn = std::min(n - batch.n_real_drawn, her.size());
    batch.n_random_drawn = batch_size - batch.n_real_drawn - batch.n_her_drawn;

    batch.indices.reserve(batch_size);
    for (std::size_t i = 0; i < batch.n_real_drawn; ++i) {
        batch.indices.push_back(real[uniform_index(rng, real.size())]);
    }
    for (std::size_t i = 0; i < batch.n_her_drawn; ++i) {
        batch.indices.push_back(her[uniform_index(rng, her.size())]);
    }
    for (std::size_t i = 0; i < batch.n_random_drawn; ++i) {
        batch.indices.push_back(uniform_index(rng, memory.size()));
    }
    return batch;
}

SampleBatch uniform_sample(const ReplayMemory& memory, std::size_t batch_size, Rng& rng) {
    check_sample_args(memory, batch_size);
    SampleBatch batch;
    batch.n_random_drawn = batch_size;
    batch.indices.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        batch.indices.push_back(uniform_index(rng, memory.size()));
    }
    return batch;
}

}  // namespace oymb
