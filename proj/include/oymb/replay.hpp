#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "oymb/rng.hpp"

namespace oymb {

// One stored step. The network sees obs||goal and next_obs||goal.
struct Transition {
    std::vector<double> obs;
    std::vector<double> goal;
    int action = 0;
    double reward = 0.0;  // sparse: 0 or 1
    std::vector<double> next_obs;
    std::vector<double> next_achieved_goal;
    bool terminal = false;
};

enum class GoalList : std::uint8_t { none, real, her };

using GoalPredicate =
    std::function<bool(std::span<const double> achieved, std::span<const double> desired)>;

bool exact_goal_match(std::span<const double> achieved, std::span<const double> desired);

struct RelabelOptions {
    // Also write the virtual goal into the goal slot of hindsight transitions.
    bool rewrite_goal = false;
    // Mark every transition that reaches the virtual goal as terminal.
    bool mark_terminal = false;
};

// Append-only transition store with the two reward-1 index lists.
//
// Every reward-1 transition is listed in exactly one of real_indices() and
// her_indices() once its episode has been relabeled; the lists never share
// an index.
class ReplayMemory {
public:
    std::size_t store(Transition transition);

    std::size_t size() const { return transitions_.size(); }
    bool empty() const { return transitions_.empty(); }
    const Transition& at(std::size_t index) const { return transitions_.at(index); }

    std::span<const std::size_t> real_indices() const { return real_indices_; }
    std::span<const std::size_t> her_indices() const { return her_indices_; }
    GoalList membership(std::size_t index) const { return membership_.at(index); }

    // Number of transitions available to the preferential draws.
    std::size_t listed_count() const { return real_indices_.size() + her_indices_.size(); }

    // Final-state hindsight relabeling of a finished episode.
    //
    // The virtual goal is the next achieved goal of the last transition in
    // `episode`. Transitions whose next achieved goal satisfies `reached`
    // against it get reward 1 and are listed under real_indices when the
    // virtual goal satisfies the real goal, under her_indices otherwise.
    // Transitions that already carry reward 1 for the real goal are listed
    // under real_indices. See RelabelOptions for the optional rewrites.
    //
    // Returns the number of transitions whose reward changed. Applying it
    // twice to the same episode changes nothing the second time.
    std::size_t relabel_episode(std::span<const std::size_t> episode,
                                std::span<const double> real_goal, const GoalPredicate& reached,
                                RelabelOptions options = {});

    // Debug dump, one transition per line:
    //   index obs=[..] goal=[..] action=a reward=r next_obs=[..] achieved=[..] terminal=t list=l
    void dump(std::ostream& out) const;

private:
    void list(std::size_t index, GoalList which);

    std::vector<Transition> transitions_;
    std::vector<GoalList> membership_;
    std::vector<std::size_t> real_indices_;
    std::vector<std::size_t> her_indices_;
};

// Multiplicative lambda schedule: lambda <- delta * lambda, clamped at limit.
// delta < 1 treats limit as a floor, delta > 1 as a ceiling, delta = 1 is inert.
struct OYMBState {
    double lambda = 0.25;
    double delta = 1.0;
    double limit = 0.25;

    enum class LimitKind { min, max, inert };
    LimitKind limit_kind() const;
};

OYMBState schedule_step(OYMBState state);

struct SampleBatch {
    std::vector<std::size_t> indices;  // memory indices, size B
    std::size_t n_real_drawn = 0;
    std::size_t n_her_drawn = 0;
    std::size_t n_random_drawn = 0;
};

// round(B * lambda), halves away from zero.
std::size_t preferential_count(std::size_t batch_size, double lambda);

// Guaranteed-composition draw: round(B*lambda) draws from the reward-1 lists,
// real-goal transitions first, the remainder uniformly from the whole memory.
// A shortfall in her_indices is routed to the uniform part so the batch
// always has exactly B entries. All draws are with replacement.
SampleBatch oymb_sample(const ReplayMemory& memory, std::size_t batch_size, double lambda,
                        Rng& rng);
inline SampleBatch oymb_sample(const ReplayMemory& memory, std::size_t batch_size,
                               const OYMBState& state, Rng& rng) {
    return oymb_sample(memory, batch_size, state.lambda, rng);
}

SampleBatch uniform_sample(const ReplayMemory& memory, std::size_t batch_size, Rng& rng);

}  // namespace oymb
