#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "oymb/rng.hpp"

namespace oymb {

struct EnvSpec {
    int obs_dim = 0;
    int goal_dim = 0;
    int action_count = 0;
    int episode_length = 0;  // T

    int input_dim() const { return obs_dim + goal_dim; }
};

struct StepResult {
    std::vector<double> next_obs;
    std::vector<double> achieved_goal;
    double reward = 0.0;
    bool terminal = false;
};

// Sparse-reward episodic environment with an explicit goal representation.
// reward == 1 exactly when goal_reached(achieved_goal(), desired_goal()).
class Environment {
public:
    virtual ~Environment() = default;

    virtual EnvSpec spec() const = 0;
    virtual std::vector<double> reset(Rng& rng) = 0;
    virtual StepResult step(int action, Rng& rng) = 0;

    virtual std::vector<double> achieved_goal() const = 0;
    virtual std::vector<double> desired_goal() const = 0;
    virtual bool goal_reached(std::span<const double> achieved,
                              std::span<const double> desired) const = 0;

    // Network input s||g for an observation and goal, scaled to O(1).
    virtual void encode(std::span<const double> obs, std::span<const double> goal,
                        std::span<double> out) const = 0;
    std::vector<double> encode(std::span<const double> obs, std::span<const double> goal) const;

    virtual std::unique_ptr<Environment> clone() const = 0;
};

// ---------------------------------------------------------------------------
// Robo maze

inline constexpr int kGridSize = 10;

class MapError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Cell {
    int row = 0;
    int col = 0;
    friend bool operator==(Cell, Cell) = default;
};

enum class Heading { north, east, south, west };
enum class Difficulty { easy, medium, hard };
enum class RoboAction { forward = 0, turn_left = 1, turn_right = 2 };

struct MazeMap {
    std::array<std::array<bool, kGridSize>, kGridSize> walls{};
    Cell start;
    Cell easy;
    Cell medium;
    Cell hard;

    Cell goal(Difficulty difficulty) const;
    // Cells outside the grid count as walls.
    bool blocked(Cell cell) const;
};

// Grid of 10 lines by 10 characters over {#, ., S, E, M, H}.
MazeMap parse_map(std::string_view text);
MazeMap load_map(const std::filesystem::path& path);
// Path to the map shipped with the sources; the OYMB_MAP environment
// variable overrides it.
std::filesystem::path default_map_path();

// Shortest 4-connected path length, or nullopt when unreachable.
std::optional<int> bfs_distance(const MazeMap& map, Cell from, Cell to);

struct RoboState {
    Cell agent;
    Heading heading = Heading::east;
    Cell goal;
    int steps = 0;
};

// Cells from `from` to the first wall (or grid edge) along `heading`; an
// adjacent wall is 1.
int wall_distance(const MazeMap& map, Cell from, Heading heading);

// Inclusive noisy LIDAR range for a wall `squares` cells away.
std::pair<int, int> lidar_range(int squares);

// Raw [dist_to_goal, lidar]: Euclidean cell-centre distance ignoring walls,
// and a uniform draw from the LIDAR range of the wall ahead.
std::vector<double> robo_observation(const RoboState& state, const MazeMap& map, Rng& rng);

Heading turn_left(Heading h);
Heading turn_right(Heading h);
Cell ahead(Cell c, Heading h);

struct RoboOptions {
    Heading initial_heading = Heading::east;
    bool terminate_on_success = true;
    int episode_length = 0;  // 0 selects the per-difficulty default
};

int default_episode_length(Difficulty difficulty);

class RoboEnv final : public Environment {
public:
    RoboEnv(MazeMap map, Difficulty difficulty, RoboOptions options = {});

    EnvSpec spec() const override;
    std::vector<double> reset(Rng& rng) override;
    StepResult step(int action, Rng& rng) override;

    std::vector<double> achieved_goal() const override;
    std::vector<double> desired_goal() const override;
    bool goal_reached(std::span<const double> achieved,
                      std::span<const double> desired) const override;
    void encode(std::span<const double> obs, std::span<const double> goal,
                std::span<double> out) const override;
    using Environment::encode;
    std::unique_ptr<Environment> clone() const override;

    const RoboState& state() const { return state_; }
    const MazeMap& map() const { return map_; }
    Difficulty difficulty() const { return difficulty_; }
    // Places the agent directly; for tests and probes.
    void set_state(const RoboState& state);

private:
    MazeMap map_;
    Difficulty difficulty_;
    RoboOptions options_;
    int episode_length_;
    RoboState state_;
};

// ---------------------------------------------------------------------------
// MountainCar

struct MountainCarState {
    double position = -0.5;
    double velocity = 0.0;
};

inline constexpr double kMcMinPosition = -1.2;
inline constexpr double kMcMaxPosition = 0.6;
inline constexpr double kMcMaxSpeed = 0.07;
inline constexpr double kMcGoalPosition = 0.5;
inline constexpr double kMcForce = 0.001;
inline constexpr double kMcGravity = 0.0025;
inline constexpr int kMcEpisodeLength = 250;

// Actions: 0 push left, 1 no push, 2 push right.
MountainCarState mc_dynamics(MountainCarState state, int action);
MountainCarState mc_initial_state(Rng& rng);

class MountainCarEnv final : public Environment {
public:
    explicit MountainCarEnv(int episode_length = kMcEpisodeLength);

    EnvSpec spec() const override;
    std::vector<double> reset(Rng& rng) override;
    StepResult step(int action, Rng& rng) override;

    std::vector<double> achieved_goal() const override;
    std::vector<double> desired_goal() const override;
    // achieved position >= desired position
    bool goal_reached(std::span<const double> achieved,
                      std::span<const double> desired) const override;
    void encode(std::span<const double> obs, std::span<const double> goal,
                std::span<double> out) const override;
    using Environment::encode;
    std::unique_ptr<Environment> clone() const override;

    const MountainCarState& state() const { return state_; }
    void set_state(const MountainCarState& state) { state_ = state; }

private:
    int episode_length_;
    int steps_ = 0;
    MountainCarState state_;
};

}  // namespace oymb
