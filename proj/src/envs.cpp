#include "oymb/envs.hpp"

#include "oymb/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <sstream>

#ifndef OYMB_DEFAULT_MAP
#define OYMB_DEFAULT_MAP "data/maps/default.map"
#endif

namespace oymb {

std::vector<double> Environment::encode(std::span<const double> obs,
                                        std::span<const double> goal) const {
    std::vector<double> out(obs.size() + goal.size());
    encode(obs, goal, out);
    return out;
}

// ---------------------------------------------------------------------------
// Robo maze

namespace {

std::string cell_name(Cell c) {
    return "(" + std::to_string(c.row) + ", " + std::to_string(c.col) + ")";
}

constexpr double kDistanceScale = 1.0 / 14.0;
constexpr double kLidarScale = 1.0 / 300.0;
constexpr double kCellScale = 1.0 / kGridSize;

}  // namespace

Cell MazeMap::goal(Difficulty difficulty) const {
    switch (difficulty) {
        case Difficulty::easy: return easy;
        case Difficulty::medium: return medium;
        case Difficulty::hard: return hard;
    }
    return easy;
}

bool MazeMap::blocked(Cell c) const {
    if (c.row < 0 || c.row >= kGridSize || c.col < 0 || c.col >= kGridSize) return true;
    return walls[c.row][c.col];
}

MazeMap parse_map(std::string_view text) {
    std::vector<std::string> lines;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.size() != kGridSize) {
        throw MapError("map must have 10 rows, found " + std::to_string(lines.size()));
    }

    MazeMap map;
    std::optional<Cell> start, easy, medium, hard;
    auto place = [](std::optional<Cell>& slot, char symbol, Cell c) {
        if (slot) {
            throw MapError(std::string("duplicate '") + symbol + "' at " + cell_name(c) +
                           " (first at " + cell_name(*slot) + ")");
        }
        slot = c;
    };
    for (int r = 0; r < kGridSize; ++r) {
        const std::string& line = lines[r];
        if (line.size() != kGridSize) {
            throw MapError("row " + std::to_string(r) + " has " + std::to_string(line.size()) +
                           " columns, expected 10");
        }
        for (int c = 0; c < kGridSize; ++c) {
            const Cell cell{r, c};
            switch (line[c]) {
                case '#': map.walls[r][c] = true; break;
                case '.': break;
                case 'S': place(start, 'S', cell); break;
                case 'E': place(easy, 'E', cell); break;
                case 'M': place(medium, 'M', cell); break;
                case 'H': place(hard, 'H', cell); break;
                default:
                    throw MapError(std::string("unexpected character '") + line[c] + "' at " +
                                   cell_name(cell));
            }
        }
    }
    if (!start) throw MapError("map has no start cell 'S'");
    if (!easy) throw MapError("map has no easy goal 'E'");
    if (!medium) throw MapError("map has no medium goal 'M'");
    if (!hard) throw MapError("map has no hard goal 'H'");
    map.start = *start;
    map.easy = *easy;
    map.medium = *medium;
    map.hard = *hard;

    for (auto [symbol, cell] : {std::pair{'E', map.easy}, std::pair{'M', map.medium},
                                std::pair{'H', map.hard}}) {
        if (!bfs_distance(map, map.start, cell)) {
            throw MapError(std::string("goal '") + symbol + "' at " + cell_name(cell) +
                           " is unreachable from the start " + cell_name(map.start));
        }
    }
    return map;
}

MazeMap load_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MapError("cannot open map file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_map(buffer.str());
    } catch (const MapError& e) {
        throw MapError(path.string() + ": " + e.what());
    }
}

std::filesystem::path default_map_path() {
    if (const char* env = std::getenv("OYMB_MAP"); env && *env) return env;
    return OYMB_DEFAULT_MAP;
}

std::optional<int> bfs_distance(const MazeMap& map, Cell from, Cell to) {
    if (map.blocked(from) || map.blocked(to)) return std::nullopt;
    std::array<std::array<int, kGridSize>, kGridSize> dist;
    for (auto& row : dist) row.fill(-1);
    std::deque<Cell> queue{from};
    dist[from.row][from.col] = 0;
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        if (c == to) return dist[c.row][c.col];
        for (Heading h : {Heading::north, Heading::east, Heading::south, Heading::west}) {
            const Cell n = ahead(c, h);
            if (map.blocked(n) || dist[n.row][n.col] >= 0) continue;
            dist[n.row][n.col] = dist[c.row][c.col] + 1;
            queue.push_back(n);
        }
    }
    return std::nullopt;
}

Heading turn_left(Heading h) {
    switch (h) {
        case Heading::north: return Heading::west;
        case Heading::west: return Heading::south;
        case Heading::south: return Heading::east;
        case Heading::east: return Heading::north;
    }
    return h;
}

Heading turn_right(Heading h) {
    switch (h) {
        case Heading::north: return Heading::east;
        case Heading::east: return Heading::south;
        case Heading::south: return Heading::west;
        case Heading::west: return Heading::north;
    }
    return h;
}

Cell ahead(Cell c, Heading h) {
    switch (h) {
        case Heading::north: return {c.row - 1, c.col};
        case Heading::east: return {c.row, c.col + 1};
        case Heading::south: return {c.row + 1, c.col};
        case Heading::west: return {c.row, c.col - 1};
    }
    return c;
}

int wall_distance(const MazeMap& map, Cell from, Heading heading) {
    int squares = 1;
    for (Cell c = ahead(from, heading); !map.blocked(c); c = ahead(c, heading)) ++squares;
    return squares;
}

std::pair<int, int> lidar_range(int squares) {
    if (squares <= 1) return {10, 30};
    if (squares == 2) return {31, 80};
    if (squares == 3) return {81, 150};
    return {151, 300};
}

std::vector<double> robo_observation(const RoboState& state, const MazeMap& map, Rng& rng) {
    const double dr = state.agent.row - state.goal.row;
    const double dc = state.agent.col - state.goal.col;
    const auto [lo, hi] = lidar_range(wall_distance(map, state.agent, state.heading));
    return {std::sqrt(dr * dr + dc * dc), static_cast<double>(uniform_int(rng, lo, hi))};
}

int default_episode_length(Difficulty difficulty) {
    return difficulty == Difficulty::hard ? 300 : 150;
}

RoboEnv::RoboEnv(MazeMap map, Difficulty difficulty, RoboOptions options)
    : map_(map),
      difficulty_(difficulty),
      options_(options),
      episode_length_(options.episode_length > 0 ? options.episode_length
                                                 : default_episode_length(difficulty)) {
    state_ = {map_.start, options_.initial_heading, map_.goal(difficulty_), 0};
}

EnvSpec RoboEnv::spec() const { return {2, 2, 3, episode_length_}; }

std::vector<double> RoboEnv::reset(Rng& rng) {
    state_ = {map_.start, options_.initial_heading, map_.goal(difficulty_), 0};
    return robo_observation(state_, map_, rng);
}

StepResult RoboEnv::step(int action, Rng& rng) {
    switch (static_cast<RoboAction>(action)) {
        case RoboAction::forward: {
            const Cell next = ahead(state_.agent, state_.heading);
            if (!map_.blocked(next)) state_.agent = next;
            break;
        }
        case RoboAction::turn_left: state_.heading = turn_left(state_.heading); break;
        case RoboAction::turn_right: state_.heading = turn_right(state_.heading); break;
        default: throw std::invalid_argument("robo action must be 0, 1 or 2");
    }
    ++state_.steps;

    StepResult result;
    result.next_obs = robo_observation(state_, map_, rng);
    result.achieved_goal = achieved_goal();
    const bool success = state_.agent == state_.goal;
    result.reward = success ? 1.0 : 0.0;
    result.terminal = (success && options_.terminate_on_success) || state_.steps >= episode_length_;
    return result;
}

std::vector<double> RoboEnv::achieved_goal() const {
    return {static_cast<double>(state_.agent.row), static_cast<double>(state_.agent.col)};
}

std::vector<double> RoboEnv::desired_goal() const {
    return {static_cast<double>(state_.goal.row), static_cast<double>(state_.goal.col)};
}

bool RoboEnv::goal_reached(std::span<const double> achieved,
                           std::span<const double> desired) const {
    return exact_goal_match(achieved, desired);
}

void RoboEnv::encode(std::span<const double> obs, std::span<const double> goal,
                     std::span<double> out) const {
    out[0] = obs[0] * kDistanceScale;
    out[1] = obs[1] * kLidarScale;
    out[2] = goal[0] * kCellScale;
    out[3] = goal[1] * kCellScale;
}

std::unique_ptr<Environment> RoboEnv::clone() const { return std::make_unique<RoboEnv>(*this); }

void RoboEnv::set_state(const RoboState& state) {
    if (map_.blocked(state.agent) || map_.blocked(state.goal)) {
        throw std::invalid_argument("robo state places the agent or goal on a wall");
    }
    state_ = state;
}

// ---------------------------------------------------------------------------
// MountainCar

MountainCarState mc_dynamics(MountainCarState s, int action) {
    if (action < 0 || action > 2) throw std::invalid_argument("mountaincar action must be 0, 1 or 2");
    double v = s.velocity + (action - 1) * kMcForce - kMcGravity * std::cos(3.0 * s.position);
    v = std::clamp(v, -kMcMaxSpeed, kMcMaxSpeed);
    double p = std::clamp(s.position + v, kMcMinPosition, kMcMaxPosition);
    if (p == kMcMinPosition) v = 0.0;
    return {p, v};
}

MountainCarState mc_initial_state(Rng& rng) { return {uniform_real(rng, -0.6, -0.4), 0.0}; }

MountainCarEnv::MountainCarEnv(int episode_length) : episode_length_(episode_length) {
    if (episode_length_ <= 0) throw std::invalid_argument("episode length must be positive");
}

EnvSpec MountainCarEnv::spec() const { return {2, 1, 3, episode_length_}; }

std::vector<double> MountainCarEnv::reset(Rng& rng) {
    state_ = mc_initial_state(rng);
    steps_ = 0;
    return {state_.position, state_.velocity};
}

StepResult MountainCarEnv::step(int action, Rng&) {
    state_ = mc_dynamics(state_, action);
    ++steps_;
    StepResult result;
    result.next_obs = {state_.position, state_.velocity};
    result.achieved_goal = achieved_goal();
    const bool success = state_.position >= kMcGoalPosition;
    result.reward = success ? 1.0 : 0.0;
    result.terminal = success || steps_ >= episode_length_;
    return result;
}

std::vector<double> MountainCarEnv::achieved_goal() const { return {state_.position}; }

std::vector<double> MountainCarEnv::desired_goal() const { return {kMcGoalPosition}; }

bool MountainCarEnv::goal_reached(std::span<const double> achieved,
                                  std::span<const double> desired) const {
    return achieved[0] >= desired[0];
}

void MountainCarEnv::encode(std::span<const double> obs, std::span<const double> goal,
                            std::span<double> out) const {
    out[0] = obs[0];
    out[1] = obs[1];
    out[2] = goal[0];
}

std::unique_ptr<Environment> MountainCarEnv::clone() const {
    return std::make_unique<MountainCarEnv>(*this);
}

}  // namespace oymb
