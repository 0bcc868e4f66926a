#include "oymb/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

namespace oymb {

namespace {

struct Entry {
    std::string key;
    std::string value;
    int line = 0;
};

struct Section {
    enum class Kind { top, arm, probe } kind = Kind::top;
    std::string name;
    int line = 0;
    std::vector<Entry> entries;
};

std::string trim(std::string_view s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return {};
    auto end = s.find_last_not_of(" \t\r");
    return std::string(s.substr(begin, end - begin + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

double parse_double(const Entry& e) {
    double value = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError("'" + e.key + "' expects a number, got '" + e.value + "'", e.line);
    }
    return value;
}

std::int64_t parse_int(const Entry& e) {
    std::int64_t value = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError("'" + e.key + "' expects an integer, got '" + e.value + "'", e.line);
    }
    return value;
}

std::size_t parse_count(const Entry& e) {
    const auto v = parse_int(e);
    if (v < 0) throw ConfigError("'" + e.key + "' must be non-negative", e.line);
    return static_cast<std::size_t>(v);
}

bool parse_bool(const Entry& e) {
    const std::string v = lower(e.value);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError("'" + e.key + "' expects true or false, got '" + e.value + "'", e.line);
}

SamplerKind parse_sampler(const Entry& e) {
    const std::string v = lower(e.value);
    if (v == "oymb") return SamplerKind::oymb;
    if (v == "uniform") return SamplerKind::uniform;
    throw ConfigError("'sampler' must be oymb or uniform, got '" + e.value + "'", e.line);
}

Heading parse_heading(const Entry& e) {
    const std::string v = lower(e.value);
    if (v == "north") return Heading::north;
    if (v == "east") return Heading::east;
    if (v == "south") return Heading::south;
    if (v == "west") return Heading::west;
    throw ConfigError("'robo_heading' must be north, east, south or west", e.line);
}

// "0:0.04, 25:0.025, 50:0.055"
std::vector<ScheduleSegment> parse_schedule(const Entry& e) {
    std::vector<ScheduleSegment> out;
    std::stringstream in(e.value);
    for (std::string item; std::getline(in, item, ',');) {
        item = trim(item);
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("schedule entries must look like EPISODE:LAMBDA, got '" + item + "'",
                              e.line);
        }
        const Entry begin{e.key, trim(item.substr(0, colon)), e.line};
        const Entry lambda{e.key, trim(item.substr(colon + 1)), e.line};
        out.push_back({static_cast<int>(parse_int(begin)), parse_double(lambda)});
    }
    if (out.empty()) throw ConfigError("schedule must not be empty", e.line);
    return out;
}

std::vector<Section> split_sections(std::string_view text) {
    std::vector<Section> sections(1);
    std::istringstream in{std::string(text)};
    int line_no = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        // a '#' after whitespace starts a trailing comment
        for (std::size_t i = 1; i < raw.size(); ++i) {
            if (raw[i] == '#' && std::isspace(static_cast<unsigned char>(raw[i - 1]))) {
                raw.erase(i);
                break;
            }
        }
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
            std::istringstream header(line.substr(1, line.size() - 2));
            std::string kind, name, extra;
            header >> kind >> name >> extra;
            Section s;
            s.line = line_no;
            kind = lower(kind);
            if (kind == "arm") {
                if (name.empty() || !extra.empty()) {
                    throw ConfigError("arm sections look like [arm NAME]", line_no);
                }
                for (char c : name) {
                    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
                        throw ConfigError("arm name '" + name +
                                              "' may only use letters, digits, '_' and '-'",
                                          line_no);
                    }
                }
                s.kind = Section::Kind::arm;
                s.name = name;
            } else if (kind == "probe" && name.empty()) {
                s.kind = Section::Kind::probe;
            } else {
                throw ConfigError("unknown section '" + line + "'", line_no);
            }
            sections.push_back(std::move(s));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected 'key = value', got '" + line + "'", line_no);
        }
        Entry e{lower(trim(line.substr(0, eq))), trim(line.substr(eq + 1)), line_no};
        if (e.key.empty()) throw ConfigError("missing key before '='", line_no);
        for (const Entry& prior : sections.back().entries) {
            if (prior.key == e.key) {
                throw ConfigError("duplicate key '" + e.key + "' (first set on line " +
                                      std::to_string(prior.line) + ")",
                                  line_no);
            }
        }
        sections.back().entries.push_back(std::move(e));
    }
    return sections;
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

std::string_view task_name(Task task) {
    switch (task) {
        case Task::mountaincar: return "mountaincar";
        case Task::robo_easy: return "robo_easy";
        case Task::robo_medium: return "robo_medium";
        case Task::robo_hard: return "robo_hard";
    }
    return "unknown";
}

Task parse_task(std::string_view name) {
    for (Task t : {Task::mountaincar, Task::robo_easy, Task::robo_medium, Task::robo_hard}) {
        if (task_name(t) == name) return t;
    }
    throw ConfigError("task: unknown task '" + std::string(name) +
                      "' (expected mountaincar, robo_easy, robo_medium or robo_hard)");
}

OYMBState default_schedule(Task task) {
    if (task == Task::mountaincar) return {0.05, 1.0, 0.05};
    return {0.25, 1.0, 0.25};
}

int default_runs(Task task) { return task == Task::mountaincar ? 10 : 5; }

ExperimentConfig default_config(Task task) {
    ExperimentConfig c;
    c.task = task;
    c.runs = default_runs(task);
    c.map_path = default_map_path();
    c.agent.oymb = default_schedule(task);
    c.arms = {{"her", SamplerKind::uniform, default_schedule(task)},
              {"her_oymb", SamplerKind::oymb, default_schedule(task)}};
    return c;
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    const std::vector<Section> sections = split_sections(text);

    const Section& top = sections.front();
    auto task_entry = std::find_if(top.entries.begin(), top.entries.end(),
                                   [](const Entry& e) { return e.key == "task"; });
    if (task_entry == top.entries.end()) throw ConfigError("task: required key is missing");
    Task task;
    try {
        task = parse_task(task_entry->value);
    } catch (const ConfigError& e) {
        throw ConfigError(e.what(), task_entry->line);
    }

    ExperimentConfig c = default_config(task);
    bool warmup_set = false;
    for (const Entry& e : top.entries) {
        const std::string& k = e.key;
        if (k == "task") continue;
        else if (k == "episodes") c.agent.episodes = static_cast<int>(parse_int(e));
        else if (k == "runs") c.runs = static_cast<int>(parse_int(e));
        else if (k == "seed") c.base_seed = static_cast<std::uint64_t>(parse_count(e));
        else if (k == "out") c.out_dir = e.value;
        else if (k == "map") {
            std::filesystem::path p = e.value;
            c.map_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        }
        else if (k == "gamma") c.agent.gamma = parse_double(e);
        else if (k == "batch_size") c.agent.batch_size = parse_count(e);
        else if (k == "learning_rate") c.agent.adam.learning_rate = parse_double(e);
        else if (k == "adam_beta1") c.agent.adam.beta1 = parse_double(e);
        else if (k == "adam_beta2") c.agent.adam.beta2 = parse_double(e);
        else if (k == "adam_epsilon") c.agent.adam.epsilon = parse_double(e);
        else if (k == "epsilon_start") c.agent.epsilon_start = parse_double(e);
        else if (k == "epsilon_end") c.agent.epsilon_end = parse_double(e);
        else if (k == "warmup") { c.agent.warmup = parse_count(e); warmup_set = true; }
        else if (k == "her_rewrite_goal") c.agent.her_rewrite_goal = parse_bool(e);
        else if (k == "her_terminal") c.agent.her_terminal = parse_bool(e);
        else if (k == "zero_init") c.agent.zero_init = parse_bool(e);
        else if (k == "robo_heading") c.robo.initial_heading = parse_heading(e);
        else if (k == "terminate_on_success") c.robo.terminate_on_success = parse_bool(e);
        else if (k == "episode_length") c.robo.episode_length = static_cast<int>(parse_int(e));
        else throw ConfigError("unknown key '" + k + "'", e.line);
    }
    if (!warmup_set) c.agent.warmup = c.agent.batch_size;

    std::vector<ArmConfig> arms;
    for (std::size_t i = 1; i < sections.size(); ++i) {
        const Section& s = sections[i];
        if (s.kind == Section::Kind::probe) {
            for (const Entry& e : s.entries) {
                if (e.key == "episodes") c.probe.episodes = static_cast<int>(parse_int(e));
                else if (e.key == "draws") c.probe.draws = parse_count(e);
                else if (e.key == "batch") c.probe.batch_size = parse_count(e);
                else if (e.key == "schedule") c.probe.segments = parse_schedule(e);
                else throw ConfigError("unknown key '" + e.key + "' in [probe]", e.line);
            }
            continue;
        }
        ArmConfig arm{s.name, SamplerKind::oymb, default_schedule(task)};
        for (const Entry& e : s.entries) {
            if (e.key == "sampler") arm.sampler = parse_sampler(e);
            else if (e.key == "lambda") arm.oymb.lambda = parse_double(e);
            else if (e.key == "delta") arm.oymb.delta = parse_double(e);
            else if (e.key == "limit") arm.oymb.limit = parse_double(e);
            else throw ConfigError("unknown key '" + e.key + "' in [arm " + s.name + "]", e.line);
        }
        for (const ArmConfig& prior : arms) {
            if (prior.name == arm.name) {
                throw ConfigError("duplicate arm '" + arm.name + "'", s.line);
            }
        }
        arms.push_back(std::move(arm));
    }
    if (!arms.empty()) c.arms = std::move(arms);

    validate(c);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_config(buffer.str(), path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void validate(const ExperimentConfig& c) {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (c.runs < 1) fail("runs: must be at least 1");
    if (c.arms.empty()) fail("arms: at least one arm is required");
    if (c.agent.episodes < 0) fail("episodes: must be non-negative");
    try {
        c.agent.validate();
        for (const ArmConfig& arm : c.arms) {
            AgentConfig a = c.agent;
            a.oymb = arm.oymb;
            a.validate();
        }
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }
    if (c.task != Task::mountaincar && !std::filesystem::exists(c.map_path)) {
        fail("map: file does not exist: " + c.map_path.string());
    }
    if (c.robo.episode_length < 0) fail("episode_length: must be non-negative");

    const ProbeConfig& p = c.probe;
    if (p.episodes < 0) fail("probe.episodes: must be non-negative");
    if (p.draws < 1) fail("probe.draws: must be at least 1");
    if (p.batch_size < 1) fail("probe.batch: must be at least 1");
    if (p.segments.empty() || p.segments.front().begin_episode != 0) {
        fail("probe.schedule: first segment must start at episode 0");
    }
    for (std::size_t i = 0; i < p.segments.size(); ++i) {
        const auto& s = p.segments[i];
        if (s.lambda < 0.0 || s.lambda > 1.0) fail("probe.schedule: lambda must lie in [0, 1]");
        if (i > 0 && s.begin_episode <= p.segments[i - 1].begin_episode) {
            fail("probe.schedule: segments must start at strictly increasing episodes");
        }
        if (i > 0 && s.begin_episode >= p.episodes) {
            fail("probe.schedule: segment starting at episode " +
                 std::to_string(s.begin_episode) + " lies past the probe's episodes");
        }
    }
}

std::unique_ptr<Environment> make_environment(const ExperimentConfig& config) {
    switch (config.task) {
        case Task::mountaincar:
            return std::make_unique<MountainCarEnv>(
                config.robo.episode_length > 0 ? config.robo.episode_length : kMcEpisodeLength);
        case Task::robo_easy:
            return std::make_unique<RoboEnv>(load_map(config.map_path), Difficulty::easy, config.robo);
        case Task::robo_medium:
            return std::make_unique<RoboEnv>(load_map(config.map_path), Difficulty::medium,
                                             config.robo);
        case Task::robo_hard:
            return std::make_unique<RoboEnv>(load_map(config.map_path), Difficulty::hard, config.robo);
    }
    throw ConfigError("task: unsupported");
}

std::string describe_defaults() {
    std::ostringstream out;
    out << "Config file: `key = value` lines; `[arm NAME]` and `[probe]` sections.\n"
           "Defaults:\n"
           "  task                  (required) mountaincar | robo_easy | robo_medium | robo_hard\n"
           "  episodes              250           training episodes per run\n"
           "  runs                  10 mountaincar, 5 robo   seeds per arm\n"
           "  seed                  0             run r uses seed + r\n"
           "  out                   results       output directory\n"
           "  map                   " << default_map_path().string() << "\n"
           "  batch_size            64           \n"
           "  epsilon_start         1.0           linear anneal per episode\n"
           "  epsilon_end           0.01         \n"
           "  gamma                 0.98          not reported; chosen for long horizons\n"
           "  learning_rate         0.001         standard Adam defaults\n"
           "  adam_beta1            0.9\n"
           "  adam_beta2            0.999\n"
           "  adam_epsilon          1e-8\n"
           "  warmup                batch_size    transitions stored before the first update\n"
           "  her_rewrite_goal      false         true also writes the virtual goal into inputs\n"
           "  her_terminal          false         true also marks hindsight transitions terminal\n"
           "  zero_init             false         zero network instead of Glorot-uniform init\n"
           "  robo_heading          east          initial heading in the maze\n"
           "  terminate_on_success  true\n"
           "  episode_length        0             0 = task default: 250 mountaincar,\n"
           "                                      150 robo easy/medium, 300 robo hard\n"
           "Arms (default: `her` uniform sampler and `her_oymb` OYMB sampler):\n"
           "  sampler               oymb | uniform\n"
           "  lambda / delta / limit  mountaincar 0.05 / 1 / 0.05, robo 0.25 / 1 / 0.25\n"
           "Probe ([probe] section; share of reward-1 samples per batch):\n"
           "  episodes              100\n"
           "  draws                 1000          batches drawn per episode\n"
           "  batch                 1000          probe batch size\n"
           "  schedule              0:0.04, 25:0.025, 50:0.055\n";
    return out.str();
}

}  // namespace oymb
