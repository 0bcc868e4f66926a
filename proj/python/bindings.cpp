#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "oymb/config.hpp"
#include "oymb/harness.hpp"

namespace py = pybind11;
using namespace oymb;

namespace {

// Python-facing generator wrapper; a seed and stream id pick the sequence.
struct PyRng {
    Rng engine;
};

std::vector<double> as_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

py::dict metrics_dict(const RunMetrics& m) {
    py::dict d;
    d["success"] = m.success;
    d["cumulative"] = m.cumulative;
    d["lambda"] = m.lambda;
    d["mean_loss"] = m.mean_loss;
    d["steps"] = m.steps;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "OYMB replay sampler, DQN agent and sparse-reward environments";

    py::class_<PyRng>(m, "Rng")
        .def(py::init([](std::uint64_t seed, std::uint64_t stream) {
                 return PyRng{make_stream(seed, stream)};
             }),
             py::arg("seed"), py::arg("stream") = 0)
        .def("uniform_index", [](PyRng& r, std::size_t n) { return uniform_index(r.engine, n); });

    // neuralnet
    py::class_<MLPParameters>(m, "MLPParameters")
        .def_static("zeros", &MLPParameters::zeros, py::arg("input_dim"), py::arg("actions"))
        .def_static("glorot",
                    [](int d, int a, PyRng& r) { return MLPParameters::glorot(d, a, r.engine); },
                    py::arg("input_dim"), py::arg("actions"), py::arg("rng"))
        .def_readwrite("w1", &MLPParameters::w1)
        .def_readwrite("b1", &MLPParameters::b1)
        .def_readwrite("w2", &MLPParameters::w2)
        .def_readwrite("b2", &MLPParameters::b2)
        .def_readwrite("w3", &MLPParameters::w3)
        .def_readwrite("b3", &MLPParameters::b3)
        .def_property_readonly("input_dim", &MLPParameters::input_dim)
        .def_property_readonly("action_count", &MLPParameters::action_count)
        .def("parameter_count", &MLPParameters::parameter_count)
        .def("flatten", &MLPParameters::flatten)
        .def("assign_flat", [](MLPParameters& p, std::vector<double> v) { p.assign_flat(v); })
        .def("copy", [](const MLPParameters& p) { return copy_params(p); })
        .def("__eq__", [](const MLPParameters& a, const MLPParameters& b) { return a == b; });

    m.def("forward",
          [](const MLPParameters& p, std::vector<double> x) -> Eigen::VectorXd { return forward(p, x); },
          py::arg("params"), py::arg("input"));
    m.def("backward",
          [](const MLPParameters& p, std::vector<double> x, int action, double target) {
              return backward(p, x, action, target);
          },
          py::arg("params"), py::arg("input"), py::arg("action"), py::arg("td_target"));

    py::class_<AdamConfig>(m, "AdamConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &AdamConfig::learning_rate)
        .def_readwrite("beta1", &AdamConfig::beta1)
        .def_readwrite("beta2", &AdamConfig::beta2)
        .def_readwrite("epsilon", &AdamConfig::epsilon);
    py::class_<AdamState>(m, "AdamState")
        .def(py::init([](const MLPParameters& p, const AdamConfig& c) {
                 return AdamState::for_params(p, c);
             }),
             py::arg("params"), py::arg("config") = AdamConfig{})
        .def_readonly("t", &AdamState::t);
    m.def("adam_step", &adam_step, py::arg("params"), py::arg("grads"), py::arg("state"));

    // replay
    py::class_<Transition>(m, "Transition")
        .def(py::init([](std::vector<double> obs, std::vector<double> goal, int action,
                         double reward, std::vector<double> next_obs,
                         std::vector<double> next_achieved_goal, bool terminal) {
                 return Transition{std::move(obs), std::move(goal), action, reward,
                                   std::move(next_obs), std::move(next_achieved_goal), terminal};
             }),
             py::arg("obs"), py::arg("goal"), py::arg("action"), py::arg("reward"),
             py::arg("next_obs"), py::arg("next_achieved_goal"), py::arg("terminal") = false)
        .def_readonly("obs", &Transition::obs)
        .def_readonly("goal", &Transition::goal)
        .def_readonly("action", &Transition::action)
        .def_readonly("reward", &Transition::reward)
        .def_readonly("next_obs", &Transition::next_obs)
        .def_readonly("next_achieved_goal", &Transition::next_achieved_goal)
        .def_readonly("terminal", &Transition::terminal);

    py::class_<ReplayMemory>(m, "ReplayMemory")
        .def(py::init<>())
        .def("store", &ReplayMemory::store)
        .def("__len__", &ReplayMemory::size)
        .def("at", &ReplayMemory::at, py::return_value_policy::copy)
        .def_property_readonly("real_indices", [](const ReplayMemory& r) {
            return std::vector<std::size_t>(r.real_indices().begin(), r.real_indices().end());
        })
        .def_property_readonly("her_indices", [](const ReplayMemory& r) {
            return std::vector<std::size_t>(r.her_indices().begin(), r.her_indices().end());
        })
        .def("relabel_episode",
             [](ReplayMemory& r, std::vector<std::size_t> episode, std::vector<double> goal,
                const std::function<bool(std::vector<double>, std::vector<double>)>& reached,
                bool rewrite_goal, bool mark_terminal) {
                 GoalPredicate pred = exact_goal_match;
                 if (reached) {
                     pred = [&reached](std::span<const double> a, std::span<const double> d) {
                         return reached(as_vector(a), as_vector(d));
                     };
                 }
                 return r.relabel_episode(episode, goal, pred,
                                          RelabelOptions{rewrite_goal, mark_terminal});
             },
             py::arg("episode"), py::arg("real_goal"), py::arg("reached") = nullptr,
             py::arg("rewrite_goal") = false, py::arg("mark_terminal") = false)
        .def("dump", [](const ReplayMemory& r) {
            std::ostringstream out;
            r.dump(out);
            return out.str();
        });

    py::class_<OYMBState>(m, "OYMBState")
        .def(py::init([](double lambda, double delta, double limit) {
                 return OYMBState{lambda, delta, limit};
             }),
             py::arg("lambda_"), py::arg("delta") = 1.0, py::arg("limit") = 0.0)
        .def_readwrite("lambda_", &OYMBState::lambda)
        .def_readwrite("delta", &OYMBState::delta)
        .def_readwrite("limit", &OYMBState::limit);
    m.def("schedule_step", &schedule_step, py::arg("state"));
    m.def("preferential_count", &preferential_count, py::arg("batch_size"), py::arg("lambda_"));

    py::class_<SampleBatch>(m, "SampleBatch")
        .def_readonly("indices", &SampleBatch::indices)
        .def_readonly("n_real_drawn", &SampleBatch::n_real_drawn)
        .def_readonly("n_her_drawn", &SampleBatch::n_her_drawn)
        .def_readonly("n_random_drawn", &SampleBatch::n_random_drawn);
    m.def("oymb_sample",
          [](const ReplayMemory& mem, std::size_t b, double lambda, PyRng& r) {
              return oymb_sample(mem, b, lambda, r.engine);
          },
          py::arg("memory"), py::arg("batch_size"), py::arg("lambda_"), py::arg("rng"));
    m.def("uniform_sample",
          [](const ReplayMemory& mem, std::size_t b, PyRng& r) {
              return uniform_sample(mem, b, r.engine);
          },
          py::arg("memory"), py::arg("batch_size"), py::arg("rng"));

    // envs
    py::register_exception<MapError>(m, "MapError", PyExc_ValueError);
    py::class_<MazeMap>(m, "MazeMap")
        .def_property_readonly("start", [](const MazeMap& mm) { return std::pair{mm.start.row, mm.start.col}; })
        .def("goal", [](const MazeMap& mm, const std::string& d) {
            const Cell c = d == "easy" ? mm.easy : d == "medium" ? mm.medium : mm.hard;
            return std::pair{c.row, c.col};
        })
        .def("blocked", [](const MazeMap& mm, int r, int c) { return mm.blocked({r, c}); })
        .def("distance", [](const MazeMap& mm, std::pair<int, int> to) {
            return bfs_distance(mm, mm.start, {to.first, to.second});
        });
    m.def("parse_map", [](const std::string& text) { return parse_map(text); });
    m.def("load_map", [](const std::filesystem::path& p) { return load_map(p); });
    m.def("default_map_path", &default_map_path);

    py::class_<EnvSpec>(m, "EnvSpec")
        .def_readonly("obs_dim", &EnvSpec::obs_dim)
        .def_readonly("goal_dim", &EnvSpec::goal_dim)
        .def_readonly("action_count", &EnvSpec::action_count)
        .def_readonly("episode_length", &EnvSpec::episode_length);
    py::class_<StepResult>(m, "StepResult")
        .def_readonly("next_obs", &StepResult::next_obs)
        .def_readonly("achieved_goal", &StepResult::achieved_goal)
        .def_readonly("reward", &StepResult::reward)
        .def_readonly("terminal", &StepResult::terminal);

    py::class_<Environment>(m, "Environment")
        .def_property_readonly("spec", &Environment::spec)
        .def("reset", [](Environment& e, PyRng& r) { return e.reset(r.engine); })
        .def("step", [](Environment& e, int a, PyRng& r) { return e.step(a, r.engine); })
        .def("achieved_goal", &Environment::achieved_goal)
        .def("desired_goal", &Environment::desired_goal)
        .def("encode", [](const Environment& e, std::vector<double> obs, std::vector<double> goal) {
            return e.encode(obs, goal);
        });
    py::class_<RoboEnv, Environment>(m, "RoboEnv")
        .def(py::init([](const MazeMap& mm, const std::string& difficulty) {
                 const Difficulty d = difficulty == "easy"     ? Difficulty::easy
                                      : difficulty == "medium" ? Difficulty::medium
                                      : difficulty == "hard"   ? Difficulty::hard
                                                               : throw py::value_error("difficulty");
                 return RoboEnv(mm, d);
             }),
             py::arg("map"), py::arg("difficulty") = "easy")
        .def_property_readonly("position", [](const RoboEnv& e) {
            return std::pair{e.state().agent.row, e.state().agent.col};
        });
    py::class_<MountainCarEnv, Environment>(m, "MountainCarEnv")
        .def(py::init<int>(), py::arg("episode_length") = kMcEpisodeLength)
        .def_property_readonly("state", [](const MountainCarEnv& e) {
            return std::pair{e.state().position, e.state().velocity};
        });
    m.def("mc_dynamics",
          [](double p, double v, int a) {
              const MountainCarState s = mc_dynamics({p, v}, a);
              return std::pair{s.position, s.velocity};
          },
          py::arg("position"), py::arg("velocity"), py::arg("action"));

    // agent and harness
    py::enum_<SamplerKind>(m, "SamplerKind")
        .value("oymb", SamplerKind::oymb)
        .value("uniform", SamplerKind::uniform);
    py::class_<AgentConfig>(m, "AgentConfig")
        .def(py::init<>())
        .def_readwrite("gamma", &AgentConfig::gamma)
        .def_readwrite("batch_size", &AgentConfig::batch_size)
        .def_readwrite("episodes", &AgentConfig::episodes)
        .def_readwrite("epsilon_start", &AgentConfig::epsilon_start)
        .def_readwrite("epsilon_end", &AgentConfig::epsilon_end)
        .def_readwrite("sampler", &AgentConfig::sampler)
        .def_readwrite("oymb", &AgentConfig::oymb)
        .def_readwrite("adam", &AgentConfig::adam)
        .def_readwrite("warmup", &AgentConfig::warmup)
        .def_readwrite("her_rewrite_goal", &AgentConfig::her_rewrite_goal)
        .def_readwrite("her_terminal", &AgentConfig::her_terminal)
        .def_readwrite("zero_init", &AgentConfig::zero_init);
    m.def("run_training",
          [](const Environment& env, const AgentConfig& c, std::uint64_t seed) {
              RunMetrics r;
              {
                  py::gil_scoped_release release;
                  r = run_training(env, c, seed);
              }
              return metrics_dict(r);
          },
          py::arg("env"), py::arg("config"), py::arg("seed"));

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::class_<ArmConfig>(m, "ArmConfig")
        .def_readonly("name", &ArmConfig::name)
        .def_readonly("sampler", &ArmConfig::sampler)
        .def_readonly("oymb", &ArmConfig::oymb);
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def_property_readonly("task", [](const ExperimentConfig& c) { return std::string(task_name(c.task)); })
        .def_readonly("arms", &ExperimentConfig::arms)
        .def_readwrite("runs", &ExperimentConfig::runs)
        .def_readwrite("base_seed", &ExperimentConfig::base_seed)
        .def_readwrite("out_dir", &ExperimentConfig::out_dir)
        .def_readwrite("map_path", &ExperimentConfig::map_path)
        .def_readwrite("agent", &ExperimentConfig::agent);
    m.def("parse_config", [](const std::string& text) { return parse_config(text); });
    m.def("load_config", [](const std::filesystem::path& p) { return load_config(p); });

    m.def("run_experiment",
          [](const ExperimentConfig& c, unsigned threads) {
              std::vector<ArmResult> results;
              {
                  py::gil_scoped_release release;
                  results = run_experiment(c, threads);
              }
              py::dict out;
              for (const ArmResult& arm : results) {
                  py::list runs;
                  for (const RunMetrics& r : arm.runs) runs.append(metrics_dict(r));
                  py::dict a;
                  a["sampler"] = std::string(sampler_name(arm.arm.sampler));
                  a["seeds"] = arm.seeds;
                  a["runs"] = runs;
                  a["mean_cumulative"] = arm.aggregate.mean_cumulative;
                  a["std_cumulative"] = arm.aggregate.std_cumulative;
                  a["mean_lambda"] = arm.aggregate.mean_lambda;
                  out[py::str(arm.arm.name)] = a;
              }
              return out;
          },
          py::arg("config"), py::arg("threads") = 0);
    m.def("proportion_probe",
          [](const ExperimentConfig& c) {
              std::vector<ProbeRow> rows;
              {
                  py::gil_scoped_release release;
                  rows = proportion_probe(c);
              }
              py::list out;
              for (const ProbeRow& r : rows) {
                  py::dict d;
                  d["episode"] = r.episode;
                  d["sampler"] = std::string(sampler_name(r.sampler));
                  d["mean"] = r.mean;
                  d["min"] = r.min;
                  d["max"] = r.max;
                  d["target_lambda"] = r.target_lambda;
                  d["available"] = r.available;
                  out.append(d);
              }
              return out;
          },
          py::arg("config"));
}
