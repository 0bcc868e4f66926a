#include "oymb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace oymb {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) {
            throw std::runtime_error("cannot create directory " + path.parent_path().string() +
                                     ": " + ec.message());
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

struct Job {
    std::size_t arm;
    std::size_t run;
};

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string_view sampler_name(SamplerKind kind) {
    return kind == SamplerKind::oymb ? "oymb" : "uniform";
}

AggregateSeries aggregate(const std::vector<RunMetrics>& runs) {
    AggregateSeries out;
    if (runs.empty()) return out;
    const std::size_t episodes = runs.front().cumulative.size();
    for (const auto& r : runs) {
        if (r.cumulative.size() != episodes) {
            throw std::invalid_argument("aggregate: runs have different episode counts");
        }
    }
    const double n = static_cast<double>(runs.size());
    out.mean_cumulative.resize(episodes);
    out.std_cumulative.resize(episodes);
    out.mean_lambda.resize(episodes);
    for (std::size_t e = 0; e < episodes; ++e) {
        double sum = 0.0, lambda_sum = 0.0;
        for (const auto& r : runs) {
            sum += r.cumulative[e];
            lambda_sum += r.lambda[e];
        }
        const double mean = sum / n;
        double squares = 0.0;
        for (const auto& r : runs) {
            const double d = r.cumulative[e] - mean;
            squares += d * d;
        }
        out.mean_cumulative[e] = mean;
        out.std_cumulative[e] = std::sqrt(squares / n);
        out.mean_lambda[e] = lambda_sum / n;
    }
    return out;
}

std::vector<ArmResult> run_experiment(const ExperimentConfig& config, unsigned threads) {
    validate(config);
    const std::unique_ptr<Environment> prototype = make_environment(config);

    std::vector<ArmResult> results(config.arms.size());
    std::vector<Job> jobs;
    for (std::size_t a = 0; a < config.arms.size(); ++a) {
        results[a].arm = config.arms[a];
        results[a].runs.resize(static_cast<std::size_t>(config.runs));
        for (int r = 0; r < config.runs; ++r) {
            results[a].seeds.push_back(config.base_seed + static_cast<std::uint64_t>(r));
            jobs.push_back({a, static_cast<std::size_t>(r)});
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::string error_context;

    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const Job job = jobs[j];
            const ArmConfig& arm = config.arms[job.arm];
            AgentConfig agent = config.agent;
            agent.sampler = arm.sampler;
            agent.oymb = arm.oymb;
            try {
                results[job.arm].runs[job.run] =
                    run_training(*prototype, agent, results[job.arm].seeds[job.run]);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                    error_context = "arm '" + arm.name + "', run " + std::to_string(job.run);
                }
            }
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    if (first_error) {
        try {
            std::rethrow_exception(first_error);
        } catch (const std::exception& e) {
            throw std::runtime_error(error_context + ": " + e.what());
        }
    }
    for (auto& r : results) r.aggregate = aggregate(r.runs);
    return results;
}

std::vector<ProbeRow> proportion_probe(const ExperimentConfig& config) {
    validate(config);
    const std::unique_ptr<Environment> prototype = make_environment(config);
    const ProbeConfig& probe = config.probe;

    std::vector<std::vector<ProbeRow>> per_sampler;
    for (SamplerKind kind : {SamplerKind::oymb, SamplerKind::uniform}) {
        AgentConfig agent = config.agent;
        agent.episodes = probe.episodes;
        agent.sampler = kind;
        agent.manual_schedule = probe.segments;

        TrainingRun run(*prototype, agent, config.base_seed);
        std::vector<ProbeRow> rows;
        for (int e = 0; e < probe.episodes; ++e) {
            run.next_episode();
            const ReplayMemory& memory = run.memory();
            const double lambda = kind == SamplerKind::oymb
                                      ? scheduled_lambda(probe.segments, e)
                                      : 0.0;
            ProbeRow row;
            row.episode = e;
            row.sampler = kind;
            row.target_lambda = lambda;
            row.preferential = preferential_count(probe.batch_size, lambda);
            row.available = memory.listed_count();
            row.memory_size = memory.size();
            row.min = std::numeric_limits<double>::infinity();
            row.max = -std::numeric_limits<double>::infinity();
            double sum = 0.0;
            Rng& rng = run.streams().probe;
            for (std::size_t k = 0; k < probe.draws; ++k) {
                const SampleBatch batch =
                    kind == SamplerKind::oymb
                        ? oymb_sample(memory, probe.batch_size, lambda, rng)
                        : uniform_sample(memory, probe.batch_size, rng);
                std::size_t nonzero = 0;
                for (std::size_t i : batch.indices) nonzero += memory.at(i).reward != 0.0 ? 1 : 0;
                const double fraction =
                    static_cast<double>(nonzero) / static_cast<double>(probe.batch_size);
                sum += fraction;
                row.min = std::min(row.min, fraction);
                row.max = std::max(row.max, fraction);
            }
            row.mean = sum / static_cast<double>(probe.draws);
            rows.push_back(row);
        }
        per_sampler.push_back(std::move(rows));
    }

    std::vector<ProbeRow> merged;
    for (int e = 0; e < probe.episodes; ++e) {
        for (const auto& rows : per_sampler) merged.push_back(rows[static_cast<std::size_t>(e)]);
    }
    return merged;
}

void write_experiment_csv(const AggregateSeries& series, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "episode,mean_cum_success,std_cum_success,mean_lambda\n";
    for (std::size_t e = 0; e < series.mean_cumulative.size(); ++e) {
        out << e << ',' << format_number(series.mean_cumulative[e]) << ','
            << format_number(series.std_cumulative[e]) << ','
            << format_number(series.mean_lambda[e]) << '\n';
    }
    finish(out, path);
}

void write_runs_csv(const std::vector<ArmResult>& results, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "arm,run,seed,episode,success,cum_success,lambda,mean_loss,steps\n";
    for (const ArmResult& arm : results) {
        for (std::size_t r = 0; r < arm.runs.size(); ++r) {
            const RunMetrics& m = arm.runs[r];
            for (std::size_t e = 0; e < m.success.size(); ++e) {
                out << arm.arm.name << ',' << r << ',' << arm.seeds[r] << ',' << e << ','
                    << m.success[e] << ',' << m.cumulative[e] << ',' << format_number(m.lambda[e])
                    << ',' << format_number(m.mean_loss[e]) << ',' << m.steps[e] << '\n';
            }
        }
    }
    finish(out, path);
}

void write_probe_csv(const std::vector<ProbeRow>& rows, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "episode,sampler,mean_prop,min_prop,max_prop\n";
    for (const ProbeRow& row : rows) {
        out << row.episode << ',' << sampler_name(row.sampler) << ',' << format_number(row.mean)
            << ',' << format_number(row.min) << ',' << format_number(row.max) << '\n';
    }
    finish(out, path);
}

std::filesystem::path experiment_csv_path(const std::filesystem::path& dir, Task task,
                                          const std::string& arm) {
    return dir / ("run_" + std::string(task_name(task)) + "_" + arm + ".csv");
}

std::filesystem::path runs_csv_path(const std::filesystem::path& dir, Task task) {
    return dir / ("run_" + std::string(task_name(task)) + "_per_run.csv");
}

std::filesystem::path probe_csv_path(const std::filesystem::path& dir, Task task) {
    return dir / ("probe_" + std::string(task_name(task)) + ".csv");
}

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream cells(line);
        for (std::string cell; std::getline(cells, cell, ',');) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
                throw std::runtime_error(path.string() + ": non-numeric cell '" + cell + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace oymb
