#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "oymb/config.hpp"

using namespace oymb;

namespace {

int error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

std::string error_text(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(parse_config, minimal_robo_easy_uses_defaults) {
    const ExperimentConfig c = parse_config("task = robo_easy\n");
    EXPECT_EQ(c.task, Task::robo_easy);
    EXPECT_EQ(c.episodes(), 250);
    EXPECT_EQ(c.runs, 5);
    EXPECT_EQ(c.agent.batch_size, 64u);
    EXPECT_EQ(c.agent.warmup, 64u);
    EXPECT_EQ(c.agent.gamma, 0.98);
    EXPECT_EQ(c.agent.epsilon_start, 1.0);
    EXPECT_EQ(c.agent.epsilon_end, 0.01);
    ASSERT_EQ(c.arms.size(), 2u);
    EXPECT_EQ(c.arms[0].name, "her");
    EXPECT_EQ(c.arms[0].sampler, SamplerKind::uniform);
    EXPECT_EQ(c.arms[1].name, "her_oymb");
    EXPECT_EQ(c.arms[1].sampler, SamplerKind::oymb);
    EXPECT_EQ(c.arms[1].oymb.lambda, 0.25);
    EXPECT_EQ(c.arms[1].oymb.delta, 1.0);
    EXPECT_EQ(c.arms[1].oymb.limit, 0.25);
}

TEST(parse_config, mountaincar_defaults) {
    const ExperimentConfig c = parse_config("task = mountaincar\n");
    EXPECT_EQ(c.runs, 10);
    EXPECT_EQ(c.arms[1].oymb.lambda, 0.05);
    EXPECT_EQ(make_environment(c)->spec().episode_length, 250);
}

TEST(parse_config, overrides_and_comments) {
    const ExperimentConfig c = parse_config(
        "# experiment\n"
        "task = robo_medium\n"
        "episodes = 40   # short\n"
        "runs = 2\n"
        "seed = 17\n"
        "batch_size = 32\n"
        "\n"
        "[arm fast]\n"
        "sampler = oymb\n"
        "lambda = 0.65\n"
        "delta = 0.996\n"
        "limit = 0.01\n"
        "[probe]\n"
        "episodes = 10\n"
        "schedule = 0:0.1, 5:0.2\n");
    EXPECT_EQ(c.task, Task::robo_medium);
    EXPECT_EQ(c.episodes(), 40);
    EXPECT_EQ(c.runs, 2);
    EXPECT_EQ(c.base_seed, 17u);
    EXPECT_EQ(c.agent.warmup, 32u);
    ASSERT_EQ(c.arms.size(), 1u);
    EXPECT_EQ(c.arms[0].name, "fast");
    EXPECT_EQ(c.arms[0].oymb.delta, 0.996);
    ASSERT_EQ(c.probe.segments.size(), 2u);
    EXPECT_EQ(c.probe.segments[1].begin_episode, 5);
    EXPECT_EQ(c.probe.segments[1].lambda, 0.2);
    EXPECT_EQ(make_environment(c)->spec().episode_length, 150);
}

TEST(parse_config, missing_task_is_an_error) {
    EXPECT_NE(error_text("runs = 3\n").find("task"), std::string::npos);
}

TEST(parse_config, zero_runs_is_rejected) {
    EXPECT_NE(error_text("task = robo_easy\nruns = 0\n").find("runs"), std::string::npos);
}

TEST(parse_config, unknown_key_reports_its_line) {
    EXPECT_EQ(error_line("task = robo_easy\n\nlamda = 0.3\n"), 3);
    EXPECT_NE(error_text("task = robo_easy\nlamda = 0.3\n").find("lamda"), std::string::npos);
}

TEST(parse_config, bad_number_reports_its_line) {
    EXPECT_EQ(error_line("task = mountaincar\nepisodes = ten\n"), 2);
}

TEST(parse_config, duplicate_key_and_arm_are_rejected) {
    EXPECT_EQ(error_line("task = robo_easy\nruns = 2\nruns = 3\n"), 3);
    EXPECT_FALSE(error_text("task = robo_easy\n[arm a]\n[arm a]\n").empty());
}

TEST(parse_config, unknown_task_and_section) {
    EXPECT_EQ(error_line("task = cartpole\n"), 1);
    EXPECT_EQ(error_line("task = robo_easy\n[arms x]\n"), 2);
}

TEST(parse_config, invalid_values_name_the_field) {
    EXPECT_NE(error_text("task = robo_easy\n[arm a]\nlambda = 1.5\n").find("lambda"),
              std::string::npos);
    EXPECT_NE(error_text("task = robo_easy\ngamma = 1\n").find("gamma"), std::string::npos);
    EXPECT_NE(error_text("task = robo_easy\n[probe]\nschedule = 5:0.1\n").find("probe.schedule"),
              std::string::npos);
}

TEST(parse_config, missing_map_is_rejected_for_robo_only) {
    EXPECT_NE(error_text("task = robo_hard\nmap = /no/such.map\n").find("map"), std::string::npos);
    EXPECT_NO_THROW(parse_config("task = mountaincar\nmap = /no/such.map\n"));
}

TEST(load_config, resolves_map_relative_to_config_and_prefixes_path) {
    const auto dir = std::filesystem::temp_directory_path() / "oymb_config_test";
    std::filesystem::create_directories(dir);
    std::filesystem::copy_file(std::string(OYMB_TEST_DATA_DIR) + "/maps/default.map", dir / "m.map",
                               std::filesystem::copy_options::overwrite_existing);
    {
        std::ofstream(dir / "good.cfg") << "task = robo_easy\nmap = m.map\n";
        std::ofstream(dir / "bad.cfg") << "task = robo_easy\nbogus = 1\n";
    }
    EXPECT_EQ(load_config(dir / "good.cfg").map_path, dir / "m.map");
    try {
        load_config(dir / "bad.cfg");
        FAIL();
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("bad.cfg"), std::string::npos);
        EXPECT_NE(what.find("line 2"), std::string::npos);
    }
    EXPECT_THROW(load_config(dir / "absent.cfg"), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST(describe_defaults, mentions_every_top_level_key) {
    const std::string help = describe_defaults();
    for (const char* key : {"task", "episodes", "runs", "seed", "batch_size", "gamma",
                            "learning_rate", "warmup", "her_terminal", "schedule"}) {
        EXPECT_NE(help.find(key), std::string::npos) << key;
    }
}
