#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "beamrl/config.hpp"
#include "beamrl/errors.hpp"
#include "beamrl/harness.hpp"

using namespace beamrl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Config small_plan(const fs::path& out) {
    Config c = parse_config_text("episodes=6\neval_episodes=3\nseeds=0,1\nantennas=1,4\nwidth=6\ndepth=2\n"
                                 "batch_ddpg=8\nbatch_meta=4\nbatch_controller=8\nbatch_dqn=8\n");
    c.plan.output_dir = out.string();
    return c;
}

}  // namespace

TEST_CASE("fpa cell holds constant power") {
    Config c = parse_config_text("episodes=10\neval_episodes=2\ncheckpoints=false\n");
    c.plan.output_dir = "";
    const CellResult r = run_cell(c, {"fpa", 1, 0});
    CHECK(r.train_log.size() == 10);
    CHECK(r.summary.avg_normalized_tx_power == doctest::Approx(1.0));
    CHECK(r.eval_sum_rates.size() == 2);
    CHECK(r.summary.abort_rate >= 0.0);
    CHECK(r.summary.abort_rate <= 1.0);
}

TEST_CASE("cell seeds") {
    const CellId a{"ddpg", 4, 0}, b{"dqn", 4, 0}, c{"ddpg", 8, 0};
    CHECK(a.agent_seed() != b.agent_seed());
    CHECK(a.agent_seed() != c.agent_seed());
    CHECK(a.train_env_seed(3) == b.train_env_seed(3));
    CHECK(a.train_env_seed(3) != a.train_env_seed(4));
    CHECK(a.eval_env_seed(0) != a.train_env_seed(0));
    CHECK(a.tag() == "ddpg_M4_seed0");
}

TEST_CASE("plan output is deterministic") {
    const fs::path base = fs::temp_directory_path() / "beamrl_harness_test";
    fs::remove_all(base);
    Config c1 = small_plan(base / "a");
    Config c2 = small_plan(base / "b");
    c2.plan.jobs = 2;
    run_plan(c1);
    run_plan(c2);
    for (const auto& entry : fs::directory_iterator(base / "a")) {
        const fs::path other = base / "b" / entry.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(slurp(entry.path()) == slurp(other));
    }
    CHECK(fs::exists(base / "a" / "metrics.csv"));
    CHECK(fs::exists(base / "a" / "ccdf.csv"));
    CHECK(fs::exists(base / "a" / "train_hddpg_M4_seed1.csv"));
    CHECK(fs::exists(base / "a" / "ckpt_ddpg_M1_seed0_actor.txt"));

    Config j = small_plan(base / "json");
    j.plan.format = "json";
    j.plan.algorithms = {"fpa"};
    run_plan(j);
    CHECK(slurp(base / "json" / "summary.json").find("\"avg_sum_rate\"") != std::string::npos);
    fs::remove_all(base);
}

TEST_CASE("invalid plans fail before running") {
    Config c = parse_config_text("");
    c.plan.antenna_counts = {3};
    c.plan.output_dir = (fs::temp_directory_path() / "beamrl_never_created").string();
    CHECK_THROWS_AS(run_plan(c), ConfigError);
    CHECK_FALSE(fs::exists(c.plan.output_dir));
    c.plan.antenna_counts = {4};
    c.plan.algorithms = {"ppo"};
    CHECK_THROWS_AS(run_plan(c), ConfigError);
}

TEST_CASE("csv emitters") {
    CHECK(train_log_csv({{0, 5, 12.5, std::nan(""), true}}) == "episode,steps,return,loss,aborted\n0,5,12.5,nan,1\n");
    const auto grid = default_ccdf_grid();
    CHECK(grid.front() == -5.0);
    CHECK(grid.back() == 40.0);
}
