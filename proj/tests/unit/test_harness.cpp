#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "rprl/errors.hpp"
#include "rprl/harness/evaluation.hpp"
#include "rprl/harness/experiment.hpp"

using namespace rprl;
using namespace rprl::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rprl_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TurnLeftPolicy : public Policy {
 public:
  gw::Action act(const gw::EnvState&, const gw::Observation&, std::mt19937_64&) override {
    return gw::Action::kTurnLeft;
  }
};

MetricsRow row(std::uint64_t step, double reward, int min_len) {
  MetricsRow r;
  r.step = step;
  r.mean_reward = reward;
  r.min_length = min_len;
  return r;
}

}  // namespace

TEST_CASE("config parsing") {
  const Config c = Config::parse("# comment\nenv.kind = lava-gap\n\nrun.seeds = 1, 2,3  # trailing\nagent.steps=500\n");
  CHECK(c.get("env.kind", "") == "lava-gap");
  CHECK(c.get_u64_list("run.seeds", {}) == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(c.get_u64("agent.steps", 0) == 500);
  CHECK(c.get_int("missing.key", 7) == 7);
  CHECK(Config::parse(c.serialize()).entries() == c.entries());

  CHECK_THROWS_AS(Config::parse("env.kind lava"), ConfigError);
  CHECK_THROWS_AS(Config::parse("kind = x"), ConfigError);
  CHECK_THROWS_WITH_AS(Config::parse("a.b = 1\na.b = 2", "f.cfg"), doctest::Contains("f.cfg:2"), ConfigError);
  CHECK_THROWS_WITH_AS(Config::parse("agent.steps = 1e3").get_u64("agent.steps", 0), doctest::Contains("agent.steps"),
                       ConfigError);
  CHECK_THROWS_AS(Config::parse("eval.greedy = maybe").get_bool("eval.greedy", false), ConfigError);
  CHECK_THROWS_AS(Config::parse("x.y = 0.5q").get_double("x.y", 0), ConfigError);
  CHECK_THROWS_WITH_AS(Config::parse("env.kind = x\nenv.kindd = y\nagent.stpes = 1").check_known(env_keys()),
                       doctest::Contains("agent.stpes, env.kindd"), ConfigError);
}

TEST_CASE("RS_SEED overrides seed lists") {
  ::unsetenv("RS_SEED");
  CHECK(effective_seeds({4, 5}) == std::vector<std::uint64_t>{4, 5});
  ::setenv("RS_SEED", "9,11", 1);
  CHECK(effective_seeds({4, 5}) == std::vector<std::uint64_t>{9, 11});
  ::setenv("RS_SEED", "x", 1);
  CHECK_THROWS_AS(effective_seeds({4}), ConfigError);
  ::unsetenv("RS_SEED");
}

TEST_CASE("experiment config defaults and round trip") {
  const ExperimentConfig d = experiment_from_config(Config{});
  CHECK(d.eval_rollouts == 10);
  CHECK(d.seeds.size() == 10);
  CHECK(d.eval_interval == 5000);
  CHECK_FALSE(d.greedy_eval);
  CHECK(d.run_name() == "Ours-1r-two-room");

  Config c;
  c.set("env.kind", "lava-gap");
  c.set("env.layout", "3");
  c.set("agent.variant", "DeepRL");
  c.set("agent.algorithm", "a2c");
  c.set("run.seeds", "3,1");
  c.set("eval.greedy", "true");
  const ExperimentConfig e = experiment_from_config(c);
  CHECK(e.env.kind == gw::EnvKind::kLavaGap);
  CHECK(e.env.layout == 3);
  const Config back = experiment_to_config(e);
  back.check_known(experiment_keys());
  CHECK(experiment_to_config(experiment_from_config(back)).serialize() == back.serialize());

  c.set("agent.variant", "Ours-3r");
  CHECK_THROWS_AS(experiment_from_config(c), ConfigError);
  Config bad;
  bad.set("eval.rollouts", "0");
  CHECK_THROWS_AS(experiment_from_config(bad), ConfigError);
  bad = Config{};
  bad.set("env.layout", "8");
  CHECK_THROWS_AS(experiment_from_config(bad), ConfigError);
}

TEST_CASE("planner matches the BFS oracle on every lava-gap layout") {
  for (int l = 0; l < gw::kNumLavaLayouts; ++l) {
    const gw::EnvSpec env{gw::EnvKind::kLavaGap, 0, l};
    const gw::EnvState st = gw::reset(env, 0).state;
    const auto plan = oracle::shortest_plan(*st.grid, st.pose, st.goal);
    REQUIRE(plan);
    PlannerPolicy planner;
    const EvalResult r = evaluate(planner, env, 5, 1);
    CHECK(r.mean_reward > 0.9);
    CHECK(r.success_rate == 1.0);
    CHECK(r.min_length == static_cast<int>(plan->actions.size()));
    CHECK(r.mean_reward == doctest::Approx(gw::goal_reward(static_cast<int>(plan->actions.size()) - 1)));

    // the visit list of the optimal episode is the BFS tile path
    std::mt19937_64 rng(0);
    const Episode e = run_episode(planner, env, 0, rng);
    CHECK(e.tiles == plan->tiles);
  }
}

TEST_CASE("planner on random layouts and rooms") {
  for (const auto kind : {gw::EnvKind::kFourRoom, gw::EnvKind::kTwoRoom}) {
    const gw::EnvSpec env{kind, 0, gw::kRandomLayout};
    PlannerPolicy planner;
    std::mt19937_64 rng(1);
    for (int k = 0; k < 20; ++k) {
      const std::uint64_t s = eval_episode_seed(7, k);
      const gw::EnvState st = gw::reset(env, s).state;
      const auto plan = oracle::shortest_plan(*st.grid, st.pose, st.goal);
      REQUIRE(plan);
      const Episode e = run_episode(planner, env, s, rng);
      CHECK(e.success);
      CHECK(e.length == static_cast<int>(plan->actions.size()));
    }
  }
}

TEST_CASE("random policy baseline on four-room") {
  RandomPolicy random;
  const EvalResult r = evaluate(random, {gw::EnvKind::kFourRoom, 0, gw::kRandomLayout}, 100, 0);
  CHECK(r.mean_reward < 0.1);
  CHECK(r.min_length >= 1);
  CHECK(r.min_length <= gw::kMaxSteps);
}

TEST_CASE("evaluation input checks and episode records") {
  RandomPolicy random;
  const gw::EnvSpec env{gw::EnvKind::kTwoRoom, 0, gw::kRandomLayout};
  CHECK_THROWS_AS(evaluate(random, env, 0, 0), ConfigError);

  std::set<std::uint64_t> seeds;
  for (int k = 0; k < 1000; ++k) seeds.insert(eval_episode_seed(3, k));
  CHECK(seeds.size() == 1000);

  TurnLeftPolicy spin;
  std::mt19937_64 rng(0);
  const Episode e = run_episode(spin, env, 5, rng);
  CHECK(e.length == gw::kMaxSteps);
  CHECK_FALSE(e.success);
  CHECK(e.tiles.size() == 1);

  const auto eps = rollouts(random, env, 6, 2);
  for (const auto& ep : eps) {
    CHECK(ep.length <= gw::kMaxSteps);
    CHECK(ep.tiles.size() <= static_cast<std::size_t>(ep.length) + 1);
    for (std::size_t i = 1; i < ep.tiles.size(); ++i) CHECK(gw::manhattan(ep.tiles[i - 1], ep.tiles[i]) == 1);
  }
  std::ostringstream os;
  write_trajectories_csv(os, {e});
  CHECK(os.str() == "episode,order,x,y,success\n0,0," + std::to_string(e.tiles[0].x) + "," +
                        std::to_string(e.tiles[0].y) + ",0\n");
}

TEST_CASE("metrics files") {
  const fs::path dir = scratch("metrics");
  MetricsRow r{5000, 12, 0.25, 7, 40.5, 0.3, 0.125};
  {
    std::ofstream os(dir / "m.csv");
    write_metrics_header(os);
    write_metrics_row(os, r);
  }
  const auto rows = read_metrics(dir / "m.csv");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].step == 5000);
  CHECK(rows[0].mean_reward == 0.25);
  CHECK(rows[0].mean_length == 40.5);
  CHECK(rows[0].train_reward == 0.125);

  std::ofstream(dir / "bad_header.csv") << "step,reward\n1,2\n";
  CHECK_THROWS_AS(read_metrics(dir / "bad_header.csv"), FormatError);
  std::ofstream(dir / "bad_row.csv") << kMetricsHeader << "\n1,2,3\n";
  CHECK_THROWS_WITH_AS(read_metrics(dir / "bad_row.csv"), doctest::Contains("bad_row.csv:2"), FormatError);
  std::ofstream(dir / "bad_num.csv") << kMetricsHeader << "\n1,2,0.5x,4,5,0,0\n";
  CHECK_THROWS_AS(read_metrics(dir / "bad_num.csv"), FormatError);
  fs::remove_all(dir);
}

TEST_CASE("curve aggregation") {
  SUBCASE("identical runs have zero bands") {
    std::vector<NamedRun> runs;
    for (int i = 0; i < 10; ++i) runs.push_back({"r" + std::to_string(i), {row(0, 0.1, 50), row(10, 0.7, 9)}});
    const Curve c = aggregate_curves(runs);
    REQUIRE(c.points.size() == 2);
    CHECK(c.points[1].mean_reward == doctest::Approx(0.7));
    CHECK(c.points[1].reward_band == 0.0);
    CHECK(c.points[1].min_length_band == 0.0);
    CHECK(c.warnings.empty());
  }
  SUBCASE("two runs use the sample standard deviation") {
    const Curve c = aggregate_curves({{"a", {row(0, 0.4, 10)}}, {"b", {row(0, 0.6, 20)}}});
    CHECK(c.points[0].mean_reward == doctest::Approx(0.5));
    CHECK(c.points[0].reward_band == doctest::Approx(2.0 * 0.1414213562).epsilon(1e-8));
    CHECK(c.points[0].mean_min_length == doctest::Approx(15.0));
    CHECK(c.points[0].min_length_band == doctest::Approx(2.0 * std::sqrt(50.0)));
  }
  SUBCASE("single run warns") {
    const Curve c = aggregate_curves({{"only", {row(0, 0.3, 4)}}});
    CHECK(c.points[0].reward_band == 0.0);
    REQUIRE(c.warnings.size() == 1);
    CHECK(c.warnings[0].find("only") != std::string::npos);
  }
  SUBCASE("misaligned grids list the offending runs") {
    const std::vector<NamedRun> runs{{"a", {row(0, 0, 1), row(10, 0, 1)}},
                                     {"b", {row(0, 0, 1), row(20, 0, 1)}},
                                     {"c", {row(0, 0, 1), row(10, 0, 1)}},
                                     {"d", {row(0, 0, 1)}}};
    CHECK_THROWS_WITH_AS(aggregate_curves(runs), doctest::Contains("in: b, d"), FormatError);
    CHECK_THROWS_AS(aggregate_curves({}), ConfigError);
  }
  SUBCASE("curve csv") {
    std::ostringstream os;
    write_curve_csv(os, aggregate_curves({{"a", {row(0, 0.4, 10)}}, {"b", {row(0, 0.6, 20)}}}));
    CHECK(os.str().rfind(std::string(kCurveHeader) + "\n0,2,0.5,", 0) == 0);
  }
}

TEST_CASE("runs: layout, manifest, checkpoint and determinism") {
  const fs::path dir = scratch("runs");
  repr::save_model(repr::ReprModel(4), dir / "raw.model");
  ExperimentConfig e;
  e.variant = "Ours+Shaping-1r";
  e.env = {gw::EnvKind::kLavaGap, 0, gw::kRandomLayout};
  e.total_steps = 600;
  e.eval_interval = 200;
  e.eval_rollouts = 3;
  e.model_raw = dir / "raw.model";
  e.runs_dir = dir / "a";
  const Resources res = load_resources(e);
  const RunResult r1 = run_experiment(e, res, 3);
  CHECK(r1.dir == dir / "a" / "Ours+Shaping-1r-lava-gap" / "3");
  CHECK(fs::exists(r1.dir / "checkpoints" / "final.weights"));
  CHECK(r1.rows.size() == 4);
  CHECK(r1.rows.back().step == 600);
  for (const auto& row : r1.rows) CHECK(row.min_length <= gw::kMaxSteps);

  // rerun from the written manifest into another directory
  Config m = Config::load(r1.dir / "manifest.txt");
  m.check_known(experiment_keys());
  CHECK(m.get("manifest.version", "") == code_version());
  m.set("run.dir", (dir / "b").string());
  const ExperimentConfig e2 = experiment_from_config(m);
  REQUIRE(e2.seeds == std::vector<std::uint64_t>{3});
  const RunResult r2 = run_experiment(e2, load_resources(e2), 3);
  CHECK(slurp(r1.dir / "metrics.csv") == slurp(r2.dir / "metrics.csv"));
  CHECK(slurp(r1.dir / "checkpoints" / "final.weights") == slurp(r2.dir / "checkpoints" / "final.weights"));

  // checkpoint round trip into a fresh learner
  agents::Learner l = make_learner(e, res, 3);
  load_checkpoint(r1.dir / "checkpoints" / "final.weights", l.ac);
  CHECK(l.encoder_unchanged());
  AgentPolicy p(l.ac, false);
  const EvalResult again = evaluate(p, e.env, 3, 3 ^ 0x3c6ef372fe94f82bull);
  CHECK(again.mean_reward == r1.rows.back().mean_reward);
  CHECK_THROWS_AS(load_checkpoint(dir / "nope.weights", l.ac), ConfigError);

  ExperimentConfig missing = e;
  missing.model_raw = dir / "absent.model";
  CHECK_THROWS_WITH_AS(load_resources(missing), doctest::Contains("absent.model"), ConfigError);
  missing.model_raw.clear();
  CHECK_THROWS_WITH_AS(load_resources(missing), doctest::Contains("agent.model_raw"), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("evaluation does not disturb training") {
  const repr::ReprModel raw(2);
  agents::AgentConfig cfg;
  cfg.env = {gw::EnvKind::kTwoRoom, 0, gw::kRandomLayout};
  cfg.total_steps = 400;
  cfg.eval_interval = 100;
  cfg.seed = 5;
  agents::Learner a = agents::build_variant("Ours+Shaping-1r", {&raw, nullptr, nullptr}, 5);
  agents::Learner b = a;
  int evals = 0;
  const auto pa = agents::train_agent(a, cfg, [&](const agents::TrainProgress&, const agents::ActorCritic& ac) {
    AgentPolicy p(ac, false);
    evaluate(p, cfg.env, 2, 0);
    ++evals;
  });
  const auto pb = agents::train_agent(b, cfg);
  CHECK(evals == 5);
  CHECK(pa.step == pb.step);
  CHECK(pa.episodes == pb.episodes);
  CHECK(a.ac.policy.head().params() == b.ac.policy.head().params());
  CHECK(a.ac.value.head().params() == b.ac.value.head().params());
}
