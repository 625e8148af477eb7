#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include "rprl/dataset/buffer.hpp"
#include "rprl/errors.hpp"
#include "rprl/format.hpp"
#include "rprl/harness/curves.hpp"
#include "rprl/harness/evaluation.hpp"
#include "rprl/harness/experiment.hpp"
#include "rprl/reprlearn/heatmap.hpp"

using namespace rprl;
using namespace rprl::harness;

namespace {

// Flags and --set entries collected per subcommand; applied over the config
// file so that flags win.
struct Overrides {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_file, "flat section.key = value file");
  sub->add_option("--set", o.sets, "override a config key, key=value")->take_all();
}

void flag(CLI::App* sub, Overrides& o, const std::string& name, const std::string& key, const std::string& help) {
  sub->add_option_function<std::string>(name, [&o, key](const std::string& v) { o.values[key] = v; }, help);
}

void list_flag(CLI::App* sub, Overrides& o, const std::string& name, const std::string& key, const std::string& help) {
  sub->add_option_function<std::vector<std::string>>(
         name,
         [&o, key](const std::vector<std::string>& v) {
           std::string joined;
           for (const auto& s : v) joined += (joined.empty() ? "" : ",") + s;
           o.values[key] = joined;
         },
         help)
      ->expected(1, -1);
}

void switch_flag(CLI::App* sub, Overrides& o, const std::string& name, const std::string& key, const std::string& help) {
  sub->add_flag_callback(name, [&o, key]() { o.values[key] = "true"; }, help);
}

Config resolve(const Overrides& o, std::set<std::string> known) {
  Config c = o.config_file.empty() ? Config{} : Config::load(o.config_file);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    c.set(s.substr(0, eq), s.substr(eq + 1));
  }
  for (const auto& [k, v] : o.values) c.set(k, v);
  known.insert("manifest.version");
  c.check_known(known);
  return c;
}

std::set<std::string> with_env(std::initializer_list<std::string> keys) {
  std::set<std::string> s = env_keys();
  s.insert(keys);
  return s;
}

int cmd_collect(const Config& c) {
  Config cc = c;
  if (!cc.has("env.goal")) cc.set("env.goal", "random-training");
  const gw::EnvSpec env = env_from_config(cc);
  const auto n = cc.get_u64("collect.n", 10000);
  const auto seed = cc.get_u64("collect.seed", 0);
  const std::string out = cc.require("collect.out");
  if (n == 0) throw ConfigError("collect.n must be positive");
  const data::Buffer buf = data::collect_random(env, n, seed);
  const std::uint32_t crc = data::save_buffer(out, buf);
  std::cout << "wrote " << buf.size() << " transitions to " << out << " (crc32 " << crc << ")\n";
  return 0;
}

int cmd_train_repr(const Config& c) {
  std::uint32_t crc = 0;
  const std::string buffer_path = c.require("repr.buffer");
  if (!std::filesystem::exists(buffer_path)) throw ConfigError("repr.buffer: no such file " + buffer_path);
  const data::Buffer buf = data::load_buffer(buffer_path, &crc);
  const int m = static_cast<int>(c.get_int("repr.m", 1));
  const double gamma = c.get_double("repr.gamma", 0.99);
  const int oversample = static_cast<int>(c.get_int("repr.oversample", 10));
  const double validation = c.get_double("repr.validation", 0.1);
  const std::string out = c.require("repr.out");
  repr::TrainConfig tc;
  tc.seed = c.get_u64("repr.seed", 0);
  tc.lr = static_cast<float>(c.get_double("repr.lr", tc.lr));
  tc.batch = static_cast<int>(c.get_int("repr.batch", tc.batch));
  tc.epochs = static_cast<int>(c.get_int("repr.epochs", tc.epochs));
  tc.patience = static_cast<int>(c.get_int("repr.patience", tc.patience));
  if (m < 1) throw ConfigError("repr.m must be at least 1");
  if (oversample < 1) throw ConfigError("repr.oversample must be at least 1");
  if (!(validation >= 0.0 && validation < 1.0)) throw ConfigError("repr.validation must be in [0, 1)");

  const data::Split split = repr::prepare_training_data(buf, gamma, m, oversample, validation, tc.seed);
  repr::ReprModel model(tc.seed, c.get_bool("repr.tied", true));
  model.provenance = {gamma, m, oversample, crc, c.get("repr.env", "two-room")};
  const repr::TrainReport rep = repr::train(model, split.train, split.validation, tc);
  repr::save_model(model, out);
  for (const auto& e : rep.history)
    std::cout << "epoch " << e.epoch << " train_mse " << fmt_num(e.train_mse) << " val_mse " << fmt_num(e.val_mse)
              << '\n';
  std::cout << "wrote " << out << " (M = " << m << ", best epoch " << rep.best_epoch << ")\n";
  return 0;
}

int cmd_train_agent(const Config& c) {
  const ExperimentConfig e = experiment_from_config(c);
  const Resources res = load_resources(e);
  for (const auto seed : effective_seeds(e.seeds)) {
    const RunResult r = run_experiment(e, res, seed, &std::cerr);
    const auto& last = r.rows.back();
    std::cout << r.dir.string() << ": step " << last.step << " mean_reward " << fmt_num(last.mean_reward)
              << " min_length " << last.min_length << '\n';
  }
  return 0;
}

// Owns whatever the chosen policy points into.
struct PolicySetup {
  gw::EnvSpec env;
  Resources res;
  std::optional<agents::Learner> learner;
  std::unique_ptr<Policy> policy;
};

std::unique_ptr<PolicySetup> make_policy(const Config& c) {
  auto s = std::make_unique<PolicySetup>();
  const std::string kind = c.get("eval.policy", c.has("eval.run") ? "agent" : "");
  if (kind == "agent") {
    const std::filesystem::path run = c.require("eval.run");
    const auto manifest_path = run / "manifest.txt";
    if (!std::filesystem::exists(manifest_path)) throw ConfigError("eval.run: no manifest at " + manifest_path.string());
    const Config manifest = Config::load(manifest_path);
    manifest.check_known(experiment_keys());
    const ExperimentConfig e = experiment_from_config(manifest);
    s->env = e.env;
    s->res = load_resources(e);
    s->learner = make_learner(e, s->res, e.seeds.front());
    load_checkpoint(run / "checkpoints" / "final.weights", s->learner->ac);
    s->policy = std::make_unique<AgentPolicy>(s->learner->ac, c.get_bool("eval.greedy", false));
  } else if (kind == "random") {
    s->policy = std::make_unique<RandomPolicy>();
  } else if (kind == "planner") {
    s->policy = std::make_unique<PlannerPolicy>();
  } else {
    throw ConfigError("eval.policy must be agent, random or planner (agent needs eval.run)");
  }
  bool env_given = false;
  for (const auto& k : env_keys()) env_given = env_given || c.has(k);
  if (env_given || kind != "agent") s->env = env_from_config(c);
  return s;
}

const std::set<std::string> kPolicyKeys{"eval.run", "eval.policy", "eval.greedy", "eval.seed"};

int cmd_evaluate(const Config& c) {
  const auto setup = make_policy(c);
  const int n = static_cast<int>(c.get_int("eval.episodes", 100));
  const EvalResult r = evaluate(*setup->policy, setup->env, n, c.get_u64("eval.seed", 0));
  std::cout << "episodes " << r.episodes << " mean_reward " << fmt_num(r.mean_reward) << " min_length " << r.min_length
            << " mean_length " << fmt_num(r.mean_length) << " success_rate " << fmt_num(r.success_rate) << '\n';
  return 0;
}

int cmd_trajmap(const Config& c) {
  const auto setup = make_policy(c);
  const int n = static_cast<int>(c.get_int("trajmap.episodes", 10));
  const std::string out = c.require("trajmap.out");
  const auto eps = rollouts(*setup->policy, setup->env, n, c.get_u64("eval.seed", 0));
  std::ofstream os(out);
  write_trajectories_csv(os, eps);
  if (!os) throw FormatError("cannot write " + out);
  std::cout << "wrote " << eps.size() << " trajectories to " << out << '\n';
  return 0;
}

void write_pgm(const std::string& path, const repr::Heatmap& h) {
  std::ofstream os(path, std::ios::binary);
  os << "P5\n" << h.width << ' ' << h.height << "\n255\n";
  const double lo = h.min();
  const double span = h.max() - lo;
  for (const auto& v : h.values) {
    unsigned char px = 0;
    if (v) px = static_cast<unsigned char>(1 + (span > 0 ? 254.0 * (*v - lo) / span : 0.0));
    os.put(static_cast<char>(px));
  }
  if (!os) throw FormatError("cannot write " + path);
}

int cmd_heatmap(const Config& c) {
  const std::filesystem::path model_path = c.require("heatmap.model");
  if (!std::filesystem::exists(model_path)) throw ConfigError("heatmap.model: no such file " + model_path.string());
  const repr::ReprModel model = repr::load_model(model_path);
  const gw::EnvSpec env = env_from_config(c);
  if (env.kind == gw::EnvKind::kFourRoom) throw ConfigError("heatmap: four-room goals are random; use two-room or lava-gap");
  if (env.kind == gw::EnvKind::kTwoRoom && env.goal == gw::kRandomTrainingGoal)
    throw ConfigError("heatmap: env.goal must name one goal");
  if (env.kind == gw::EnvKind::kLavaGap && env.layout == gw::kRandomLayout)
    throw ConfigError("heatmap: env.layout must name one layout");
  const gw::EnvState st = gw::reset(env, 0).state;
  const repr::Heatmap h = repr::heatmap(model, *st.grid, st.goal);
  const std::string out = c.require("heatmap.out");
  std::ofstream os(out);
  repr::write_heatmap_csv(os, h);
  if (!os) throw FormatError("cannot write " + out);
  if (c.has("heatmap.pgm")) write_pgm(c.require("heatmap.pgm"), h);
  const gw::Pos a = h.argmax();
  std::cout << "argmax (" << a.x << ", " << a.y << ") value " << fmt_num(h.max()) << '\n';
  return 0;
}

int cmd_curves(const Config& c) {
  std::vector<std::filesystem::path> runs;
  for (const auto& r : c.get_list("curves.runs")) runs.emplace_back(r);
  if (runs.empty()) throw ConfigError("missing required key 'curves.runs'");
  const Curve curve = aggregate_curve_files(runs);
  for (const auto& w : curve.warnings) std::cerr << "warning: " << w << '\n';
  const std::string out = c.require("curves.out");
  std::ofstream os(out);
  write_curve_csv(os, curve);
  if (!os) throw FormatError("cannot write " + out);
  std::cout << "wrote " << curve.points.size() << " points over " << runs.size() << " runs to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward-predictive representation experiments"};
  app.require_subcommand(1);
  std::map<std::string, Overrides> ov;

  auto* collect = app.add_subcommand("collect", "random-policy transitions to a buffer file");
  add_common(collect, ov["collect"]);
  flag(collect, ov["collect"], "--env", "env.kind", "two-room, lava-gap or four-room");
  flag(collect, ov["collect"], "--goal", "env.goal", "two-room goal");
  flag(collect, ov["collect"], "--n", "collect.n", "transition count");
  flag(collect, ov["collect"], "--seed", "collect.seed", "rng seed");
  flag(collect, ov["collect"], "--out", "collect.out", "buffer path");

  auto* repr_cmd = app.add_subcommand("train-repr", "fit the reward-predictive encoder");
  add_common(repr_cmd, ov["train-repr"]);
  flag(repr_cmd, ov["train-repr"], "--buffer", "repr.buffer", "buffer path");
  flag(repr_cmd, ov["train-repr"], "--m", "repr.m", "smoothing horizon M");
  flag(repr_cmd, ov["train-repr"], "--seed", "repr.seed", "rng seed");
  flag(repr_cmd, ov["train-repr"], "--epochs", "repr.epochs", "maximum epochs");
  flag(repr_cmd, ov["train-repr"], "--out", "repr.out", "model path");

  auto* agent = app.add_subcommand("train-agent", "train a policy variant over seeds");
  add_common(agent, ov["train-agent"]);
  flag(agent, ov["train-agent"], "--env", "env.kind", "environment");
  flag(agent, ov["train-agent"], "--goal", "env.goal", "two-room goal");
  flag(agent, ov["train-agent"], "--layout", "env.layout", "lava-gap layout or random");
  flag(agent, ov["train-agent"], "--variant", "agent.variant", "DeepRL, SF, Ours-1r, ...");
  flag(agent, ov["train-agent"], "--algorithm", "agent.algorithm", "ppo or a2c");
  flag(agent, ov["train-agent"], "--steps", "agent.steps", "environment steps per run");
  list_flag(agent, ov["train-agent"], "--seeds", "run.seeds", "seed list");
  flag(agent, ov["train-agent"], "--name", "run.name", "run name");
  flag(agent, ov["train-agent"], "--runs-dir", "run.dir", "output root");
  flag(agent, ov["train-agent"], "--model-raw", "agent.model_raw", "M = 1 model");
  flag(agent, ov["train-agent"], "--model-smooth", "agent.model_smooth", "M = 64 model");
  flag(agent, ov["train-agent"], "--sf-buffer", "agent.sf_buffer", "buffer for SF pretraining");
  flag(agent, ov["train-agent"], "--eval-interval", "eval.interval", "steps between evaluations");
  flag(agent, ov["train-agent"], "--rollouts", "eval.rollouts", "episodes per evaluation");
  switch_flag(agent, ov["train-agent"], "--greedy", "eval.greedy", "greedy evaluation");

  auto* eval = app.add_subcommand("evaluate", "roll out a policy without shaping");
  add_common(eval, ov["evaluate"]);
  auto* traj = app.add_subcommand("trajmap", "per-episode tile sequences as CSV");
  add_common(traj, ov["trajmap"]);
  for (auto* sub : {eval, traj}) {
    auto& o = ov[sub->get_name()];
    flag(sub, o, "--run", "eval.run", "run directory with manifest and checkpoint");
    flag(sub, o, "--policy", "eval.policy", "agent, random or planner");
    flag(sub, o, "--env", "env.kind", "environment (defaults to the run's)");
    flag(sub, o, "--goal", "env.goal", "two-room goal");
    flag(sub, o, "--layout", "env.layout", "lava-gap layout");
    flag(sub, o, "--seed", "eval.seed", "evaluation seed");
    switch_flag(sub, o, "--greedy", "eval.greedy", "argmax actions");
  }
  flag(eval, ov["evaluate"], "--n", "eval.episodes", "episodes");
  flag(traj, ov["trajmap"], "--episodes", "trajmap.episodes", "episodes");
  flag(traj, ov["trajmap"], "--out", "trajmap.out", "CSV path");

  auto* heat = app.add_subcommand("heatmap", "predicted reward per tile for one goal");
  add_common(heat, ov["heatmap"]);
  flag(heat, ov["heatmap"], "--model", "heatmap.model", "model path");
  flag(heat, ov["heatmap"], "--env", "env.kind", "two-room or lava-gap");
  flag(heat, ov["heatmap"], "--goal", "env.goal", "two-room goal");
  flag(heat, ov["heatmap"], "--layout", "env.layout", "lava-gap layout");
  flag(heat, ov["heatmap"], "--out", "heatmap.out", "CSV path");
  flag(heat, ov["heatmap"], "--pgm", "heatmap.pgm", "optional PGM image");

  auto* curves = app.add_subcommand("curves", "aggregate run metrics into mean and 2-sigma bands");
  add_common(curves, ov["curves"]);
  list_flag(curves, ov["curves"], "--runs", "curves.runs", "metrics.csv files or run directories");
  flag(curves, ov["curves"], "--out", "curves.out", "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (collect->parsed())
      return cmd_collect(resolve(ov["collect"], with_env({"collect.n", "collect.seed", "collect.out"})));
    if (repr_cmd->parsed())
      return cmd_train_repr(resolve(ov["train-repr"], {"repr.buffer", "repr.m", "repr.gamma", "repr.oversample",
                                                       "repr.validation", "repr.lr", "repr.batch", "repr.epochs",
                                                       "repr.patience", "repr.seed", "repr.tied", "repr.out",
                                                       "repr.env"}));
    if (agent->parsed()) return cmd_train_agent(resolve(ov["train-agent"], experiment_keys()));
    if (eval->parsed()) {
      auto keys = with_env({"eval.episodes"});
      keys.insert(kPolicyKeys.begin(), kPolicyKeys.end());
      return cmd_evaluate(resolve(ov["evaluate"], keys));
    }
    if (traj->parsed()) {
      auto keys = with_env({"trajmap.episodes", "trajmap.out"});
      keys.insert(kPolicyKeys.begin(), kPolicyKeys.end());
      return cmd_trajmap(resolve(ov["trajmap"], keys));
    }
    if (heat->parsed())
      return cmd_heatmap(resolve(ov["heatmap"], with_env({"heatmap.model", "heatmap.out", "heatmap.pgm"})));
    if (curves->parsed()) return cmd_curves(resolve(ov["curves"], {"curves.runs", "curves.out"}));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
