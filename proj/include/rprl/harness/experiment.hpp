#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "rprl/agents/trainer.hpp"
#include "rprl/harness/config.hpp"
#include "rprl/harness/curves.hpp"

namespace rprl::harness {

std::string code_version();

struct ExperimentConfig {
  gw::EnvSpec env;
  std::string variant = "Ours-1r";
  agents::Algorithm algorithm = agents::Algorithm::kPpo;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::uint64_t total_steps = 150000;
  std::uint64_t eval_interval = 5000;
  int eval_rollouts = 10;
  bool greedy_eval = false;
  int shaping_horizon = 0;  // 0 selects the default for total_steps
  shaping::Mode shaping_mode = shaping::Mode::kPredictorPotential;
  std::string name;  // defaults to <variant>-<env>
  std::filesystem::path runs_dir = "runs";
  std::filesystem::path model_raw;
  std::filesystem::path model_smooth;
  std::filesystem::path sf_buffer;
  std::uint64_t sf_seed = 0;

  std::string run_name() const;
  std::filesystem::path run_dir(std::uint64_t seed) const { return runs_dir / run_name() / std::to_string(seed); }
};

// env.kind, env.goal, env.layout
const std::set<std::string>& env_keys();
const std::set<std::string>& experiment_keys();

// "bottom-center", "top-left", "top-right", "random-training" or an index.
int parse_two_room_goal(const std::string& text);
std::string two_room_goal_name(int goal);

gw::EnvSpec env_from_config(const Config& c);
void env_to_config(const gw::EnvSpec& env, Config& c);
// Reads experiment keys; other keys are left for the caller to check.
ExperimentConfig experiment_from_config(const Config& c);
Config experiment_to_config(const ExperimentConfig& e);

// Models and SF state loaded from the configured paths; only the ones the
// variant uses are required.
struct Resources {
  std::optional<repr::ReprModel> raw;
  std::optional<repr::ReprModel> smooth;
  std::optional<agents::SFModel> sf;

  agents::VariantResources view() const;
};
Resources load_resources(const ExperimentConfig& e);
agents::Learner make_learner(const ExperimentConfig& e, const Resources& res, std::uint64_t seed);

// checkpoints/final.weights holds policy encoder, policy head, value
// encoder and value head, in that order.
void save_checkpoint(const std::filesystem::path& file, const agents::ActorCritic& ac);
void load_checkpoint(const std::filesystem::path& file, agents::ActorCritic& ac);

struct RunResult {
  std::filesystem::path dir;
  std::vector<MetricsRow> rows;
};

// Trains one seed and writes <runs_dir>/<name>/<seed>/{manifest.txt,
// metrics.csv, checkpoints/final.weights}. Progress lines go to `log`.
RunResult run_experiment(const ExperimentConfig& e, const Resources& res, std::uint64_t seed,
                         std::ostream* log = nullptr);

}  // namespace rprl::harness
