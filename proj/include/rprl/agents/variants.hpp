#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rprl/agents/actor_critic.hpp"
#include "rprl/agents/successor.hpp"
#include "rprl/reprlearn/model.hpp"

namespace rprl::agents {

enum class Preprocessing { kEndToEnd, kSuccessorFeatures, kRewardPrediction };

struct VariantInfo {
  std::string name;
  Preprocessing preprocessing = Preprocessing::kEndToEnd;
  int horizon = 0;  // smoothing horizon of the reward model, 0 if none
  bool shaping = false;
};

// DeepRL, SF, Ours-1r, Ours+Shaping-1r, Ours-64r, Ours+Shaping-64r.
const std::vector<VariantInfo>& variant_catalog();
// Throws ConfigError on an unknown name.
const VariantInfo& variant_info(std::string_view name);

struct VariantResources {
  const repr::ReprModel* raw_model = nullptr;       // trained with M = 1
  const repr::ReprModel* smoothed_model = nullptr;  // trained with M = 64
  const SFModel* sf = nullptr;
};

struct Learner {
  VariantInfo info;
  ActorCritic ac;
  const repr::ReprModel* shaping_model = nullptr;
  std::uint64_t encoder_fingerprint = 0;  // policy encoder at build time

  bool encoder_unchanged() const { return ac.policy.encoder().params().fingerprint() == encoder_fingerprint; }
};

// Throws ConfigError when the variant needs a resource that is missing.
Learner build_variant(std::string_view name, const VariantResources& resources, std::uint64_t seed);

}  // namespace rprl::agents
