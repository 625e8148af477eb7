#include "rprl/agents/variants.hpp"

#include "rprl/errors.hpp"

namespace rprl::agents {

const std::vector<VariantInfo>& variant_catalog() {
  static const std::vector<VariantInfo> all = {
      {"DeepRL", Preprocessing::kEndToEnd, 0, false},
      {"SF", Preprocessing::kSuccessorFeatures, 0, false},
      {"Ours-1r", Preprocessing::kRewardPrediction, 1, false},
      {"Ours+Shaping-1r", Preprocessing::kRewardPrediction, 1, true},
      {"Ours-64r", Preprocessing::kRewardPrediction, 64, false},
      {"Ours+Shaping-64r", Preprocessing::kRewardPrediction, 64, true},
  };
  return all;
}

const VariantInfo& variant_info(std::string_view name) {
  for (const auto& v : variant_catalog())
    if (v.name == name) return v;
  std::string known;
  for (const auto& v : variant_catalog()) known += (known.empty() ? "" : ", ") + v.name;
  throw ConfigError("unknown variant '" + std::string(name) + "' (" + known + ")");
}

Learner build_variant(std::string_view name, const VariantResources& res, std::uint64_t seed) {
  Learner l;
  l.info = variant_info(name);
  switch (l.info.preprocessing) {
    case Preprocessing::kEndToEnd:
      l.ac = make_end_to_end_actor_critic(seed);
      break;
    case Preprocessing::kSuccessorFeatures:
      if (res.sf == nullptr) throw ConfigError(l.info.name + " needs a pretrained successor-feature model");
      l.ac = make_frozen_actor_critic(res.sf->folded_encoder(), seed);
      break;
    case Preprocessing::kRewardPrediction: {
      const repr::ReprModel* m = l.info.horizon == 1 ? res.raw_model : res.smoothed_model;
      if (m == nullptr)
        throw ConfigError(l.info.name + " needs a representation model trained with M = " +
                          std::to_string(l.info.horizon));
      if (!m->tied()) throw ConfigError(l.info.name + " needs a model with one shared encoder");
      l.ac = make_frozen_actor_critic(m->encoder(), seed);
      if (l.info.shaping) l.shaping_model = m;
      break;
    }
  }
  l.encoder_fingerprint = l.ac.policy.encoder().params().fingerprint();
  return l;
}

}  // namespace rprl::agents
