#include "rprl/agents/actor_critic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "rprl/errors.hpp"
#include "rprl/reprlearn/model.hpp"

namespace rprl::agents {

using nn::LayerSpec;
using nn::Tensor;

std::vector<LayerSpec> policy_layers() {
  return {LayerSpec::dense(64), LayerSpec::relu(), LayerSpec::dense(64), LayerSpec::relu(),
          LayerSpec::dense(gw::kNumActions)};
}

std::vector<LayerSpec> value_layers() {
  return {LayerSpec::dense(64), LayerSpec::relu(), LayerSpec::dense(64), LayerSpec::relu(), LayerSpec::dense(1)};
}

namespace {

nn::Network<float> make_head(std::vector<LayerSpec> layers, std::mt19937_64& rng) {
  nn::Network<float> net({kFeatureSize}, std::move(layers));
  net.init_params(rng);
  return net;
}

}  // namespace

ActorCritic make_frozen_actor_critic(const nn::Network<float>& encoder, std::uint64_t seed) {
  if (encoder.output_shape() != nn::Shape{kFeatureSize / 2})
    throw ShapeError("preprocessor must emit " + std::to_string(kFeatureSize / 2) + " features per view");
  std::mt19937_64 rng(seed);
  ActorCritic ac;
  ac.policy = nn::PairNet<float>(encoder, make_head(policy_layers(), rng));
  ac.value = nn::PairNet<float>(encoder, make_head(value_layers(), rng));
  ac.train_encoder = false;
  return ac;
}

ActorCritic make_end_to_end_actor_critic(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ActorCritic ac;
  nn::Network<float> pe = repr::make_encoder(rng);
  nn::Network<float> ve = repr::make_encoder(rng);
  ac.policy = nn::PairNet<float>(std::move(pe), make_head(policy_layers(), rng));
  ac.value = nn::PairNet<float>(std::move(ve), make_head(value_layers(), rng));
  ac.train_encoder = true;
  return ac;
}

std::array<double, gw::kNumActions> softmax(std::span<const float> logits) {
  if (logits.size() != gw::kNumActions) throw ShapeError("policy emits one logit per action");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::array<double, gw::kNumActions> p{};
  double z = 0.0;
  for (int a = 0; a < gw::kNumActions; ++a) {
    p[a] = std::exp(static_cast<double>(logits[a]) - m);
    z += p[a];
  }
  for (double& v : p) v /= z;
  return p;
}

namespace {

double log_softmax_at(std::span<const float> logits, int a) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (float l : logits) z += std::exp(static_cast<double>(l) - m);
  return static_cast<double>(logits[a]) - m - std::log(z);
}

std::string first_non_finite(const ActorCritic& ac) {
  std::string where;
  auto scan = [&where](const char* path, const nn::ParamSet<float>& p) {
    p.for_each([&](const std::string& key, const Tensor& t) {
      if (where.empty() && !t.all_finite()) where = std::string(path) + " " + key;
    });
  };
  scan("policy head", ac.policy.head().params());
  scan("policy encoder", ac.policy.encoder().params());
  return where.empty() ? "policy input features" : where;
}

}  // namespace

ActResult act(const ActorCritic& ac, std::span<const float> policy_in, std::span<const float> value_in,
              std::mt19937_64& rng, bool greedy) {
  Tensor x({1, kFeatureSize}, std::vector<float>(policy_in.begin(), policy_in.end()));
  const Tensor logits = ac.policy.head().forward(x);
  if (!logits.all_finite()) throw NumericError("non-finite policy logits; first non-finite: " + first_non_finite(ac));
  ActResult r;
  r.probs = softmax(logits.data());
  int a = 0;
  if (greedy) {
    a = static_cast<int>(std::max_element(r.probs.begin(), r.probs.end()) - r.probs.begin());
  } else {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    double acc = 0.0;
    a = gw::kNumActions - 1;
    for (int k = 0; k < gw::kNumActions; ++k) {
      acc += r.probs[k];
      if (u < acc) {
        a = k;
        break;
      }
    }
  }
  r.action = static_cast<gw::Action>(a);
  r.log_prob = static_cast<float>(log_softmax_at(logits.data(), a));
  Tensor v({1, kFeatureSize}, std::vector<float>(value_in.begin(), value_in.end()));
  r.value = ac.value.head().forward(v)[0];
  return r;
}

std::span<const float> RolloutBatch::policy_row(std::size_t i) const {
  return std::span<const float>(policy_in).subspan(i * kFeatureSize, kFeatureSize);
}

std::span<const float> RolloutBatch::value_row(std::size_t i) const {
  const auto& src = value_in.empty() ? policy_in : value_in;
  return std::span<const float>(src).subspan(i * kFeatureSize, kFeatureSize);
}

void RolloutBatch::clear() { *this = RolloutBatch{}; }

void compute_gae(RolloutBatch& b, double gamma, double lambda, bool normalize) {
  const std::size_t n = b.size();
  b.advantages.assign(n, 0.0f);
  b.returns.assign(n, 0.0f);
  double gae = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    double next_value;
    bool cut = false;
    if (b.dones[k]) {
      next_value = 0.0;
      cut = true;
    } else if (b.truncated[k]) {
      next_value = b.bootstrap[k];
      cut = true;
    } else {
      next_value = k + 1 < n ? b.values[k + 1] : b.last_value;
    }
    const double delta = b.rewards[k] + gamma * next_value - b.values[k];
    gae = delta + (cut ? 0.0 : gamma * lambda * gae);
    b.advantages[k] = static_cast<float>(gae);
    b.returns[k] = static_cast<float>(gae + b.values[k]);
  }
  if (normalize && n > 1) {
    double mean = 0.0;
    for (float a : b.advantages) mean += a;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (float a : b.advantages) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (float& a : b.advantages) a = static_cast<float>((a - mean) / (sd + 1e-8));
  }
}

Optimizers::Optimizers(float lr)
    : policy_head({nn::OptimizerKind::kAdam, lr}),
      value_head({nn::OptimizerKind::kAdam, lr}),
      policy_encoder({nn::OptimizerKind::kAdam, lr}),
      value_encoder({nn::OptimizerKind::kAdam, lr}) {}

namespace {

// Forward pass of one path over selected batch rows, keeping what backward
// needs. With a trainable encoder every distinct observation is encoded once.
struct PathPass {
  Tensor out;
  nn::ForwardCache<float> head_cache;
  nn::ForwardCache<float> enc_cache;
  std::vector<int> row_obs, row_goal;
  int unique = 0;
};

PathPass path_forward(const nn::PairNet<float>& net, bool train_encoder, const RolloutBatch& b,
                      std::span<const std::size_t> idx, bool value_path) {
  PathPass p;
  const std::size_t n = idx.size();
  Tensor x({static_cast<int>(n), kFeatureSize});
  if (!train_encoder) {
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = value_path ? b.value_row(idx[r]) : b.policy_row(idx[r]);
      std::copy(row.begin(), row.end(), x.raw() + r * kFeatureSize);
    }
  } else {
    std::unordered_map<const gw::Observation*, int> slot;
    std::vector<data::ObsPtr> unique;
    auto intern = [&](const data::ObsPtr& o) {
      auto [it, fresh] = slot.emplace(o.get(), static_cast<int>(unique.size()));
      if (fresh) unique.push_back(o);
      return it->second;
    };
    for (std::size_t r = 0; r < n; ++r) {
      p.row_obs.push_back(intern(b.obs[idx[r]]));
      p.row_goal.push_back(intern(b.goals[idx[r]]));
    }
    p.unique = static_cast<int>(unique.size());
    const Tensor codes = net.encoder().forward(data::stack_observations(unique), &p.enc_cache);
    const int c = kFeatureSize / 2;
    for (std::size_t r = 0; r < n; ++r) {
      std::copy_n(codes.raw() + static_cast<std::size_t>(p.row_obs[r]) * c, c, x.raw() + r * kFeatureSize);
      std::copy_n(codes.raw() + static_cast<std::size_t>(p.row_goal[r]) * c, c, x.raw() + r * kFeatureSize + c);
    }
  }
  p.out = net.head().forward(x, &p.head_cache);
  return p;
}

void path_backward(const nn::PairNet<float>& net, bool train_encoder, const PathPass& p, const Tensor& gout,
                   nn::ParamSet<float>& head_grad, nn::ParamSet<float>& enc_grad) {
  nn::Gradients<float> hg = net.head().backward(p.head_cache, gout, train_encoder);
  head_grad = std::move(hg.params);
  if (!train_encoder) return;
  const int c = kFeatureSize / 2;
  Tensor gcodes({p.unique, c});
  for (std::size_t r = 0; r < p.row_obs.size(); ++r) {
    const float* g = hg.input.raw() + r * kFeatureSize;
    float* a = gcodes.raw() + static_cast<std::size_t>(p.row_obs[r]) * c;
    float* q = gcodes.raw() + static_cast<std::size_t>(p.row_goal[r]) * c;
    for (int k = 0; k < c; ++k) {
      a[k] += g[k];
      q[k] += g[c + k];
    }
  }
  enc_grad = net.encoder().backward(p.enc_cache, gcodes, false).params;
}

struct Objective {
  bool ppo = true;
  double clip = 0.2;
  double ent_coef = 0.01;
  double vf_coef = 0.5;
  double max_grad_norm = 0.5;
};

struct StepTerms {
  double pg = 0.0, vf = 0.0, ent = 0.0, clipped = 0.0, kl = 0.0, grad_norm = 0.0;
};

StepTerms gradient_step(ActorCritic& ac, const RolloutBatch& b, std::span<const std::size_t> idx,
                        const Objective& obj, Optimizers& opt) {
  const std::size_t n = idx.size();
  const double inv = 1.0 / static_cast<double>(n);
  const PathPass pp = path_forward(ac.policy, ac.train_encoder, b, idx, false);
  const PathPass vp = path_forward(ac.value, ac.train_encoder, b, idx, true);

  StepTerms t;
  Tensor glogits(pp.out.shape());
  Tensor gvalue(vp.out.shape());
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t i = idx[r];
    const std::span<const float> logits(pp.out.raw() + r * gw::kNumActions, gw::kNumActions);
    const auto pi = softmax(logits);
    const int a = b.actions[i];
    const double logp = log_softmax_at(logits, a);
    const double adv = b.advantages[i];
    double coef;  // d(policy loss)/d(log pi(a))
    if (obj.ppo) {
      const double ratio = std::exp(logp - b.log_probs[i]);
      const double s1 = ratio * adv;
      const double s2 = std::clamp(ratio, 1.0 - obj.clip, 1.0 + obj.clip) * adv;
      t.pg -= std::min(s1, s2);
      coef = s1 <= s2 ? -adv * ratio : 0.0;
      if (std::abs(ratio - 1.0) > obj.clip) t.clipped += 1.0;
      t.kl += b.log_probs[i] - logp;
    } else {
      t.pg -= adv * logp;
      coef = -adv;
    }
    double h = 0.0;
    for (int k = 0; k < gw::kNumActions; ++k)
      if (pi[k] > 0.0) h -= pi[k] * std::log(pi[k]);
    t.ent += h;
    for (int k = 0; k < gw::kNumActions; ++k) {
      const double lp = pi[k] > 0.0 ? std::log(pi[k]) : 0.0;
      const double g = coef * ((k == a ? 1.0 : 0.0) - pi[k]) + obj.ent_coef * pi[k] * (lp + h);
      glogits[r * gw::kNumActions + k] = static_cast<float>(g * inv);
    }

    const double v = vp.out[r];
    const double ret = b.returns[i];
    double gv;
    if (obj.ppo) {
      const double old = b.values[i];
      const double vc = old + std::clamp(v - old, -obj.clip, obj.clip);
      const double l1 = (v - ret) * (v - ret);
      const double l2 = (vc - ret) * (vc - ret);
      t.vf += 0.5 * std::max(l1, l2);
      gv = l1 >= l2 ? (v - ret) : (std::abs(v - old) < obj.clip ? vc - ret : 0.0);
    } else {
      t.vf += (v - ret) * (v - ret);
      gv = 2.0 * (v - ret);
    }
    gvalue[r] = static_cast<float>(obj.vf_coef * gv * inv);
  }
  t.pg *= inv;
  t.vf *= inv;
  t.ent *= inv;
  t.kl *= inv;
  t.clipped *= inv;
  const double total = t.pg + obj.vf_coef * t.vf - obj.ent_coef * t.ent;
  if (!std::isfinite(total)) {
    throw NumericError("non-finite actor-critic loss (policy " + std::to_string(t.pg) + ", value " +
                       std::to_string(t.vf) + ", entropy " + std::to_string(t.ent) + ")");
  }

  nn::ParamSet<float> g_ph, g_pe, g_vh, g_ve;
  path_backward(ac.policy, ac.train_encoder, pp, glogits, g_ph, g_pe);
  path_backward(ac.value, ac.train_encoder, vp, gvalue, g_vh, g_ve);
  std::vector<nn::ParamSet<float>*> all{&g_ph, &g_vh};
  if (ac.train_encoder) {
    all.push_back(&g_pe);
    all.push_back(&g_ve);
  }
  t.grad_norm = nn::clip_global_norm(all, obj.max_grad_norm);
  opt.policy_head.step(ac.policy.head().params(), g_ph);
  opt.value_head.step(ac.value.head().params(), g_vh);
  if (ac.train_encoder) {
    opt.policy_encoder.step(ac.policy.encoder().params(), g_pe);
    opt.value_encoder.step(ac.value.encoder().params(), g_ve);
  }
  return t;
}

void check_ready(const RolloutBatch& b) {
  if (b.size() == 0) throw UsageError("empty rollout batch");
  if (b.advantages.size() != b.size()) throw UsageError("compute_gae() must run before an update");
}

}  // namespace

UpdateStats ppo_update(ActorCritic& ac, const RolloutBatch& b, const PpoConfig& cfg, Optimizers& opt,
                       std::mt19937_64& rng) {
  check_ready(b);
  if (cfg.epochs < 1 || cfg.minibatch < 1) throw ConfigError("ppo epochs and minibatch must be positive");
  std::vector<std::size_t> order(b.size());
  std::iota(order.begin(), order.end(), 0);

  UpdateStats st;
  const PathPass before = path_forward(ac.policy, ac.train_encoder, b, order, false);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const std::span<const float> logits(before.out.raw() + i * gw::kNumActions, gw::kNumActions);
    const double ratio = std::exp(log_softmax_at(logits, b.actions[i]) - b.log_probs[i]);
    st.initial_ratio_deviation = std::max(st.initial_ratio_deviation, std::abs(ratio - 1.0));
  }

  const Objective obj{true, cfg.clip, cfg.ent_coef, cfg.vf_coef, cfg.max_grad_norm};
  int steps = 0;
  for (int e = 0; e < cfg.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t s = 0; s < order.size(); s += static_cast<std::size_t>(cfg.minibatch)) {
      const std::size_t end = std::min(order.size(), s + static_cast<std::size_t>(cfg.minibatch));
      const StepTerms t = gradient_step(ac, b, std::span(order).subspan(s, end - s), obj, opt);
      st.policy_loss += t.pg;
      st.value_loss += t.vf;
      st.entropy += t.ent;
      st.clip_fraction += t.clipped;
      st.approx_kl += t.kl;
      st.grad_norm += t.grad_norm;
      ++steps;
    }
  }
  const double k = 1.0 / steps;
  st.policy_loss *= k;
  st.value_loss *= k;
  st.entropy *= k;
  st.clip_fraction *= k;
  st.approx_kl *= k;
  st.grad_norm *= k;
  return st;
}

UpdateStats a2c_update(ActorCritic& ac, const RolloutBatch& b, const A2cConfig& cfg, Optimizers& opt) {
  check_ready(b);
  std::vector<std::size_t> all(b.size());
  std::iota(all.begin(), all.end(), 0);
  const Objective obj{false, std::numeric_limits<double>::infinity(), cfg.ent_coef, cfg.vf_coef,
                      cfg.max_grad_norm};
  const StepTerms t = gradient_step(ac, b, all, obj, opt);
  UpdateStats st;
  st.policy_loss = t.pg;
  st.value_loss = t.vf;
  st.entropy = t.ent;
  st.grad_norm = t.grad_norm;
  return st;
}

}  // namespace rprl::agents
