#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <Eigen/Dense>

#include "rprl/agents/trainer.hpp"
#include "rprl/errors.hpp"

using namespace rprl;
using namespace rprl::agents;

namespace {

// Single-state batch: every row has the same features; each step is a
// one-step episode.
RolloutBatch bandit_batch(const ActorCritic& ac, const std::vector<float>& x, int n, std::mt19937_64& rng,
                          const std::array<float, 3>& payoff) {
  RolloutBatch b;
  for (int i = 0; i < n; ++i) {
    const ActResult a = act(ac, x, x, rng);
    b.policy_in.insert(b.policy_in.end(), x.begin(), x.end());
    b.actions.push_back(static_cast<int>(a.action));
    b.log_probs.push_back(a.log_prob);
    b.values.push_back(a.value);
    b.rewards.push_back(payoff[static_cast<int>(a.action)]);
    b.env_rewards.push_back(b.rewards.back());
    b.dones.push_back(1);
    b.truncated.push_back(0);
    b.bootstrap.push_back(0.0f);
  }
  return b;
}

std::vector<float> features(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n;
  std::vector<float> x(kFeatureSize);
  for (auto& v : x) v = n(rng);
  return x;
}

ActorCritic heads_only(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return make_frozen_actor_critic(repr::make_encoder(rng), seed);
}

RolloutBatch hand_batch(std::vector<float> r, std::vector<float> v, std::vector<std::uint8_t> done,
                        std::vector<std::uint8_t> trunc = {}, std::vector<float> boot = {}, float last = 0.0f) {
  RolloutBatch b;
  const std::size_t n = r.size();
  b.rewards = r;
  b.env_rewards = r;
  b.values = v;
  b.dones = done;
  b.truncated = trunc.empty() ? std::vector<std::uint8_t>(n, 0) : trunc;
  b.bootstrap = boot.empty() ? std::vector<float>(n, 0.0f) : boot;
  b.actions.assign(n, 0);
  b.log_probs.assign(n, 0.0f);
  b.policy_in.assign(n * kFeatureSize, 0.0f);
  b.last_value = last;
  return b;
}

}  // namespace

TEST_CASE("network shapes") {
  const ActorCritic ac = heads_only(1);
  CHECK(ac.policy.head().num_parameters() == 6467);
  CHECK(ac.policy.head().output_shape() == nn::Shape{3});
  CHECK(ac.value.head().num_parameters() == 6337);
  CHECK(ac.value.head().output_shape() == nn::Shape{1});
  CHECK(ac.policy_path_parameters() == 1664 + 6467);
  CHECK_FALSE(ac.train_encoder);
  CHECK(make_end_to_end_actor_critic(1).train_encoder);
}

TEST_CASE("softmax") {
  const std::vector<float> flat{0.3f, 0.3f, 0.3f};
  for (double p : softmax(flat)) CHECK(p == doctest::Approx(1.0 / 3.0));
  const std::vector<float> peaked{10.0f, 0.0f, 0.0f};
  CHECK(softmax(peaked)[0] > 0.999);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(-500.0f, 500.0f);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<float> l{u(rng), u(rng), u(rng)};
    const auto p = softmax(l);
    CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) < 1e-6);
    for (double q : p) CHECK(q >= 0.0);
  }
}

TEST_CASE("act") {
  const ActorCritic ac = heads_only(2);
  const auto x = features(1);
  std::mt19937_64 a(9), b(9);
  for (int i = 0; i < 50; ++i) {
    const ActResult r1 = act(ac, x, x, a);
    const ActResult r2 = act(ac, x, x, b);
    CHECK(r1.action == r2.action);
    CHECK(r1.log_prob == r2.log_prob);
    CHECK(r1.log_prob == doctest::Approx(std::log(r1.probs[static_cast<int>(r1.action)])).epsilon(1e-5));
  }
  const ActResult g = act(ac, x, x, a, true);
  CHECK(g.probs[static_cast<int>(g.action)] == *std::max_element(g.probs.begin(), g.probs.end()));

  ActorCritic broken = ac;
  broken.policy.head().params().at(2).weight[5] = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_WITH_AS(act(broken, x, x, a), doctest::Contains("policy head layer 2 weight"), NumericError);
}

TEST_CASE("advantage estimation") {
  SUBCASE("single-step episode") {
    auto b = hand_batch({1.0f}, {0.0f}, {1});
    compute_gae(b, 0.99, 0.95, false);
    CHECK(b.advantages[0] == doctest::Approx(1.0));
    CHECK(b.returns[0] == doctest::Approx(1.0));
  }
  SUBCASE("lambda 0 gives the TD error") {
    auto b = hand_batch({0.5f, 0.0f, 0.2f}, {0.1f, 0.4f, 0.3f}, {0, 0, 0}, {}, {}, 0.7f);
    compute_gae(b, 0.9, 0.0, false);
    CHECK(b.advantages[0] == doctest::Approx(0.5 + 0.9 * 0.4 - 0.1));
    CHECK(b.advantages[1] == doctest::Approx(0.0 + 0.9 * 0.3 - 0.4));
    CHECK(b.advantages[2] == doctest::Approx(0.2 + 0.9 * 0.7 - 0.3));
  }
  SUBCASE("three-step hand recursion") {
    auto b = hand_batch({0.0f, 0.0f, 1.0f}, {0.2f, 0.5f, 0.8f}, {0, 0, 1});
    compute_gae(b, 0.99, 0.95, false);
    const double d2 = 1.0 - 0.8;
    const double d1 = 0.99 * 0.8 - 0.5;
    const double d0 = 0.99 * 0.5 - 0.2;
    const double a2 = d2, a1 = d1 + 0.99 * 0.95 * a2, a0 = d0 + 0.99 * 0.95 * a1;
    CHECK(b.advantages[2] == doctest::Approx(a2).epsilon(1e-6));
    CHECK(b.advantages[1] == doctest::Approx(a1).epsilon(1e-6));
    CHECK(b.advantages[0] == doctest::Approx(a0).epsilon(1e-6));
  }
  SUBCASE("returns equal the discounted sum") {
    std::vector<float> r{0.1f, 0.0f, 0.3f, 0.0f, 0.9f};
    auto b = hand_batch(r, std::vector<float>(5, 0.0f), {0, 0, 0, 0, 1});
    compute_gae(b, 0.97, 1.0, false);
    for (std::size_t t = 0; t < r.size(); ++t) {
      double g = 0.0;
      for (std::size_t k = r.size(); k-- > t;) g = r[k] + 0.97 * g;
      CHECK(std::abs(b.returns[t] - g) < 1e-6);
    }
  }
  SUBCASE("terminal cuts, timeout bootstraps") {
    auto b = hand_batch({0.0f, 0.0f, 0.0f}, {0.0f, 0.0f, 0.0f}, {1, 0, 0}, {0, 1, 0}, {0.0f, 2.0f, 0.0f}, 5.0f);
    compute_gae(b, 0.5, 1.0, false);
    CHECK(b.advantages[0] == doctest::Approx(0.0));
    CHECK(b.advantages[1] == doctest::Approx(1.0));
    CHECK(b.advantages[2] == doctest::Approx(2.5));
  }
  SUBCASE("normalisation") {
    auto b = hand_batch({0.0f, 1.0f, 0.3f, 0.0f}, {0.1f, 0.2f, 0.0f, 0.5f}, {1, 1, 1, 1});
    compute_gae(b, 0.99, 0.95, true);
    double m = 0.0, s = 0.0;
    for (float a : b.advantages) m += a;
    m /= 4.0;
    for (float a : b.advantages) s += (a - m) * (a - m);
    CHECK(std::abs(m) < 1e-6);
    CHECK(std::sqrt(s / 4.0) == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("PPO log-prob bookkeeping on a real rollout") {
  std::mt19937_64 rng(4);
  const Learner l = build_variant("DeepRL", {}, 3);
  RolloutWorker w(l, {gw::EnvKind::kTwoRoom, 0}, 5, {});
  RolloutBatch b;
  ActorCritic ac = l.ac;
  Optimizers opt(2.5e-4f);
  for (int u = 0; u < 3; ++u) {
    w.collect(ac, 128, b, rng);
    compute_gae(b, 0.99, 0.95, true);
    const UpdateStats st = ppo_update(ac, b, PpoConfig{}, opt, rng);
    CHECK(st.initial_ratio_deviation < 1e-5);
    CHECK(std::isfinite(st.policy_loss));
    CHECK(st.clip_fraction >= 0.0);
  }
}

TEST_CASE("zero advantages leave the policy unchanged") {
  ActorCritic ac = heads_only(5);
  std::mt19937_64 rng(1);
  auto b = bandit_batch(ac, features(2), 32, rng, {0.0f, 0.0f, 0.0f});
  compute_gae(b, 0.99, 0.95, false);
  std::fill(b.advantages.begin(), b.advantages.end(), 0.0f);
  PpoConfig cfg;
  cfg.ent_coef = 0.0;
  Optimizers opt(cfg.lr);
  const auto before = ac.policy.head().params();
  ppo_update(ac, b, cfg, opt, rng);
  CHECK(ac.policy.head().params() == before);

  A2cConfig a2;
  a2.ent_coef = 0.0;
  Optimizers opt2(a2.lr);
  a2c_update(ac, b, a2, opt2);
  CHECK(ac.policy.head().params() == before);

  // with the entropy bonus only a small drift remains
  cfg.ent_coef = 0.01;
  ppo_update(ac, b, cfg, opt, rng);
  auto diff = ac.policy.head().params();
  diff.add_scaled(before, -1.0f);
  CHECK(diff.squared_norm() > 0.0);
  CHECK(std::sqrt(diff.squared_norm()) < 0.1);
}

TEST_CASE("unclipped single-epoch PPO equals the actor-critic gradient step") {
  ActorCritic a = heads_only(6);
  ActorCritic b = a;
  std::mt19937_64 rng(2);
  auto batch = bandit_batch(a, features(3), 16, rng, {1.0f, 0.0f, 0.2f});
  compute_gae(batch, 0.99, 1.0, false);
  PpoConfig p;
  p.clip = std::numeric_limits<double>::infinity();
  p.epochs = 1;
  p.minibatch = 16;
  p.lr = 7e-4f;
  p.vf_coef = 0.5;  // 0.5 * (v - R)^2 * 0.5 has the same gradient as 0.25 * (v - R)^2
  A2cConfig c;
  Optimizers oa(p.lr), ob(c.lr);
  ppo_update(a, batch, p, oa, rng);
  a2c_update(b, batch, c, ob);
  auto diff = a.policy.head().params();
  diff.add_scaled(b.policy.head().params(), -1.0f);
  CHECK(std::sqrt(diff.squared_norm()) < 1e-6);
  auto vdiff = a.value.head().params();
  vdiff.add_scaled(b.value.head().params(), -1.0f);
  CHECK(std::sqrt(vdiff.squared_norm()) < 1e-6);
}

TEST_CASE("PPO on a fixed batch raises the advantaged action until clipping engages") {
  ActorCritic ac = heads_only(7);
  const auto x = features(4);
  RolloutBatch b;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 8; ++i) {
    const ActResult r = act(ac, x, x, rng);
    b.policy_in.insert(b.policy_in.end(), x.begin(), x.end());
    b.actions.push_back(0);
    b.log_probs.push_back(static_cast<float>(std::log(r.probs[0])));
    b.values.push_back(r.value);
    b.rewards.push_back(1.0f);
    b.env_rewards.push_back(1.0f);
    b.dones.push_back(1);
    b.truncated.push_back(0);
    b.bootstrap.push_back(0.0f);
  }
  compute_gae(b, 0.99, 0.95, false);
  std::fill(b.advantages.begin(), b.advantages.end(), 1.0f);
  const double p0 = std::exp(b.log_probs[0]);
  PpoConfig cfg;
  cfg.epochs = 1;
  cfg.minibatch = 8;
  cfg.ent_coef = 0.0;
  Optimizers opt(cfg.lr);
  double prev = p0;
  bool clipped = false;
  for (int u = 0; u < 100; ++u) {
    const UpdateStats st = ppo_update(ac, b, cfg, opt, rng);
    const double p = act(ac, x, x, rng).probs[0];
    if (!clipped) CHECK(p >= prev - 1e-7);
    clipped = clipped || st.clip_fraction > 0.0;
    prev = p;
  }
  CHECK(clipped);
  CHECK(prev / p0 > 1.0 + cfg.clip - 1e-3);
}

TEST_CASE("actor-critic solves a two-armed bandit") {
  ActorCritic ac = heads_only(8);
  const auto x = features(5);
  std::mt19937_64 rng(6);
  A2cConfig cfg;
  Optimizers opt(cfg.lr);
  double greedy = 0.0;
  int steps = 0;
  while (steps < 2000) {
    auto b = bandit_batch(ac, x, cfg.n_steps, rng, {1.0f, 0.0f, 0.0f});
    compute_gae(b, cfg.gamma, cfg.lambda, false);
    a2c_update(ac, b, cfg, opt);
    steps += cfg.n_steps;
    greedy = act(ac, x, x, rng).probs[0];
  }
  CHECK(greedy > 0.95);
}

TEST_CASE("value regression on a fixed-return stream") {
  ActorCritic ac = heads_only(9);
  const auto x = features(6);
  std::mt19937_64 rng(7);
  A2cConfig cfg;
  cfg.ent_coef = 0.0;
  Optimizers opt(cfg.lr);
  std::vector<double> mse;
  for (int u = 0; u < 60; ++u) {
    auto b = bandit_batch(ac, x, 20, rng, {0.7f, 0.7f, 0.7f});
    compute_gae(b, cfg.gamma, cfg.lambda, false);
    double e = 0.0;
    for (float v : b.values) e += (v - 0.7) * (v - 0.7);
    mse.push_back(e / 20.0);
    a2c_update(ac, b, cfg, opt);
  }
  CHECK(mse.back() < 0.1 * mse.front());
}

// Deterministic five-state chain with actions left, right, stay and one-hot
// features. Under the uniform policy psi_a = P_a (I - gamma P_pi)^-1 Phi.
TEST_CASE("successor features match the closed form on a chain") {
  constexpr int S = 5, A = 3;
  const double gamma = 0.9;
  auto next_state = [](int s, int a) { return a == 0 ? std::max(0, s - 1) : a == 1 ? std::min(S - 1, s + 1) : s; };
  TdData d;
  d.phi = nn::Tensor({S * A, S});
  d.phi_next = nn::Tensor({S * A, S});
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const int r = s * A + a;
      d.phi[r * S + s] = 1.0f;
      d.phi_next[r * S + next_state(s, a)] = 1.0f;
      d.actions.push_back(a);
      d.done.push_back(0);
    }
  SFConfig cfg;
  cfg.gamma = gamma;
  cfg.psi_optimizer = {nn::OptimizerKind::kSgd, 1.0f};
  cfg.psi_steps = 6000;
  cfg.psi_batch = S * A;
  cfg.target_every = 1;
  const auto psi = fit_successor_features(d, A, cfg);

  Eigen::MatrixXd Pa[A];
  Eigen::MatrixXd Ppi = Eigen::MatrixXd::Zero(S, S);
  for (int a = 0; a < A; ++a) {
    Pa[a] = Eigen::MatrixXd::Zero(S, S);
    for (int s = 0; s < S; ++s) Pa[a](s, next_state(s, a)) = 1.0;
    Ppi += Pa[a] / A;
  }
  const Eigen::MatrixXd M = (Eigen::MatrixXd::Identity(S, S) - gamma * Ppi).inverse();
  double worst = 0.0;
  for (int s = 0; s < S; ++s) {
    nn::Tensor x({1, S});
    x[s] = 1.0f;
    const nn::Tensor out = psi.forward(x);
    for (int a = 0; a < A; ++a) {
      const Eigen::MatrixXd expect = Pa[a] * M;
      for (int k = 0; k < S; ++k) worst = std::max(worst, std::abs(out[a * S + k] - expect(s, k)));
    }
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("successor-feature limit cases") {
  SFConfig cfg;
  cfg.psi_optimizer = {nn::OptimizerKind::kSgd, 0.5f};
  cfg.psi_batch = 1000;
  cfg.target_every = 1;
  TdData d;
  const int n = 12, dim = 2;
  d.phi = nn::Tensor({n, dim});
  d.phi_next = nn::Tensor({n, dim});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-1, 1);
  for (int i = 0; i < n; ++i) {
    d.actions.push_back(i % 3);
    d.done.push_back(0);
  }
  SUBCASE("gamma 0 regresses to the expected next features") {
    // four one-hot states, each (state, action) seen twice with different next features
    const int states = 4, m = states * 3 * 2;
    TdData g;
    g.phi = nn::Tensor({m, states});
    g.phi_next = nn::Tensor({m, states});
    for (int i = 0; i < m; ++i) {
      g.phi[i * states + (i / 6)] = 1.0f;
      for (int k = 0; k < states; ++k) g.phi_next[i * states + k] = u(rng);
      g.actions.push_back(i % 3);
      g.done.push_back(0);
    }
    cfg.gamma = 0.0;
    cfg.psi_steps = 3000;
    const auto psi = fit_successor_features(g, 3, cfg);
    for (int i = 0; i < m; i += 6)
      for (int a = 0; a < 3; ++a) {
        nn::Tensor x({1, states});
        x[i / 6] = 1.0f;
        const auto out = psi.forward(x);
        for (int k = 0; k < states; ++k) {
          const double mean = 0.5 * (g.phi_next[(i + a) * states + k] + g.phi_next[(i + a + 3) * states + k]);
          CHECK(out[a * states + k] == doctest::Approx(mean).epsilon(1e-3));
        }
      }
  }
  SUBCASE("constant features sum to c / (1 - gamma)") {
    for (int i = 0; i < n * dim; ++i) d.phi[i] = d.phi_next[i] = 0.5f;
    cfg.gamma = 0.8;
    cfg.psi_steps = 4000;
    const auto psi = fit_successor_features(d, 3, cfg);
    const nn::Tensor out = psi.forward(nn::Tensor({1, dim}, std::vector<float>{0.5f, 0.5f}));
    for (float v : out.data()) CHECK(v == doctest::Approx(2.5).epsilon(1e-3));
  }
  SUBCASE("empty data") { CHECK_THROWS_AS(fit_successor_features(TdData{}, 3, cfg), ConfigError); }
}

TEST_CASE("SF pretraining and folded preprocessor") {
  const auto buf = data::collect_random({gw::EnvKind::kTwoRoom, gw::kRandomTrainingGoal}, 400, 3);
  SFConfig cfg;
  cfg.reward_epochs = 2;
  cfg.psi_steps = 200;
  cfg.target_every = 50;
  const SFModel m = sf_pretrain(buf, cfg);
  CHECK(m.encoder.output_shape() == nn::Shape{16});
  CHECK(m.psi.output_shape() == nn::Shape{48});
  const auto phi = m.phi(*buf[10].obs);
  CHECK(phi.size() == 16);
  CHECK(m.q_values(phi).size() == 3);

  const nn::Network<float> folded = m.folded_encoder();
  CHECK(folded.num_parameters() == m.encoder.num_parameters());
  nn::Tensor x = *buf[10].obs;
  x.reshape({1, 28, 28, 3});
  const auto direct = m.mean_successor(phi);
  const auto via = folded.forward(x);
  for (int k = 0; k < 16; ++k) CHECK(via[k] == doctest::Approx(direct[k]).epsilon(1e-4));

  SFModel deep = m;
  std::mt19937_64 rng(1);
  deep.psi = make_psi(16, 3, 8, rng);
  CHECK_THROWS_AS(deep.folded_encoder(), ConfigError);
  CHECK_THROWS_AS(sf_pretrain({}, cfg), ConfigError);
}

TEST_CASE("variants") {
  const repr::ReprModel raw(1), smooth(2);
  SFModel sf;
  std::mt19937_64 rng(3);
  sf.encoder = repr::make_encoder(rng);
  sf.reward = nn::Network<float>({16}, {nn::LayerSpec::dense(1)});
  sf.psi = make_psi(16, 3, 0, rng);
  const VariantResources res{&raw, &smooth, &sf};

  std::set<std::size_t> policy_counts, value_counts;
  for (const auto& v : variant_catalog()) {
    const Learner l = build_variant(v.name, res, 4);
    policy_counts.insert(l.ac.policy_path_parameters());
    value_counts.insert(l.ac.value_path_parameters());
    CHECK(l.ac.train_encoder == (v.name == "DeepRL"));
    CHECK((l.shaping_model != nullptr) == v.shaping);
  }
  CHECK(variant_catalog().size() == 6);
  CHECK(policy_counts.size() == 1);
  CHECK(value_counts.size() == 1);
  CHECK(build_variant("Ours-64r", res, 0).ac.policy.encoder().params() == smooth.encoder().params());
  CHECK_THROWS_AS(build_variant("Ours-2r", res, 0), ConfigError);
  CHECK_THROWS_WITH_AS(build_variant("Ours-64r", {&raw, nullptr, nullptr}, 0), doctest::Contains("M = 64"),
                       ConfigError);
  CHECK_THROWS_AS(build_variant("SF", {&raw, &smooth, nullptr}, 0), ConfigError);
  const repr::ReprModel untied(5, false);
  CHECK_THROWS_AS(build_variant("Ours-1r", {&untied, nullptr, nullptr}, 0), ConfigError);
}

TEST_CASE("frozen encoders stay frozen, end-to-end encoders learn") {
  const repr::ReprModel raw(1);
  AgentConfig cfg;
  cfg.env = {gw::EnvKind::kTwoRoom, 0};
  cfg.total_steps = 512;
  Learner ours = build_variant("Ours-1r", {&raw, nullptr, nullptr}, 1);
  const auto head0 = ours.ac.policy.head().params();
  train_agent(ours, cfg);
  CHECK(ours.encoder_unchanged());
  CHECK(ours.ac.policy.encoder().params() == raw.encoder().params());
  CHECK_FALSE(ours.ac.policy.head().params() == head0);

  Learner deep = build_variant("DeepRL", {}, 1);
  train_agent(deep, cfg);
  CHECK_FALSE(deep.encoder_unchanged());
}

TEST_CASE("shaping changes rewards but not transitions") {
  const repr::ReprModel raw(1);
  const VariantResources res{&raw, nullptr, nullptr};
  const Learner plain = build_variant("Ours-1r", res, 2);
  const Learner shaped = build_variant("Ours+Shaping-1r", res, 2);
  REQUIRE(plain.ac.policy.head().params() == shaped.ac.policy.head().params());

  shaping::ShapingConfig sc;
  sc.H = 1;  // only the first episode is shaped
  RolloutWorker wa(plain, {gw::EnvKind::kTwoRoom, 0}, 11, sc);
  RolloutWorker wb(shaped, {gw::EnvKind::kTwoRoom, 0}, 11, sc);
  std::mt19937_64 ra(5), rb(5);
  RolloutBatch ba, bb;
  wa.collect(plain.ac, 300, ba, ra);
  wb.collect(shaped.ac, 300, bb, rb);
  REQUIRE(wb.episodes() >= 2);
  CHECK(ba.actions == bb.actions);
  CHECK(ba.env_rewards == bb.env_rewards);
  CHECK(ba.env_rewards == bb.env_rewards);
  for (std::size_t i = 0; i < wa.truths().size(); ++i) {
    CHECK(wa.truths()[i].agent == wb.truths()[i].agent);
    CHECK(wa.truths()[i].end == wb.truths()[i].end);
  }
  CHECK(ba.rewards == ba.env_rewards);
  // the first episode carries bonuses; after it (I >= H) rewards match exactly
  std::size_t first_end = 0;
  while (!(bb.dones[first_end] || bb.truncated[first_end])) ++first_end;
  bool any_bonus = false;
  for (std::size_t i = 0; i <= first_end; ++i) any_bonus = any_bonus || bb.rewards[i] != bb.env_rewards[i];
  CHECK(any_bonus);
  for (std::size_t i = first_end + 1; i < bb.size(); ++i) CHECK(bb.rewards[i] == ba.rewards[i]);
}

TEST_CASE("training loop") {
  const repr::ReprModel raw(1);
  AgentConfig cfg;
  cfg.env = {gw::EnvKind::kLavaGap, gw::kRandomLayout};
  cfg.total_steps = 300;
  cfg.eval_interval = 100;
  std::vector<std::uint64_t> at;
  Learner l = build_variant("Ours-1r", {&raw, nullptr, nullptr}, 1);
  const TrainProgress p = train_agent(l, cfg, [&](const TrainProgress& tp, const ActorCritic&) { at.push_back(tp.step); });
  CHECK(at == std::vector<std::uint64_t>{0, 100, 200, 300});
  CHECK(p.step == 300);

  cfg.algorithm = Algorithm::kA2c;
  Learner a = build_variant("Ours-1r", {&raw, nullptr, nullptr}, 1);
  CHECK(train_agent(a, cfg).step == 300);

  CHECK(parse_algorithm("a2c") == Algorithm::kA2c);
  CHECK_THROWS_AS(parse_algorithm("acktr"), ConfigError);
  CHECK(default_shaping_horizon(500000) == 2500);
  cfg.total_steps = 0;
  CHECK_THROWS_AS(train_agent(a, cfg), ConfigError);
}
