#include "rprl/agents/successor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "rprl/dataset/smoothing.hpp"
#include "rprl/errors.hpp"
#include "rprl/gridworld/render.hpp"
#include "rprl/reprlearn/model.hpp"

namespace rprl::agents {

using nn::LayerSpec;
using nn::Tensor;

nn::Network<float> make_psi(int d, int num_actions, int hidden, std::mt19937_64& rng) {
  std::vector<LayerSpec> layers;
  if (hidden > 0) {
    layers = {LayerSpec::dense(hidden), LayerSpec::relu(), LayerSpec::dense(hidden), LayerSpec::relu()};
  }
  layers.push_back(LayerSpec::dense(num_actions * d));
  nn::Network<float> psi({d}, std::move(layers));
  psi.init_params(rng);
  return psi;
}

namespace {

Tensor gather_rows(const Tensor& src, std::span<const std::size_t> idx) {
  const int d = src.dim(1);
  Tensor out({static_cast<int>(idx.size()), d});
  for (std::size_t r = 0; r < idx.size(); ++r)
    std::copy_n(src.raw() + idx[r] * static_cast<std::size_t>(d), d, out.raw() + r * static_cast<std::size_t>(d));
  return out;
}

}  // namespace

nn::Network<float> fit_successor_features(const TdData& data, int num_actions, const SFConfig& config) {
  const std::size_t n = data.size();
  if (n == 0) throw ConfigError("successor-feature fit needs transitions");
  if (config.psi_steps < 1 || config.psi_batch < 1 || config.target_every < 1)
    throw ConfigError("psi_steps, psi_batch and target_every must be positive");
  const int d = data.phi.dim(1);
  std::mt19937_64 rng(config.seed);
  nn::Network<float> psi = make_psi(d, num_actions, config.psi_hidden, rng);
  nn::Network<float> target = psi;
  nn::Optimizer opt(config.psi_optimizer);

  const bool full = static_cast<std::size_t>(config.psi_batch) >= n;
  std::vector<std::size_t> idx(full ? n : static_cast<std::size_t>(config.psi_batch));
  std::iota(idx.begin(), idx.end(), 0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  const auto w = static_cast<std::size_t>(d);
  const auto wa = static_cast<std::size_t>(num_actions) * w;

  for (int step = 0; step < config.psi_steps; ++step) {
    if (step % config.target_every == 0) target = psi;
    if (!full)
      for (auto& i : idx) i = pick(rng);
    const std::size_t b = idx.size();
    const Tensor next = gather_rows(data.phi_next, idx);
    const Tensor tn = target.forward(next);
    nn::ForwardCache<float> cache;
    const Tensor out = psi.forward(gather_rows(data.phi, idx), &cache);
    Tensor g(out.shape());
    for (std::size_t r = 0; r < b; ++r) {
      const std::size_t i = idx[r];
      const double cont = data.done[i] ? 0.0 : config.gamma;
      const auto a = static_cast<std::size_t>(data.actions[i]);
      for (std::size_t k = 0; k < w; ++k) {
        double mean = 0.0;
        for (std::size_t a2 = 0; a2 < static_cast<std::size_t>(num_actions); ++a2) mean += tn[r * wa + a2 * w + k];
        mean /= num_actions;
        const double y = next[r * w + k] + cont * mean;
        g[r * wa + a * w + k] = static_cast<float>((out[r * wa + a * w + k] - y) / static_cast<double>(b));
      }
    }
    opt.step(psi.params(), psi.backward(cache, g, false).params);
  }
  return psi;
}

std::vector<float> SFModel::phi(const Tensor& obs) const {
  Tensor x = obs;
  x.reshape(nn::batched(1, obs.shape()));
  const Tensor out = encoder.forward(x);
  return {out.data().begin(), out.data().end()};
}

std::vector<float> SFModel::successor(std::span<const float> f) const {
  const Tensor out = psi.forward(Tensor({1, static_cast<int>(f.size())}, std::vector<float>(f.begin(), f.end())));
  return {out.data().begin(), out.data().end()};
}

std::vector<float> SFModel::mean_successor(std::span<const float> f) const {
  const auto all = successor(f);
  const std::size_t d = f.size();
  const std::size_t na = all.size() / d;
  std::vector<float> m(d, 0.0f);
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t k = 0; k < d; ++k) m[k] += all[a * d + k] / static_cast<float>(na);
  return m;
}

std::vector<float> SFModel::q_values(std::span<const float> f) const {
  const auto all = successor(f);
  const auto& wl = reward.params().at(0);
  const std::size_t d = f.size();
  std::vector<float> q(all.size() / d, 0.0f);
  for (std::size_t a = 0; a < q.size(); ++a) {
    // the regression bias is paid on every future step
    double v = wl.bias[0] / (1.0 - gamma);
    for (std::size_t k = 0; k < d; ++k) v += wl.weight[k] * all[a * d + k];
    q[a] = static_cast<float>(v);
  }
  return q;
}

nn::Network<float> SFModel::folded_encoder() const {
  if (psi.layers().size() != 1) throw ConfigError("the SF preprocessor needs a linear psi (psi_hidden = 0)");
  const std::size_t last = encoder.layers().size() - 1;
  const auto& enc = encoder.params().at(last);  // W [d, in], b [d]
  const auto& ps = psi.params().at(0);          // A [na*d, d], c [na*d]
  const int d = enc.weight.dim(0);
  const int in = enc.weight.dim(1);
  const int na = ps.weight.dim(0) / d;
  Tensor abar({d, d});
  Tensor cbar({d});
  for (int a = 0; a < na; ++a)
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) abar[i * d + j] += ps.weight[(a * d + i) * d + j] / static_cast<float>(na);
      cbar[i] += ps.bias[a * d + i] / static_cast<float>(na);
    }
  nn::LayerParams<float> folded{Tensor({d, in}), Tensor({d})};
  for (int i = 0; i < d; ++i) {
    double bias = cbar[i];
    for (int k = 0; k < d; ++k) bias += static_cast<double>(abar[i * d + k]) * enc.bias[k];
    folded.bias[i] = static_cast<float>(bias);
    for (int j = 0; j < in; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) s += static_cast<double>(abar[i * d + k]) * enc.weight[k * in + j];
      folded.weight[i * in + j] = static_cast<float>(s);
    }
  }
  nn::Network<float> out = encoder;
  out.params().set(last, std::move(folded));
  return out;
}

SFModel sf_pretrain(const data::Buffer& buffer, const SFConfig& config) {
  if (buffer.empty()) throw ConfigError("successor-feature pretraining needs a non-empty buffer");
  if (config.reward_batch < 1 || config.reward_epochs < 1) throw ConfigError("reward batch and epochs must be positive");
  std::mt19937_64 rng(config.seed);

  // phase 1: encoder and w jointly on r(s') regression
  const data::SmoothedDataset balanced =
      data::oversample_positives(data::smooth_rewards(buffer, config.gamma, 1), config.oversample, config.seed + 1);
  std::vector<LayerSpec> layers = repr::encoder_layers();
  const std::size_t enc_layers = layers.size();
  layers.push_back(LayerSpec::dense(1));
  nn::Network<float> joint({gw::kObsSide, gw::kObsSide, 3}, layers);
  joint.init_params(rng);
  nn::Optimizer opt({nn::OptimizerKind::kAdam, config.reward_lr});
  std::vector<std::size_t> order(balanced.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<data::ObsPtr> rows;
  for (int e = 0; e < config.reward_epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t s = 0; s < order.size(); s += static_cast<std::size_t>(config.reward_batch)) {
      const std::size_t end = std::min(order.size(), s + static_cast<std::size_t>(config.reward_batch));
      rows.clear();
      for (std::size_t i = s; i < end; ++i) rows.push_back(balanced.transitions[order[i]].next_obs);
      nn::ForwardCache<float> cache;
      const Tensor y = joint.forward(data::stack_observations(rows), &cache);
      Tensor g(y.shape());
      double loss = 0.0;
      for (std::size_t i = s; i < end; ++i) {
        const double diff = static_cast<double>(y[i - s]) - balanced.r_star[order[i]];
        loss += diff * diff;
        g[i - s] = static_cast<float>(2.0 * diff / static_cast<double>(end - s));
      }
      if (!std::isfinite(loss)) throw NumericError("non-finite SF reward loss at epoch " + std::to_string(e));
      opt.step(joint.params(), joint.backward(cache, g, false).params);
    }
  }

  SFModel m;
  m.gamma = config.gamma;
  m.encoder = nn::Network<float>({gw::kObsSide, gw::kObsSide, 3}, repr::encoder_layers());
  for (std::size_t l = 0; l < enc_layers; ++l)
    if (joint.params().contains(l)) m.encoder.params().set(l, joint.params().at(l));
  m.reward = nn::Network<float>({repr::kCodeSize}, {LayerSpec::dense(1)});
  m.reward.params().set(0, joint.params().at(enc_layers));

  // phase 2: psi on frozen phi over the raw buffer
  std::unordered_map<const gw::Observation*, std::size_t> slot;
  std::vector<data::ObsPtr> unique;
  auto intern = [&](const data::ObsPtr& o) {
    auto [it, fresh] = slot.emplace(o.get(), unique.size());
    if (fresh) unique.push_back(o);
    return it->second;
  };
  std::vector<std::size_t> from, to;
  for (const auto& t : buffer) {
    from.push_back(intern(t.obs));
    to.push_back(intern(t.next_obs));
  }
  Tensor phi_all({static_cast<int>(unique.size()), repr::kCodeSize});
  constexpr std::size_t kChunk = 512;
  for (std::size_t s = 0; s < unique.size(); s += kChunk) {
    const std::size_t end = std::min(unique.size(), s + kChunk);
    const Tensor codes = m.encoder.forward(data::stack_observations(std::span(unique).subspan(s, end - s)));
    std::copy(codes.data().begin(), codes.data().end(), phi_all.raw() + s * repr::kCodeSize);
  }
  TdData td;
  td.phi = gather_rows(phi_all, from);
  td.phi_next = gather_rows(phi_all, to);
  for (const auto& t : buffer) {
    td.actions.push_back(static_cast<int>(t.action));
    // a timeout is not a terminal state
    const bool timeout = t.t + 1 >= gw::kMaxSteps && t.reward <= 0.0f;
    td.done.push_back(t.done && !timeout ? 1 : 0);
  }
  SFConfig psi_cfg = config;
  psi_cfg.seed = config.seed + 3;
  m.psi = fit_successor_features(td, gw::kNumActions, psi_cfg);
  return m;
}

}  // namespace rprl::agents
