#include "rprl/reprlearn/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "rprl/errors.hpp"
#include "rprl/nncore/weights_io.hpp"

namespace rprl::repr {

using nn::LayerSpec;
using nn::Tensor;

std::vector<LayerSpec> encoder_layers() {
  return {LayerSpec::conv2d(8, 3, 3), LayerSpec::relu(),    LayerSpec::max_pool2d(2, 2),
          LayerSpec::conv2d(16, 3, 2), LayerSpec::relu(),   LayerSpec::flatten(),
          LayerSpec::dense(kCodeSize)};
}

std::vector<LayerSpec> predictor_layers() {
  return {LayerSpec::dense(256), LayerSpec::relu(), LayerSpec::dense(256), LayerSpec::relu(),
          LayerSpec::dense(1), LayerSpec::logistic()};
}

nn::Network<float> make_encoder(std::mt19937_64& rng) {
  nn::Network<float> enc({28, 28, 3}, encoder_layers());
  enc.init_params(rng);
  return enc;
}

ReprModel::ReprModel(std::uint64_t init_seed, bool tied) {
  std::mt19937_64 rng(init_seed);
  nn::Network<float> enc = make_encoder(rng);
  std::optional<nn::Network<float>> second;
  if (!tied) second = make_encoder(rng);
  nn::Network<float> head({2 * kCodeSize}, predictor_layers());
  head.init_params(rng);
  net_ = nn::PairNet<float>(std::move(enc), std::move(head), std::move(second));
  train_config.seed = init_seed;
}

Tensor ReprModel::encode_batch(const Tensor& obs) const { return net_.encoder().forward(obs); }

std::vector<float> ReprModel::encode(const gw::Observation& obs) const {
  Tensor batch = obs;
  batch.reshape(nn::batched(1, obs.shape()));
  const Tensor code = encode_batch(batch);
  return {code.data().begin(), code.data().end()};
}

Tensor ReprModel::features(const Tensor& obs, const Tensor& goal) const { return net_.features(obs, goal); }

Tensor ReprModel::predict_batch(const Tensor& obs, const Tensor& goal) const { return net_.forward(obs, goal); }

float ReprModel::predict_reward(const gw::Observation& obs, const gw::Observation& goal) const {
  Tensor a = obs, b = goal;
  a.reshape(nn::batched(1, obs.shape()));
  b.reshape(nn::batched(1, goal.shape()));
  return predict_batch(a, b)[0];
}

namespace {

// Distinct observations of a batch and, per row, the index of its entry.
struct Unique {
  std::vector<data::ObsPtr> items;
  std::vector<int> index;
};

void add_unique(Unique& u, std::unordered_map<const gw::Observation*, int>& seen,
                std::span<const data::ObsPtr> rows) {
  for (const auto& o : rows) {
    auto [it, fresh] = seen.try_emplace(o.get(), static_cast<int>(u.items.size()));
    if (fresh) u.items.push_back(o);
    u.index.push_back(it->second);
  }
}

struct Encoded {
  Unique first, second;  // when tied, `first` holds both halves and second is unused
  Tensor codes_first, codes_second;
  nn::ForwardCache<float> cache_first, cache_second;
  Tensor features;
};

Encoded encode_rows(const ReprModel& model, std::span<const data::ObsPtr> next,
                    std::span<const data::ObsPtr> goals, bool keep_cache) {
  if (next.size() != goals.size() || next.empty()) throw ShapeError("reward-loss batch sizes do not match");
  Encoded e;
  std::unordered_map<const gw::Observation*, int> seen;
  add_unique(e.first, seen, next);
  if (model.tied()) {
    add_unique(e.first, seen, goals);
  } else {
    std::unordered_map<const gw::Observation*, int> seen_goal;
    add_unique(e.second, seen_goal, goals);
  }
  e.codes_first = model.encoder().forward(data::stack_observations(e.first.items),
                                          keep_cache ? &e.cache_first : nullptr);
  if (!model.tied())
    e.codes_second = model.goal_encoder().forward(data::stack_observations(e.second.items),
                                                  keep_cache ? &e.cache_second : nullptr);
  const std::size_t n = next.size();
  const int c = kCodeSize;
  e.features = Tensor({static_cast<int>(n), 2 * c});
  for (std::size_t r = 0; r < n; ++r) {
    const float* a = e.codes_first.raw() + static_cast<std::size_t>(e.first.index[r]) * c;
    const float* b = model.tied() ? e.codes_first.raw() + static_cast<std::size_t>(e.first.index[n + r]) * c
                                  : e.codes_second.raw() + static_cast<std::size_t>(e.second.index[r]) * c;
    float* dst = e.features.raw() + r * 2 * c;
    std::copy(a, a + c, dst);
    std::copy(b, b + c, dst + c);
  }
  return e;
}

std::vector<float> predict_rows(const ReprModel& model, std::span<const data::ObsPtr> next,
                                std::span<const data::ObsPtr> goals) {
  Encoded e = encode_rows(model, next, goals, false);
  const Tensor y = model.net().head().forward(e.features);
  return {y.data().begin(), y.data().end()};
}

}  // namespace

LossAndGrad reward_loss_and_gradients(const ReprModel& model, std::span<const data::ObsPtr> next,
                                   std::span<const data::ObsPtr> goals, std::span<const float> targets) {
  if (targets.size() != next.size()) throw ShapeError("reward-loss target count does not match the batch");
  Encoded e = encode_rows(model, next, goals, true);
  const auto& head = model.net().head();
  nn::ForwardCache<float> head_cache;
  const Tensor y = head.forward(e.features, &head_cache);
  const std::size_t n = next.size();
  LossAndGrad out;
  Tensor gy(y.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(y[i]) - targets[i];
    out.loss += d * d;
    gy[i] = static_cast<float>(2.0 * d / static_cast<double>(n));
  }
  out.loss /= static_cast<double>(n);

  nn::Gradients<float> hg = head.backward(head_cache, gy, true);
  out.grads.head = std::move(hg.params);
  const int c = kCodeSize;
  Tensor g_first(e.codes_first.shape());
  Tensor g_second;
  if (!model.tied()) g_second = Tensor(e.codes_second.shape());
  for (std::size_t r = 0; r < n; ++r) {
    const float* g = hg.input.raw() + r * 2 * c;
    float* a = g_first.raw() + static_cast<std::size_t>(e.first.index[r]) * c;
    float* b = model.tied() ? g_first.raw() + static_cast<std::size_t>(e.first.index[n + r]) * c
                            : g_second.raw() + static_cast<std::size_t>(e.second.index[r]) * c;
    for (int k = 0; k < c; ++k) {
      a[k] += g[k];
      b[k] += g[c + k];
    }
  }
  out.grads.encoder = model.encoder().backward(e.cache_first, g_first, false).params;
  if (!model.tied()) out.grads.second_encoder = model.goal_encoder().backward(e.cache_second, g_second, false).params;
  return out;
}

double reward_loss(const ReprModel& model, const data::SmoothedDataset& d) {
  if (d.size() == 0) return 0.0;
  double sum = 0.0;
  constexpr std::size_t kChunk = 512;
  std::vector<data::ObsPtr> next, goals;
  for (std::size_t start = 0; start < d.size(); start += kChunk) {
    const std::size_t end = std::min(d.size(), start + kChunk);
    next.clear();
    goals.clear();
    for (std::size_t i = start; i < end; ++i) {
      next.push_back(d.transitions[i].next_obs);
      goals.push_back(d.transitions[i].goal_obs);
    }
    const auto y = predict_rows(model, next, goals);
    for (std::size_t i = start; i < end; ++i) {
      const double diff = static_cast<double>(y[i - start]) - d.r_star[i];
      sum += diff * diff;
    }
  }
  return sum / static_cast<double>(d.size());
}

TrainReport train(ReprModel& model, const data::SmoothedDataset& train_set,
                  const data::SmoothedDataset& validation, const TrainConfig& config) {
  if (train_set.size() == 0) throw ConfigError("representation training needs a non-empty dataset");
  if (config.batch < 1 || config.epochs < 1) throw ConfigError("batch and epochs must be positive");
  model.train_config = config;
  nn::OptimizerConfig oc;
  oc.lr = config.lr;
  nn::Optimizer opt_enc(oc), opt_second(oc), opt_head(oc);
  auto& net = model.net();

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  report.best_val_mse = std::numeric_limits<double>::infinity();
  nn::PairNet<float> best = net;
  std::vector<data::ObsPtr> next, goals;
  std::vector<float> targets;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      next.clear();
      goals.clear();
      targets.clear();
      for (std::size_t k = start; k < end; ++k) {
        const auto& tr = train_set.transitions[order[k]];
        next.push_back(tr.next_obs);
        goals.push_back(tr.goal_obs);
        targets.push_back(train_set.r_star[order[k]]);
      }
      LossAndGrad lg = reward_loss_and_gradients(model, next, goals, targets);
      if (!std::isfinite(lg.loss)) throw NumericError("non-finite reward loss at epoch " + std::to_string(epoch));
      loss_sum += lg.loss * static_cast<double>(end - start);
      opt_enc.step(net.encoder().params(), lg.grads.encoder);
      if (!net.tied()) opt_second.step(net.second_encoder().params(), *lg.grads.second_encoder);
      opt_head.step(net.head().params(), lg.grads.head);
      ++report.steps;
    }
    EpochStats st;
    st.epoch = epoch;
    st.train_mse = loss_sum / static_cast<double>(order.size());
    st.val_mse = validation.size() ? reward_loss(model, validation) : st.train_mse;
    report.history.push_back(st);
    if (st.val_mse < report.best_val_mse) {
      report.best_val_mse = st.val_mse;
      report.best_epoch = epoch;
      best = net;
    } else if (config.patience > 0 && epoch - report.best_epoch >= config.patience) {
      break;
    }
  }
  net = std::move(best);
  model.best_val_mse = report.best_val_mse;
  return report;
}

data::Split prepare_training_data(const data::Buffer& buffer, double gamma, int horizon, int oversample,
                                  double validation_fraction, std::uint64_t seed) {
  const data::SmoothedDataset smoothed = data::smooth_rewards(buffer, gamma, horizon);
  data::Split split = data::split_by_episode(smoothed, validation_fraction, seed);
  split.train = data::oversample_positives(split.train, oversample, seed + 1);
  split.validation = data::oversample_positives(split.validation, oversample, seed + 2);
  return split;
}

namespace {

std::filesystem::path sidecar_path(const std::filesystem::path& p) {
  auto s = p;
  s += ".json";
  return s;
}

std::vector<const nn::Network<float>*> nets_of(const ReprModel& m) {
  std::vector<const nn::Network<float>*> v{&m.net().encoder()};
  if (!m.tied()) v.push_back(&m.net().second_encoder());
  v.push_back(&m.net().head());
  return v;
}

}  // namespace

void save_model(const ReprModel& model, const std::filesystem::path& path) {
  const auto nets = nets_of(model);
  nn::save_weights(path, nets);
  nlohmann::ordered_json j;
  j["format"] = "rprl-model";
  j["version"] = kModelFormatVersion;
  j["tied"] = model.tied();
  j["gamma"] = model.provenance.gamma;
  j["M"] = model.provenance.horizon;
  j["oversample"] = model.provenance.oversample;
  j["dataset_crc32"] = model.provenance.dataset_crc;
  j["env"] = model.provenance.env;
  j["lr"] = model.train_config.lr;
  j["batch"] = model.train_config.batch;
  j["epochs"] = model.train_config.epochs;
  j["patience"] = model.train_config.patience;
  j["seed"] = model.train_config.seed;
  j["best_val_mse"] = model.best_val_mse;
  std::ofstream out(sidecar_path(path));
  if (!out) throw FormatError("cannot write " + sidecar_path(path).string());
  out << j.dump(2) << "\n";
}

ReprModel load_model(const std::filesystem::path& path) {
  std::ifstream in(sidecar_path(path));
  if (!in) throw FormatError("missing model sidecar " + sidecar_path(path).string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    if (j.at("format") != "rprl-model") throw FormatError("not a model sidecar: " + sidecar_path(path).string());
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw FormatError("model version " + std::to_string(j.at("version").get<int>()) + " is not supported");
    ReprModel m(0, j.at("tied").get<bool>());
    m.provenance.gamma = j.at("gamma").get<double>();
    m.provenance.horizon = j.at("M").get<int>();
    m.provenance.oversample = j.at("oversample").get<int>();
    m.provenance.dataset_crc = j.at("dataset_crc32").get<std::uint32_t>();
    m.provenance.env = j.at("env").get<std::string>();
    m.train_config.lr = j.at("lr").get<float>();
    m.train_config.batch = j.at("batch").get<int>();
    m.train_config.epochs = j.at("epochs").get<int>();
    m.train_config.patience = j.at("patience").get<int>();
    m.train_config.seed = j.at("seed").get<std::uint64_t>();
    m.best_val_mse = j.at("best_val_mse").get<double>();
    std::vector<nn::Network<float>*> nets{&m.net().encoder()};
    if (!m.tied()) nets.push_back(&m.net().second_encoder());
    nets.push_back(&m.net().head());
    nn::load_weights(path, nets);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad model sidecar " + sidecar_path(path).string() + ": " + e.what());
  }
}

}  // namespace rprl::repr
