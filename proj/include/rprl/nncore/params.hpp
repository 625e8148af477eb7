#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <map>
#include <string>

#include "rprl/nncore/tensor.hpp"

namespace rprl::nn {

template <typename T>
struct LayerParams {
  BasicTensor<T> weight;
  BasicTensor<T> bias;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

// Weights and biases of a layer stack, keyed by layer index. Gradients use
// the same type so that shapes and keys line up one-to-one.
template <typename T>
class ParamSet {
 public:
  using Map = std::map<std::size_t, LayerParams<T>>;

  Map& layers() { return layers_; }
  const Map& layers() const { return layers_; }
  LayerParams<T>& at(std::size_t layer) { return layers_.at(layer); }
  const LayerParams<T>& at(std::size_t layer) const { return layers_.at(layer); }
  bool contains(std::size_t layer) const { return layers_.contains(layer); }
  void set(std::size_t layer, LayerParams<T> p) { layers_[layer] = std::move(p); }
  bool empty() const { return layers_.empty(); }

  std::size_t num_parameters() const {
    std::size_t n = 0;
    for (const auto& [_, p] : layers_) n += p.weight.size() + p.bias.size();
    return n;
  }

  ParamSet zeros_like() const {
    ParamSet out;
    for (const auto& [k, p] : layers_) {
      out.layers_[k] = {BasicTensor<T>(p.weight.shape()), BasicTensor<T>(p.bias.shape())};
    }
    return out;
  }

  bool same_layout(const ParamSet& other) const {
    if (layers_.size() != other.layers_.size()) return false;
    auto it = other.layers_.begin();
    for (const auto& [k, p] : layers_) {
      if (k != it->first || p.weight.shape() != it->second.weight.shape() ||
          p.bias.shape() != it->second.bias.shape()) {
        return false;
      }
      ++it;
    }
    return true;
  }

  // Visits every tensor with a human-readable key such as "layer 3 weight".
  template <typename F>
  void for_each(F&& f) {
    for (auto& [k, p] : layers_) {
      f(key(k, "weight"), p.weight);
      f(key(k, "bias"), p.bias);
    }
  }
  template <typename F>
  void for_each(F&& f) const {
    for (const auto& [k, p] : layers_) {
      f(key(k, "weight"), p.weight);
      f(key(k, "bias"), p.bias);
    }
  }

  void add_scaled(const ParamSet& other, T s) {
    for (auto& [k, p] : layers_) {
      const auto& o = other.layers_.at(k);
      for (std::size_t i = 0; i < p.weight.size(); ++i) p.weight[i] += s * o.weight[i];
      for (std::size_t i = 0; i < p.bias.size(); ++i) p.bias[i] += s * o.bias[i];
    }
  }

  void scale(T s) {
    for_each([s](const std::string&, BasicTensor<T>& t) {
      for (auto& v : t.data()) v *= s;
    });
  }

  double squared_norm() const {
    double acc = 0.0;
    for_each([&acc](const std::string&, const BasicTensor<T>& t) {
      for (T v : t.data()) acc += static_cast<double>(v) * static_cast<double>(v);
    });
    return acc;
  }

  bool all_finite() const {
    bool ok = true;
    for_each([&ok](const std::string&, const BasicTensor<T>& t) { ok = ok && t.all_finite(); });
    return ok;
  }

  template <typename U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    for (const auto& [k, p] : layers_) {
      out.set(k, {p.weight.template cast<U>(), p.bias.template cast<U>()});
    }
    return out;
  }

  // FNV-1a over the raw parameter bytes; equal iff bit-identical (modulo
  // hash collisions). Used to assert that frozen encoders stay frozen.
  std::uint64_t fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    for_each([&h](const std::string&, const BasicTensor<T>& t) {
      const auto* bytes = reinterpret_cast<const unsigned char*>(t.raw());
      for (std::size_t i = 0; i < t.size() * sizeof(T); ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
      }
    });
    return h;
  }

  friend bool operator==(const ParamSet&, const ParamSet&) = default;

 private:
  static std::string key(std::size_t layer, const char* which) {
    return "layer " + std::to_string(layer) + " " + which;
  }

  Map layers_;
};

}  // namespace rprl::nn
