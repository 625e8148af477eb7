#pragma once

#include <optional>

#include "rprl/nncore/network.hpp"

namespace rprl::nn {

template <typename T>
struct PairCache {
  ForwardCache<T> first;
  ForwardCache<T> second;
  ForwardCache<T> head;
};

template <typename T>
struct PairGradients {
  ParamSet<T> encoder;
  std::optional<ParamSet<T>> second_encoder;  // set only when encoders are untied
  ParamSet<T> head;
};

// Encodes two observations (current view and goal view), concatenates the
// two codes and feeds them to a head network. With tied weights one encoder
// serves both inputs and its gradient is the sum of both paths.
template <typename T>
class PairNet {
 public:
  PairNet() = default;
  PairNet(Network<T> encoder, Network<T> head, std::optional<Network<T>> second_encoder = {});

  bool tied() const { return !second_.has_value(); }
  Network<T>& encoder() { return encoder_; }
  const Network<T>& encoder() const { return encoder_; }
  Network<T>& second_encoder() { return second_ ? *second_ : encoder_; }
  const Network<T>& second_encoder() const { return second_ ? *second_ : encoder_; }
  Network<T>& head() { return head_; }
  const Network<T>& head() const { return head_; }

  int code_size() const { return encoder_.output_shape()[0]; }

  // [N, 2c] concatenation of both codes.
  BasicTensor<T> features(const BasicTensor<T>& first, const BasicTensor<T>& second,
                          PairCache<T>* cache = nullptr) const;

  BasicTensor<T> forward(const BasicTensor<T>& first, const BasicTensor<T>& second,
                         PairCache<T>* cache = nullptr) const;

  // With `encoder_grads` false only the head gradient is computed.
  PairGradients<T> backward(const PairCache<T>& cache, const BasicTensor<T>& grad_output,
                            bool encoder_grads = true) const;

  std::size_t num_parameters() const {
    return encoder_.num_parameters() + (second_ ? second_->num_parameters() : 0) +
           head_.num_parameters();
  }

  template <typename U>
  PairNet<U> cast() const {
    std::optional<Network<U>> second;
    if (second_) second = second_->template cast<U>();
    return PairNet<U>(encoder_.template cast<U>(), head_.template cast<U>(), std::move(second));
  }

 private:
  Network<T> encoder_;
  std::optional<Network<T>> second_;
  Network<T> head_;
};

// Row-wise concatenation of two [N, a] and [N, b] matrices.
template <typename T>
BasicTensor<T> concat_columns(const BasicTensor<T>& left, const BasicTensor<T>& right);

}  // namespace rprl::nn
