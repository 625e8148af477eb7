#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rprl/nncore/layers.hpp"
#include "rprl/nncore/params.hpp"
#include "rprl/nncore/tensor.hpp"

namespace rprl::nn {

// Activations retained by forward() for the matching backward() call.
// acts[0] is the network input; acts[i + 1] is the output of layer i.
template <typename T>
struct ForwardCache {
  std::vector<BasicTensor<T>> acts;
  std::vector<std::vector<std::uint32_t>> pool_argmax;  // per layer, empty unless MaxPool2D
  std::vector<BasicTensor<T>> columns;                  // per layer, im2col buffer for Conv2D

  bool empty() const { return acts.empty(); }
  void clear() {
    acts.clear();
    pool_argmax.clear();
    columns.clear();
  }
};

template <typename T>
struct Gradients {
  ParamSet<T> params;
  BasicTensor<T> input;  // empty when the input gradient was not requested
};

// Fixed sequential layer stack. Every tensor passed to forward() carries a
// leading batch dimension: [N, ...input_shape].
template <typename T>
class Network {
 public:
  Network() = default;
  Network(Shape input_shape, std::vector<LayerSpec> layers);

  // Uniform(-b, b), b = sqrt(6 / (fan_in + fan_out)); zero biases.
  void init_params(std::mt19937_64& rng);

  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return shapes_.back(); }
  // shapes()[0] is the input shape, shapes()[i + 1] the output of layer i.
  const std::vector<Shape>& shapes() const { return shapes_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }

  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }
  std::size_t num_parameters() const { return params_.num_parameters(); }

  BasicTensor<T> forward(const BasicTensor<T>& batch, ForwardCache<T>* cache = nullptr) const;

  Gradients<T> backward(const ForwardCache<T>& cache, const BasicTensor<T>& grad_output,
                        bool want_input_grad = true) const;

  template <typename U>
  Network<U> cast() const {
    Network<U> out(input_shape_, layers_);
    out.params() = params_.template cast<U>();
    return out;
  }

 private:
  Shape input_shape_;
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;
  ParamSet<T> params_;
};

// Prepends a batch dimension of `n` to a per-sample shape.
Shape batched(int n, const Shape& sample);

}  // namespace rprl::nn
