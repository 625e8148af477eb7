#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rprl/nncore/tensor.hpp"

namespace rprl::nn {

// Tag values are persisted in weight files; do not renumber.
enum class LayerKind : std::uint8_t {
  kConv2D = 1,
  kMaxPool2D = 2,
  kDense = 3,
  kReLU = 4,
  kLogistic = 5,
  kFlatten = 6,
  kSoftmax = 7,
};

std::string to_string(LayerKind kind);

// One layer of a sequential stack. Spatial layers work on HWC samples and
// never pad ("valid" only).
struct LayerSpec {
  LayerKind kind = LayerKind::kReLU;
  int filters = 0;  // Conv2D
  int kernel = 0;   // Conv2D, MaxPool2D
  int stride = 1;   // Conv2D, MaxPool2D
  int units = 0;    // Dense

  static LayerSpec conv2d(int filters, int kernel, int stride);
  static LayerSpec max_pool2d(int kernel, int stride);
  static LayerSpec dense(int units);
  static LayerSpec relu();
  static LayerSpec logistic();
  static LayerSpec flatten();
  static LayerSpec softmax();

  bool has_params() const { return kind == LayerKind::kConv2D || kind == LayerKind::kDense; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// floor((in - k) / stride) + 1, the valid-padding output extent.
int valid_extent(int in, int kernel, int stride);

// Per-sample output shape. Throws ShapeError naming `layer_index` when the
// input cannot feed this layer.
Shape output_shape(const LayerSpec& spec, const Shape& in, std::size_t layer_index);

// Weight and bias shapes for parameterised layers. Dense weights are
// [units, in]; Conv2D weights are [filters, k, k, channels].
Shape weight_shape(const LayerSpec& spec, const Shape& in);
Shape bias_shape(const LayerSpec& spec);

}  // namespace rprl::nn
