#include "rprl/nncore/layers.hpp"

namespace rprl::nn {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2D: return "Conv2D";
    case LayerKind::kMaxPool2D: return "MaxPool2D";
    case LayerKind::kDense: return "Dense";
    case LayerKind::kReLU: return "ReLU";
    case LayerKind::kLogistic: return "Logistic";
    case LayerKind::kFlatten: return "Flatten";
    case LayerKind::kSoftmax: return "Softmax";
  }
  return "Unknown";
}

LayerSpec LayerSpec::conv2d(int filters, int kernel, int stride) {
  return {LayerKind::kConv2D, filters, kernel, stride, 0};
}
LayerSpec LayerSpec::max_pool2d(int kernel, int stride) {
  return {LayerKind::kMaxPool2D, 0, kernel, stride, 0};
}
LayerSpec LayerSpec::dense(int units) { return {LayerKind::kDense, 0, 0, 1, units}; }
LayerSpec LayerSpec::relu() { return {LayerKind::kReLU}; }
LayerSpec LayerSpec::logistic() { return {LayerKind::kLogistic}; }
LayerSpec LayerSpec::flatten() { return {LayerKind::kFlatten}; }
LayerSpec LayerSpec::softmax() { return {LayerKind::kSoftmax}; }

int valid_extent(int in, int kernel, int stride) { return (in - kernel) / stride + 1; }

namespace {

[[noreturn]] void fail(std::size_t layer_index, const LayerSpec& spec, const Shape& in,
                       const std::string& expected) {
  throw ShapeError("layer " + std::to_string(layer_index) + " (" + to_string(spec.kind) +
                   "): input shape " + shape_to_string(in) + " incompatible, expected " +
                   expected);
}

}  // namespace

Shape output_shape(const LayerSpec& spec, const Shape& in, std::size_t layer_index) {
  switch (spec.kind) {
    case LayerKind::kConv2D:
    case LayerKind::kMaxPool2D: {
      if (in.size() != 3) fail(layer_index, spec, in, "rank-3 HxWxC");
      if (spec.kernel <= 0 || spec.stride <= 0) fail(layer_index, spec, in, "positive kernel/stride");
      if (in[0] < spec.kernel || in[1] < spec.kernel) {
        fail(layer_index, spec, in,
             "spatial extent >= kernel " + std::to_string(spec.kernel));
      }
      const int oh = valid_extent(in[0], spec.kernel, spec.stride);
      const int ow = valid_extent(in[1], spec.kernel, spec.stride);
      const int oc = spec.kind == LayerKind::kConv2D ? spec.filters : in[2];
      if (oc <= 0) fail(layer_index, spec, in, "positive filter count");
      return {oh, ow, oc};
    }
    case LayerKind::kDense:
      if (in.size() != 1) fail(layer_index, spec, in, "rank-1 vector (insert Flatten)");
      if (spec.units <= 0) fail(layer_index, spec, in, "positive unit count");
      return {spec.units};
    case LayerKind::kFlatten:
      return {static_cast<int>(shape_size(in))};
    case LayerKind::kSoftmax:
      if (in.size() != 1) fail(layer_index, spec, in, "rank-1 vector");
      return in;
    case LayerKind::kReLU:
    case LayerKind::kLogistic:
      return in;
  }
  fail(layer_index, spec, in, "known layer kind");
}

Shape weight_shape(const LayerSpec& spec, const Shape& in) {
  if (spec.kind == LayerKind::kDense) return {spec.units, in.at(0)};
  if (spec.kind == LayerKind::kConv2D) return {spec.filters, spec.kernel, spec.kernel, in.at(2)};
  return {};
}

Shape bias_shape(const LayerSpec& spec) {
  if (spec.kind == LayerKind::kDense) return {spec.units};
  if (spec.kind == LayerKind::kConv2D) return {spec.filters};
  return {};
}

}  // namespace rprl::nn
