#include "rprl/nncore/network.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

namespace rprl::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using ConstRowVec = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;
template <typename T>
using RowVec = Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>;

struct ConvGeometry {
  int n, h, w, c, k, stride, oh, ow;
  int patch() const { return k * k * c; }
  int rows() const { return n * oh * ow; }
};

template <typename T>
void im2col(const BasicTensor<T>& in, const ConvGeometry& g, BasicTensor<T>& cols) {
  cols = BasicTensor<T>({g.rows(), g.patch()});
  T* dst = cols.raw();
  const T* src = in.raw();
  for (int n = 0; n < g.n; ++n) {
    for (int oy = 0; oy < g.oh; ++oy) {
      for (int ox = 0; ox < g.ow; ++ox) {
        for (int ky = 0; ky < g.k; ++ky) {
          const T* row = src + ((static_cast<std::size_t>(n) * g.h + oy * g.stride + ky) * g.w +
                                ox * g.stride) * g.c;
          std::copy(row, row + g.k * g.c, dst);
          dst += g.k * g.c;
        }
      }
    }
  }
}

template <typename T>
void col2im(const RowMat<T>& dcols, const ConvGeometry& g, BasicTensor<T>& din) {
  T* dst = din.raw();
  const T* src = dcols.data();
  for (int n = 0; n < g.n; ++n) {
    for (int oy = 0; oy < g.oh; ++oy) {
      for (int ox = 0; ox < g.ow; ++ox) {
        for (int ky = 0; ky < g.k; ++ky) {
          T* row = dst + ((static_cast<std::size_t>(n) * g.h + oy * g.stride + ky) * g.w +
                          ox * g.stride) * g.c;
          for (int j = 0; j < g.k * g.c; ++j) row[j] += src[j];
          src += g.k * g.c;
        }
      }
    }
  }
}

template <typename T>
T logistic(T x) {
  const T y = T{1} / (T{1} + std::exp(-x));
  // Keep the output strictly inside (0, 1) even when exp saturates.
  constexpr T lo = std::numeric_limits<T>::min();
  constexpr T hi = T{1} - std::numeric_limits<T>::epsilon() / T{2};
  return std::clamp(y, lo, hi);
}

}  // namespace

Shape batched(int n, const Shape& sample) {
  Shape s;
  s.reserve(sample.size() + 1);
  s.push_back(n);
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

template <typename T>
Network<T>::Network(Shape input_shape, std::vector<LayerSpec> layers)
    : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
  shapes_.push_back(input_shape_);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Shape& in = shapes_.back();
    Shape out = nn::output_shape(layers_[i], in, i);
    if (layers_[i].has_params()) {
      params_.set(i, {BasicTensor<T>(weight_shape(layers_[i], in)),
                      BasicTensor<T>(bias_shape(layers_[i]))});
    }
    shapes_.push_back(std::move(out));
  }
}

template <typename T>
void Network<T>::init_params(std::mt19937_64& rng) {
  for (auto& [i, p] : params_.layers()) {
    const LayerSpec& spec = layers_[i];
    double fan_in = 0, fan_out = 0;
    if (spec.kind == LayerKind::kDense) {
      fan_in = p.weight.dim(1);
      fan_out = p.weight.dim(0);
    } else {
      const double receptive = static_cast<double>(spec.kernel) * spec.kernel;
      fan_in = receptive * p.weight.dim(3);
      fan_out = receptive * p.weight.dim(0);
    }
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : p.weight.data()) v = static_cast<T>(dist(rng));
    p.bias.fill(T{0});
  }
}

template <typename T>
BasicTensor<T> Network<T>::forward(const BasicTensor<T>& batch, ForwardCache<T>* cache) const {
  if (layers_.empty()) throw UsageError("forward on an empty network");
  const Shape& bs = batch.shape();
  if (bs.size() != input_shape_.size() + 1 ||
      !std::equal(input_shape_.begin(), input_shape_.end(), bs.begin() + 1)) {
    throw ShapeError("layer 0 (" + to_string(layers_[0].kind) + "): input shape " +
                     shape_to_string(bs) + " does not match expected " +
                     shape_to_string(batched(bs.empty() ? 1 : bs[0], input_shape_)));
  }
  const int n = bs[0];
  if (cache) {
    cache->clear();
    cache->acts.reserve(layers_.size() + 1);
    cache->acts.push_back(batch);
    cache->pool_argmax.resize(layers_.size());
    cache->columns.resize(layers_.size());
  }

  BasicTensor<T> cur = batch;
  for (std::size_t li = 0; li < layers_.size(); ++li) {
    const LayerSpec& spec = layers_[li];
    const Shape& in = shapes_[li];
    const Shape& out = shapes_[li + 1];
    BasicTensor<T> next(batched(n, out));
    switch (spec.kind) {
      case LayerKind::kDense: {
        const auto& p = params_.at(li);
        ConstMatMap<T> x(cur.raw(), n, in[0]);
        ConstMatMap<T> w(p.weight.raw(), spec.units, in[0]);
        MatMap<T> y(next.raw(), n, spec.units);
        y.noalias() = x * w.transpose();
        y.rowwise() += ConstRowVec<T>(p.bias.raw(), spec.units);
        break;
      }
      case LayerKind::kConv2D: {
        const auto& p = params_.at(li);
        ConvGeometry g{n, in[0], in[1], in[2], spec.kernel, spec.stride, out[0], out[1]};
        BasicTensor<T> local;
        BasicTensor<T>& cols = cache ? cache->columns[li] : local;
        im2col(cur, g, cols);
        ConstMatMap<T> c(cols.raw(), g.rows(), g.patch());
        ConstMatMap<T> w(p.weight.raw(), spec.filters, g.patch());
        MatMap<T> y(next.raw(), g.rows(), spec.filters);
        y.noalias() = c * w.transpose();
        y.rowwise() += ConstRowVec<T>(p.bias.raw(), spec.filters);
        break;
      }
      case LayerKind::kMaxPool2D: {
        const int h = in[0], w = in[1], ch = in[2], oh = out[0], ow = out[1];
        std::vector<std::uint32_t>* arg = cache ? &cache->pool_argmax[li] : nullptr;
        if (arg) arg->assign(next.size(), 0);
        std::size_t o = 0;
        for (int b = 0; b < n; ++b) {
          for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
              for (int c = 0; c < ch; ++c, ++o) {
                std::size_t best = 0;
                T best_v = -std::numeric_limits<T>::infinity();
                for (int ky = 0; ky < spec.kernel; ++ky) {
                  for (int kx = 0; kx < spec.kernel; ++kx) {
                    const std::size_t idx =
                        ((static_cast<std::size_t>(b) * h + oy * spec.stride + ky) * w +
                         ox * spec.stride + kx) * ch + c;
                    if (cur[idx] > best_v) {
                      best_v = cur[idx];
                      best = idx;
                    }
                  }
                }
                next[o] = best_v;
                if (arg) (*arg)[o] = static_cast<std::uint32_t>(best);
              }
            }
          }
        }
        break;
      }
      case LayerKind::kReLU:
        for (std::size_t i = 0; i < cur.size(); ++i) next[i] = cur[i] > T{0} || cur[i] != cur[i] ? cur[i] : T{0};
        break;
      case LayerKind::kLogistic:
        for (std::size_t i = 0; i < cur.size(); ++i) next[i] = logistic(cur[i]);
        break;
      case LayerKind::kFlatten:
        next = std::move(cur);
        next.reshape(batched(n, out));
        break;
      case LayerKind::kSoftmax: {
        const int d = in[0];
        for (int b = 0; b < n; ++b) {
          const T* x = cur.raw() + static_cast<std::size_t>(b) * d;
          T* y = next.raw() + static_cast<std::size_t>(b) * d;
          const T mx = *std::max_element(x, x + d);
          T sum = 0;
          for (int j = 0; j < d; ++j) sum += (y[j] = std::exp(x[j] - mx));
          for (int j = 0; j < d; ++j) y[j] /= sum;
        }
        break;
      }
    }
    cur = std::move(next);
    if (cache) cache->acts.push_back(cur);
  }
  return cur;
}

template <typename T>
Gradients<T> Network<T>::backward(const ForwardCache<T>& cache, const BasicTensor<T>& grad_output,
                                  bool want_input_grad) const {
  if (cache.empty() || cache.acts.size() != layers_.size() + 1) {
    throw UsageError("backward called without a matching forward cache");
  }
  const int n = cache.acts[0].dim(0);
  const Shape expected = batched(n, output_shape());
  if (grad_output.shape() != expected) {
    throw ShapeError("output gradient shape " + shape_to_string(grad_output.shape()) +
                     " does not match forward output " + shape_to_string(expected));
  }

  Gradients<T> result;
  result.params = params_.zeros_like();
  BasicTensor<T> grad = grad_output;

  for (std::size_t li = layers_.size(); li-- > 0;) {
    const LayerSpec& spec = layers_[li];
    const Shape& in = shapes_[li];
    const BasicTensor<T>& x = cache.acts[li];
    const BasicTensor<T>& y = cache.acts[li + 1];
    const bool need_dx = want_input_grad || li > 0;
    BasicTensor<T> dx;
    switch (spec.kind) {
      case LayerKind::kDense: {
        const auto& p = params_.at(li);
        auto& g = result.params.at(li);
        ConstMatMap<T> dy(grad.raw(), n, spec.units);
        ConstMatMap<T> xm(x.raw(), n, in[0]);
        MatMap<T>(g.weight.raw(), spec.units, in[0]).noalias() = dy.transpose() * xm;
        RowVec<T>(g.bias.raw(), spec.units) = dy.colwise().sum();
        if (need_dx) {
          dx = BasicTensor<T>(x.shape());
          ConstMatMap<T> w(p.weight.raw(), spec.units, in[0]);
          MatMap<T>(dx.raw(), n, in[0]).noalias() = dy * w;
        }
        break;
      }
      case LayerKind::kConv2D: {
        const auto& p = params_.at(li);
        auto& g = result.params.at(li);
        const Shape& out = shapes_[li + 1];
        ConvGeometry geo{n, in[0], in[1], in[2], spec.kernel, spec.stride, out[0], out[1]};
        const BasicTensor<T>& cols = cache.columns[li];
        ConstMatMap<T> dy(grad.raw(), geo.rows(), spec.filters);
        ConstMatMap<T> cm(cols.raw(), geo.rows(), geo.patch());
        MatMap<T>(g.weight.raw(), spec.filters, geo.patch()).noalias() = dy.transpose() * cm;
        RowVec<T>(g.bias.raw(), spec.filters) = dy.colwise().sum();
        if (need_dx) {
          ConstMatMap<T> w(p.weight.raw(), spec.filters, geo.patch());
          RowMat<T> dcols = dy * w;
          dx = BasicTensor<T>(x.shape());
          col2im(dcols, geo, dx);
        }
        break;
      }
      case LayerKind::kMaxPool2D: {
        dx = BasicTensor<T>(x.shape());
        const auto& arg = cache.pool_argmax[li];
        for (std::size_t o = 0; o < grad.size(); ++o) dx[arg[o]] += grad[o];
        break;
      }
      case LayerKind::kReLU:
        dx = BasicTensor<T>(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) dx[i] = x[i] > T{0} ? grad[i] : T{0};
        break;
      case LayerKind::kLogistic:
        dx = BasicTensor<T>(x.shape());
        for (std::size_t i = 0; i < x.size(); ++i) dx[i] = grad[i] * y[i] * (T{1} - y[i]);
        break;
      case LayerKind::kFlatten:
        dx = std::move(grad);
        dx.reshape(x.shape());
        break;
      case LayerKind::kSoftmax: {
        dx = BasicTensor<T>(x.shape());
        const int d = in[0];
        for (int b = 0; b < n; ++b) {
          const std::size_t off = static_cast<std::size_t>(b) * d;
          T dot = 0;
          for (int j = 0; j < d; ++j) dot += grad[off + j] * y[off + j];
          for (int j = 0; j < d; ++j) dx[off + j] = y[off + j] * (grad[off + j] - dot);
        }
        break;
      }
    }
    if (!need_dx) break;
    grad = std::move(dx);
  }
  if (want_input_grad) result.input = std::move(grad);
  return result;
}

template class Network<float>;
template class Network<double>;

}  // namespace rprl::nn
