#include "rprl/nncore/pair_net.hpp"

#include <algorithm>

namespace rprl::nn {

template <typename T>
BasicTensor<T> concat_columns(const BasicTensor<T>& left, const BasicTensor<T>& right) {
  if (left.rank() != 2 || right.rank() != 2 || left.dim(0) != right.dim(0)) {
    throw ShapeError("cannot concatenate " + shape_to_string(left.shape()) + " and " +
                     shape_to_string(right.shape()));
  }
  const int n = left.dim(0), a = left.dim(1), b = right.dim(1);
  BasicTensor<T> out({n, a + b});
  for (int i = 0; i < n; ++i) {
    std::copy_n(left.raw() + static_cast<std::size_t>(i) * a, a,
                out.raw() + static_cast<std::size_t>(i) * (a + b));
    std::copy_n(right.raw() + static_cast<std::size_t>(i) * b, b,
                out.raw() + static_cast<std::size_t>(i) * (a + b) + a);
  }
  return out;
}

template <typename T>
PairNet<T>::PairNet(Network<T> encoder, Network<T> head, std::optional<Network<T>> second_encoder)
    : encoder_(std::move(encoder)), second_(std::move(second_encoder)), head_(std::move(head)) {
  if (encoder_.output_shape().size() != 1) {
    throw ShapeError("pair encoder must emit a flat code, got " +
                     shape_to_string(encoder_.output_shape()));
  }
  if (second_ && second_->output_shape() != encoder_.output_shape()) {
    throw ShapeError("untied encoders disagree on code shape");
  }
  const Shape expected{2 * encoder_.output_shape()[0]};
  if (head_.input_shape() != expected) {
    throw ShapeError("pair head expects " + shape_to_string(head_.input_shape()) +
                     " but concatenated codes are " + shape_to_string(expected));
  }
}

template <typename T>
BasicTensor<T> PairNet<T>::features(const BasicTensor<T>& first, const BasicTensor<T>& second,
                                    PairCache<T>* cache) const {
  BasicTensor<T> a = encoder_.forward(first, cache ? &cache->first : nullptr);
  BasicTensor<T> b = second_encoder().forward(second, cache ? &cache->second : nullptr);
  return concat_columns(a, b);
}

template <typename T>
BasicTensor<T> PairNet<T>::forward(const BasicTensor<T>& first, const BasicTensor<T>& second,
                                   PairCache<T>* cache) const {
  return head_.forward(features(first, second, cache), cache ? &cache->head : nullptr);
}

template <typename T>
PairGradients<T> PairNet<T>::backward(const PairCache<T>& cache, const BasicTensor<T>& grad_output,
                                      bool encoder_grads) const {
  PairGradients<T> out;
  Gradients<T> h = head_.backward(cache.head, grad_output, encoder_grads);
  out.head = std::move(h.params);
  if (!encoder_grads) return out;

  const int n = h.input.dim(0), c = code_size();
  BasicTensor<T> ga({n, c}), gb({n, c});
  for (int i = 0; i < n; ++i) {
    const T* row = h.input.raw() + static_cast<std::size_t>(i) * 2 * c;
    std::copy_n(row, c, ga.raw() + static_cast<std::size_t>(i) * c);
    std::copy_n(row + c, c, gb.raw() + static_cast<std::size_t>(i) * c);
  }
  out.encoder = encoder_.backward(cache.first, ga, false).params;
  ParamSet<T> second = second_encoder().backward(cache.second, gb, false).params;
  if (second_) {
    out.second_encoder = std::move(second);
  } else {
    out.encoder.add_scaled(second, T{1});
  }
  return out;
}

template class PairNet<float>;
template class PairNet<double>;
template BasicTensor<float> concat_columns(const BasicTensor<float>&, const BasicTensor<float>&);
template BasicTensor<double> concat_columns(const BasicTensor<double>&, const BasicTensor<double>&);

}  // namespace rprl::nn
