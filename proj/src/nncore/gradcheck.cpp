#include "rprl/nncore/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace rprl::nn {

void GradCheckReport::merge(const GradCheckReport& other) {
  max_relative_error = std::max(max_relative_error, other.max_relative_error);
  checked += other.checked;
  skipped_nonsmooth += other.skipped_nonsmooth;
}

double relative_error(double analytic, double numeric) {
  const double denom = std::abs(analytic) + std::abs(numeric);
  if (denom <= 1e-8) return 0.0;
  return std::abs(analytic - numeric) / denom;
}

std::uint64_t activation_signature(const Network<double>& net, const ForwardCache<double>& cache,
                                   std::uint64_t seed) {
  std::uint64_t h = seed;
  auto mix = [&h](std::uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const LayerKind kind = net.layers()[i].kind;
    if (kind == LayerKind::kReLU) {
      for (double v : cache.acts[i].data()) mix(v > 0.0 ? 1 : 2);
    } else if (kind == LayerKind::kMaxPool2D) {
      for (std::uint32_t a : cache.pool_argmax[i]) mix(a + 3);
    }
  }
  return h;
}

GradCheckReport compare_gradients(std::span<double> values, std::span<const double> analytic,
                                  const ProbeFn& probe, double epsilon, std::size_t max_entries) {
  if (!(epsilon > 0.0)) throw UsageError("finite-difference epsilon must be positive");
  if (values.size() != analytic.size()) throw ShapeError("analytic gradient size mismatch");
  std::vector<std::size_t> entries(values.size());
  std::iota(entries.begin(), entries.end(), std::size_t{0});
  if (max_entries > 0 && entries.size() > max_entries) {
    std::vector<std::size_t> picked;
    std::mt19937_64 rng(values.size());
    std::sample(entries.begin(), entries.end(), std::back_inserter(picked), max_entries, rng);
    entries = std::move(picked);
  }
  GradCheckReport report;
  const std::uint64_t base = probe().signature;
  for (std::size_t i : entries) {
    const double saved = values[i];
    values[i] = saved + epsilon;
    const Probe up = probe();
    values[i] = saved - epsilon;
    const Probe down = probe();
    values[i] = saved;
    if (up.signature != base || down.signature != base) {
      ++report.skipped_nonsmooth;
      continue;
    }
    ++report.checked;
    const double numeric = (up.loss - down.loss) / (2.0 * epsilon);
    report.max_relative_error =
        std::max(report.max_relative_error, relative_error(analytic[i], numeric));
  }
  return report;
}

GradCheckReport compare_gradients(ParamSet<double>& params, const ParamSet<double>& analytic,
                                  const ProbeFn& probe, double epsilon, std::size_t max_entries) {
  if (!params.same_layout(analytic)) throw ShapeError("analytic gradient layout mismatch");
  GradCheckReport report;
  for (auto& [k, p] : params.layers()) {
    const auto& a = analytic.at(k);
    report.merge(compare_gradients(p.weight.data(), a.weight.data(), probe, epsilon, max_entries));
    report.merge(compare_gradients(p.bias.data(), a.bias.data(), probe, epsilon, max_entries));
  }
  return report;
}

GradCheckReport gradient_check(const Network<float>& net, const Tensor& input, const LossFn& loss,
                               double epsilon, bool include_input, std::size_t max_entries) {
  if (!(epsilon > 0.0)) throw UsageError("finite-difference epsilon must be positive");
  Network<double> wide = net.cast<double>();
  BasicTensor<double> x = input.cast<double>();

  ForwardCache<double> cache;
  const BasicTensor<double> out = wide.forward(x, &cache);
  BasicTensor<double> grad_out(out.shape());
  loss(out, &grad_out);
  const Gradients<double> grads = wide.backward(cache, grad_out, include_input);

  ForwardCache<double> scratch;
  ProbeFn probe = [&] {
    const BasicTensor<double> y = wide.forward(x, &scratch);
    return Probe{loss(y, nullptr), activation_signature(wide, scratch)};
  };
  GradCheckReport report = compare_gradients(wide.params(), grads.params, probe, epsilon, max_entries);
  if (include_input) report.merge(compare_gradients(x.data(), grads.input.data(), probe, epsilon, max_entries));
  return report;
}

double finite_difference_check(const Network<float>& net, const Tensor& input, const LossFn& loss,
                               double epsilon, bool include_input) {
  return gradient_check(net, input, loss, epsilon, include_input).max_relative_error;
}

}  // namespace rprl::nn
