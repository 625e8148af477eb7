#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "rprl/nncore/network.hpp"

namespace rprl::nn {

// Scalar loss of a network output; fills `grad` with dLoss/dOutput when
// non-null.
using LossFn = std::function<double(const BasicTensor<double>& output, BasicTensor<double>* grad)>;

// One loss evaluation plus a signature of every piecewise decision taken on
// the way (ReLU signs, max-pool winners). Two evaluations with equal
// signatures lie on the same smooth piece of the loss.
struct Probe {
  double loss = 0.0;
  std::uint64_t signature = 0;
};
using ProbeFn = std::function<Probe()>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  // Entries whose +/-epsilon interval crosses a ReLU kink or changes a
  // max-pool winner; a central difference is not a derivative there.
  std::size_t skipped_nonsmooth = 0;

  void merge(const GradCheckReport& other);
};

// |a - n| / (|a| + |n|), zero where |a| + |n| <= 1e-8.
double relative_error(double analytic, double numeric);

// Hash of the piecewise decisions recorded in a forward cache.
std::uint64_t activation_signature(const Network<double>& net, const ForwardCache<double>& cache,
                                   std::uint64_t seed = 1469598103934665603ull);

// Central differences over the entries of `values` (restored afterwards).
// With max_entries > 0, larger tensors are checked on a fixed random subset
// of that many entries.
GradCheckReport compare_gradients(std::span<double> values, std::span<const double> analytic,
                                  const ProbeFn& probe, double epsilon,
                                  std::size_t max_entries = 0);
GradCheckReport compare_gradients(ParamSet<double>& params, const ParamSet<double>& analytic,
                                  const ProbeFn& probe, double epsilon,
                                  std::size_t max_entries = 0);

// Runs the network in 64-bit, backpropagates `loss`, then perturbs every
// parameter (and, if requested, every input entry) by +/-epsilon.
GradCheckReport gradient_check(const Network<float>& net, const Tensor& input, const LossFn& loss,
                               double epsilon, bool include_input = true,
                               std::size_t max_entries = 0);

// Maximum relative error from gradient_check().
double finite_difference_check(const Network<float>& net, const Tensor& input, const LossFn& loss,
                               double epsilon, bool include_input = true);

}  // namespace rprl::nn
