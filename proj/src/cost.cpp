#include "etsim/cost.hpp"

#include <stdexcept>

#include "etsim/kernel.hpp"

namespace etsim {

namespace {

double fold16(double* a) noexcept {
  for (int i = 0; i < 8; ++i) a[i] = a[i] + a[i + 8];
  for (int i = 0; i < 4; ++i) a[i] = a[i] + a[i + 4];
  for (int i = 0; i < 2; ++i) a[i] = a[i] + a[i + 2];
  return a[0] + a[1];
}

}  // namespace

DeviationSums deviation_sums(std::span<const double> deviations) noexcept {
  double sq[kernel::kLanes] = {};
  double lin[kernel::kLanes] = {};
  for (std::size_t i = 0; i < deviations.size(); ++i) {
    const double d = deviations[i];
    sq[i % kernel::kLanes] += d * d;
    lin[i % kernel::kLanes] += d;
  }
  return {fold16(sq), fold16(lin)};
}

double pair_disagreement(std::span<const double> deviations) noexcept {
  const auto s = deviation_sums(deviations);
  return static_cast<double>(deviations.size()) * s.sum_sq - s.sum * s.sum;
}

CostIncrement accumulate_cost(std::span<const double> before, std::span<const double> after, double dt) {
  if (before.size() != after.size() || before.empty())
    throw std::invalid_argument("accumulate_cost: states must be non-empty and of equal size");
  const double half_dt = 0.5 * dt;
  return {half_dt * (pair_disagreement(before) + pair_disagreement(after)),
          half_dt * (before[0] * before[0] + after[0] * after[0])};
}

}  // namespace etsim
