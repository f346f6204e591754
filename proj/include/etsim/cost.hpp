#pragma once

// Quadratic disagreement cost of an ensemble and its trapezoid quadrature.

#include <span>

namespace etsim {

struct DeviationSums {
  double sum_sq = 0.0;
  double sum = 0.0;
};

/// Sums of d_i^2 and d_i in the canonical order shared with the interval
/// kernels: slot i goes to lane i % 16, lanes are accumulated in slot order
/// and folded with a fixed pairwise tree.
[[nodiscard]] DeviationSums deviation_sums(std::span<const double> deviations) noexcept;

/// (1/2) * sum_{i,j} (d_i - d_j)^2, evaluated in O(N) as N * sum d^2 - (sum d)^2.
[[nodiscard]] double pair_disagreement(std::span<const double> deviations) noexcept;

struct CostIncrement {
  double pair = 0.0;
  double single = 0.0;  // agent 0 alone: d_0^2
};

/// Trapezoid panel between two consecutive grid states of one interval.
/// Throws std::invalid_argument for mismatched sizes or empty states.
[[nodiscard]] CostIncrement accumulate_cost(std::span<const double> before, std::span<const double> after, double dt);

}  // namespace etsim
