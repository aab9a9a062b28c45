#pragma once

#include <span>

namespace genrl::harness {

/// Probability that a draw from a exceeds a draw from b, ties counted half.
/// Enumerates every pair. Throws std::invalid_argument on an empty sample.
double cles(std::span<const double> a, std::span<const double> b);

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // population (divisor n)
  double median = 0.0;
};

/// Throws std::invalid_argument on an empty sample.
Aggregate aggregate(std::span<const double> values);

}  // namespace genrl::harness
