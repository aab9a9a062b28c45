#include "genrl/harness/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace genrl::harness {

double cles(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("cles: empty sample");
  // Wins count 2 and ties 1 so the sum stays an exact integer.
  std::uint64_t score = 0;
  for (double x : a) {
    for (double y : b) {
      if (x > y) {
        score += 2;
      } else if (x == y) {
        score += 1;
      }
    }
  }
  const std::uint64_t total = 2 * static_cast<std::uint64_t>(a.size()) * static_cast<std::uint64_t>(b.size());
  return static_cast<double>(score) / static_cast<double>(total);
}

Aggregate aggregate(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate: empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  // Summing sorted values keeps the result independent of input order.
  double sum = 0.0;
  for (double x : v) sum += x;
  Aggregate out;
  out.mean = sum / n;
  double sq = 0.0;
  for (double x : v) sq += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(sq / n);
  const std::size_t mid = v.size() / 2;
  out.median = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  return out;
}

}  // namespace genrl::harness
