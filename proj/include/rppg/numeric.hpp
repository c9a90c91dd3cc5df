#pragma once

#include <cmath>
#include <span>

namespace rppg {

/// Neumaier compensated accumulator. Partial sums merged with `merge` agree
/// with a serial fold to within a few ulps, independent of split points.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  void merge(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

inline double mean(std::span<const double> xs) {
  return xs.empty() ? 0.0 : compensated_sum(xs) / static_cast<double>(xs.size());
}

/// Population standard deviation.
inline double stddev(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double m = mean(xs);
  CompensatedSum acc;
  for (double x : xs) acc.add((x - m) * (x - m));
  return std::sqrt(acc.value() / static_cast<double>(xs.size()));
}

inline double rms(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  CompensatedSum acc;
  for (double x : xs) acc.add(x * x);
  return std::sqrt(acc.value() / static_cast<double>(xs.size()));
}

}  // namespace rppg
