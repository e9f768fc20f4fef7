#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace ldw {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      correction_ += (sum_ - t) + x;
    else
      correction_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + correction_; }

 private:
  double sum_ = 0.0;
  double correction_ = 0.0;
};

struct Summary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  double std_error = 0.0;
  std::size_t count = 0;
};

// Two-pass compensated mean and standard error of i.i.d. replicate values.
inline Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  CompensatedSum total;
  for (double v : values) total.add(v);
  s.mean = total.value() / static_cast<double>(values.size());
  if (values.size() < 2) return s;
  CompensatedSum squares;
  for (double v : values) squares.add((v - s.mean) * (v - s.mean));
  s.variance = squares.value() / static_cast<double>(values.size() - 1);
  s.std_error = std::sqrt(s.variance / static_cast<double>(values.size()));
  return s;
}

}  // namespace ldw
