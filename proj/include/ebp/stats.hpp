#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace ebp {

// Welford accumulator.
class RunningStats {
 public:
  void add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return n_ ? mean_ : std::numeric_limits<double>::quiet_NaN(); }
  double variance() const noexcept {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : std::numeric_limits<double>::quiet_NaN();
  }
  double standard_error() const noexcept {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_))
                  : std::numeric_limits<double>::infinity();
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t count = 0;
};

inline Estimate to_estimate(const RunningStats& s) {
  return {s.mean(), s.standard_error(), s.count()};
}

// |observed - expected| <= k * se.  A zero standard error demands equality
// up to a few ulps of the expected value.
inline bool within_se(double observed, double expected, double se, double k = 3.0) {
  const double slack = 1e-12 * std::max(1.0, std::abs(expected));
  return std::abs(observed - expected) <= k * se + slack;
}

}  // namespace ebp
