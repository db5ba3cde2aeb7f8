// Drift bookkeeping for trajectory invariants: deviation from the step-0
// value in the mixed absolute/relative convention, with max and RMS summary
// and the first index crossing a threshold.

#pragma once

#include <optional>

#include "hktop/core.hpp"

namespace hktop {

struct DriftSummary {
  double max_drift = 0.0;
  double rms_drift = 0.0;
  std::optional<long> first_violation;
};

class DriftTracker {
 public:
  explicit DriftTracker(double threshold = std::numeric_limits<double>::infinity())
      : threshold_(threshold) {}

  // Feed the invariant value at successive steps; step 0 sets the reference.
  void add(double value) {
    if (count_ == 0) {
      reference_ = value;
    } else {
      const double dev = mixed_deviation(value, reference_);
      max_ = std::max(max_, dev);
      sum_sq_ += dev * dev;
      if (!first_violation_ && dev > threshold_) first_violation_ = count_;
    }
    ++count_;
  }

  long steps() const { return count_; }

  DriftSummary summary() const {
    DriftSummary s;
    s.max_drift = max_;
    s.rms_drift = count_ > 1 ? std::sqrt(sum_sq_ / static_cast<double>(count_ - 1)) : 0.0;
    s.first_violation = first_violation_;
    return s;
  }

 private:
  double threshold_;
  double reference_ = 0.0;
  long count_ = 0;
  double max_ = 0.0;
  double sum_sq_ = 0.0;
  std::optional<long> first_violation_;
};

}  // namespace hktop
