#pragma once

#include <vector>

namespace dflab {

/// Partition 0 = t_0 < t_1 < ... < t_n = 1 of the unit interval. Repeated or
/// unordered times are rejected at construction.
class TimePartition {
 public:
  explicit TimePartition(std::vector<double> times);
  static TimePartition uniform(int intervals);
  /// Dyadic partition with 2^level intervals.
  static TimePartition dyadic(int level);

  const std::vector<double>& times() const { return times_; }
  int intervals() const { return static_cast<int>(times_.size()) - 1; }
  double time(int i) const { return times_[i]; }
  double delta(int i) const { return times_[i + 1] - times_[i]; }
  /// True when every time of this partition appears in `finer`.
  bool refined_by(const TimePartition& finer) const;
  /// New partition with extra interior times merged in.
  TimePartition refine_with(const std::vector<double>& extra) const;

 private:
  std::vector<double> times_;
};

}  // namespace dflab
