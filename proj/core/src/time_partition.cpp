#include "dflab/time_partition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dflab {

TimePartition::TimePartition(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw std::invalid_argument("TimePartition: need at least {0, 1}");
  if (times_.front() != 0.0 || times_.back() != 1.0)
    throw std::invalid_argument("TimePartition: endpoints must be 0 and 1");
  for (std::size_t i = 0; i + 1 < times_.size(); ++i)
    if (!(times_[i] < times_[i + 1]))
      throw std::invalid_argument("TimePartition: times must be strictly increasing");
}

TimePartition TimePartition::uniform(int intervals) {
  if (intervals < 1) throw std::invalid_argument("TimePartition::uniform: intervals must be >= 1");
  std::vector<double> t(intervals + 1);
  for (int i = 0; i <= intervals; ++i) t[i] = static_cast<double>(i) / intervals;
  t.back() = 1.0;
  return TimePartition(std::move(t));
}

TimePartition TimePartition::dyadic(int level) {
  if (level < 0) throw std::invalid_argument("TimePartition::dyadic: level must be >= 0");
  return uniform(1 << level);
}

bool TimePartition::refined_by(const TimePartition& finer) const {
  for (double t : times_)
    if (!std::binary_search(finer.times_.begin(), finer.times_.end(), t)) return false;
  return true;
}

TimePartition TimePartition::refine_with(const std::vector<double>& extra) const {
  std::vector<double> merged = times_;
  for (double t : extra)
    if (t > 0.0 && t < 1.0) merged.push_back(t);
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  return TimePartition(std::move(merged));
}

}  // namespace dflab
