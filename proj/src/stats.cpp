#include "syncron/stats.hpp"

#include <algorithm>

namespace syncron {

void OccupancyTracker::update(Picos now, std::size_t occupied) {
  if (now > last_) {
    area_ += static_cast<long double>(current_) * static_cast<long double>(now - last_);
    last_ = now;
  }
  current_ = occupied;
  peak_ = std::max(peak_, occupied);
}

void OccupancyTracker::finish(Picos end) {
  update(std::max(end, last_), current_);
  end_ = std::max(end, last_);
}

double OccupancyTracker::average() const {
  if (capacity_ == 0 || end_ <= 0) return 0.0;
  return static_cast<double>(area_ / (static_cast<long double>(end_) * static_cast<long double>(capacity_)));
}

double OccupancyTracker::max() const {
  if (capacity_ == 0) return 0.0;
  return static_cast<double>(peak_) / static_cast<double>(capacity_);
}

}  // namespace syncron
