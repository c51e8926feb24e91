#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "polyfield/geometry.hpp"

namespace polyfield {

/// Uniform grid of segment bounding boxes for candidate-pair queries.
class SegmentIndex {
 public:
  explicit SegmentIndex(double cell_size = 1.0) : cell_(cell_size > 0.0 ? cell_size : 1.0) {}

  void clear() {
    cells_.clear();
    segments_.clear();
    tags_.clear();
  }

  std::size_t size() const { return segments_.size(); }
  const Segment& segment(std::size_t id) const { return segments_[id]; }
  std::uint32_t tag(std::size_t id) const { return tags_[id]; }

  std::uint32_t add(const Segment& s, std::uint32_t tag) {
    const auto id = static_cast<std::uint32_t>(segments_.size());
    segments_.push_back(s);
    tags_.push_back(tag);
    for_cells(s.bbox(), [&](std::uint64_t key) { cells_[key].push_back(id); });
    return id;
  }

  /// Ids of segments whose cells overlap `box`, sorted and unique.
  void query(const BBox& box, std::vector<std::uint32_t>& out) const {
    out.clear();
    for_cells(box, [&](std::uint64_t key) {
      auto it = cells_.find(key);
      if (it != cells_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }

 private:
  template <class F>
  void for_cells(const BBox& box, F&& f) const {
    const auto x0 = cell_of(box.lo.x), x1 = cell_of(box.hi.x);
    const auto y0 = cell_of(box.lo.y), y1 = cell_of(box.hi.y);
    for (auto x = x0; x <= x1; ++x) {
      for (auto y = y0; y <= y1; ++y) f(key(x, y));
    }
  }
  std::int64_t cell_of(double v) const { return static_cast<std::int64_t>(std::floor(v / cell_)); }
  static std::uint64_t key(std::int64_t x, std::int64_t y) {
    return (static_cast<std::uint64_t>(x) << 32) ^ (static_cast<std::uint64_t>(y) & 0xffffffffULL);
  }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
  std::vector<Segment> segments_;
  std::vector<std::uint32_t> tags_;
};

}  // namespace polyfield
