#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdim/systems.hpp"

namespace mdim::detail {

/// Throws WindowError unless every point of K carries the coordinate range.
void require_window(const FinitePointSet& K, Window range, const char* what);

/// Word of point i on the coordinate range (one char per symbol).
std::string restriction_key(const FinitePointSet& K, std::size_t i, Window range);
std::string restriction_key(const Point& p, Window range);

/// Number of distinct words of K on the range.
std::uint64_t count_restrictions(const FinitePointSet& K, Window range);

/// Points of K grouped by their word on the range; groups appear in order of
/// first member, members in index order.
struct Grouping {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> group_of;  // per point
};
Grouping group_by_restriction(const FinitePointSet& K, Window range);

/// Coordinates read by d_n at ball radius r (cylinder fixing |i| <= r for
/// every shift k < n). Empty window when r < 0.
inline Window bowen_range(int r, int n) { return r < 0 ? Window{0, -1} : Window{-r, n - 1 + r}; }

}  // namespace mdim::detail
