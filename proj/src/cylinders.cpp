#include "mdim/detail/cylinders.hpp"

#include <sstream>
#include <unordered_set>

namespace mdim::detail {

void require_window(const FinitePointSet& K, Window range, const char* what) {
  if (range.empty() || K.window().contains(range)) return;
  std::ostringstream os;
  os << what << " reads coordinates [" << range.lo << ", " << range.hi
     << "] but the sample window is [" << K.window().lo << ", " << K.window().hi << "]";
  throw WindowError(os.str(), std::max(-range.lo, range.hi));
}

std::string restriction_key(const FinitePointSet& K, std::size_t i, Window range) {
  std::string key(static_cast<std::size_t>(range.size()), '\0');
  for (int c = range.lo; c <= range.hi; ++c) key[c - range.lo] = static_cast<char>('0' + static_cast<int>(K.coord(i, c)));
  return key;
}

std::string restriction_key(const Point& p, Window range) {
  std::string key(static_cast<std::size_t>(range.size()), '\0');
  for (int c = range.lo; c <= range.hi; ++c) key[c - range.lo] = static_cast<char>('0' + static_cast<int>(p.at(c)));
  return key;
}

std::uint64_t count_restrictions(const FinitePointSet& K, Window range) {
  if (range.empty()) return 1;
  require_window(K, range, "cylinder count");
  if (K.is_product() && !K.filtered()) {
    std::uint64_t total = 1;
    for (int c = range.lo; c <= range.hi; ++c) total *= K.axis(c).size();
    return total;
  }
  std::unordered_set<std::string> seen;
  seen.reserve(K.size());
  for (std::size_t i = 0; i < K.size(); ++i) seen.insert(restriction_key(K, i, range));
  return seen.size();
}

Grouping group_by_restriction(const FinitePointSet& K, Window range) {
  Grouping g;
  g.group_of.resize(K.size());
  if (range.empty()) {
    g.groups.emplace_back();
    for (std::size_t i = 0; i < K.size(); ++i) g.groups[0].push_back(i);
    return g;
  }
  require_window(K, range, "cylinder grouping");
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(K.size());
  for (std::size_t i = 0; i < K.size(); ++i) {
    auto [it, fresh] = index.try_emplace(restriction_key(K, i, range), g.groups.size());
    if (fresh) g.groups.emplace_back();
    g.groups[it->second].push_back(i);
    g.group_of[i] = it->second;
  }
  return g;
}

}  // namespace mdim::detail
