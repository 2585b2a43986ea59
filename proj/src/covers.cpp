#include "mdim/covers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "mdim/detail/cylinders.hpp"
#include "mdim/random.hpp"
#include "mdim/solvers.hpp"

namespace mdim {

namespace {

using CellIds = std::vector<std::uint32_t>;

CountResult count_result(std::uint64_t value, Bound bound, CountMethod method, int n, double eps) {
  CountResult r;
  r.value = value;
  r.bound = bound;
  r.method = method;
  r.n = n;
  r.epsilon = eps;
  return r;
}

// Which cells contain T^k y. Symbolic covers are indexed by the center word
// on the cylinder of each radius group.
class Membership {
 public:
  Membership(const System& system, const Cover& cover) : system_(system), cover_(cover) {
    if (!system.symbolic()) return;
    std::map<int, std::size_t> group_of_radius;
    for (std::uint32_t c = 0; c < cover.cells.size(); ++c) {
      const auto& cell = cover.cells[c];
      const int r = system.open_ball_radius(cell.radius);
      auto [it, inserted] = group_of_radius.try_emplace(r, groups_.size());
      if (inserted) groups_.push_back({r, {}, {}});
      auto& g = groups_[it->second];
      if (r < 0) {
        g.everything.push_back(c);
        continue;
      }
      const Window range{-r, r};
      if (!cell.center.window().contains(range))
        throw WindowError("cover cell center does not carry its cylinder", r);
      g.index[detail::restriction_key(cell.center, range)].push_back(c);
    }
  }

  void cells_at(const Point& y, int k, CellIds& out) const {
    out.clear();
    if (system_.symbolic()) {
      for (const auto& g : groups_) {
        if (g.radius < 0) {
          out.insert(out.end(), g.everything.begin(), g.everything.end());
          continue;
        }
        const Window range{k - g.radius, k + g.radius};
        if (!y.window().contains(range)) throw WindowError("point window too small for the cover", g.radius + k);
        auto it = g.index.find(detail::restriction_key(y, range));
        if (it != g.index.end()) out.insert(out.end(), it->second.begin(), it->second.end());
      }
      std::sort(out.begin(), out.end());
      return;
    }
    const Point ty = system_.apply(y, k);
    for (std::uint32_t c = 0; c < cover_.cells.size(); ++c)
      if (system_.distance(ty, cover_.cells[c].center) < cover_.cells[c].radius) out.push_back(c);
  }

  void cells_at(const FinitePointSet& K, std::size_t p, int k, CellIds& out) const {
    if (!system_.symbolic()) {
      cells_at(K.at(p), k, out);
      return;
    }
    out.clear();
    for (const auto& g : groups_) {
      if (g.radius < 0) {
        out.insert(out.end(), g.everything.begin(), g.everything.end());
        continue;
      }
      const Window range{k - g.radius, k + g.radius};
      if (!K.window().contains(range)) throw WindowError("sample window too small for the cover", g.radius + k);
      auto it = g.index.find(detail::restriction_key(K, p, range));
      if (it != g.index.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
    std::sort(out.begin(), out.end());
  }

 private:
  struct Group {
    int radius;
    std::unordered_map<std::string, CellIds> index;
    CellIds everything;
  };
  const System& system_;
  const Cover& cover_;
  std::vector<Group> groups_;
};

// Every itinerary (i_0..i_{n-1}) with T^k y in U_{i_k}, via a callback.
template <class Cells, class Emit>
void for_each_itinerary(const Cells& cells_at, int n, std::uint64_t limit, Emit&& emit) {
  std::vector<CellIds> per_step(n);
  std::uint64_t total = 1;
  for (int k = 0; k < n; ++k) {
    cells_at(k, per_step[k]);
    if (per_step[k].empty()) throw Error("cover does not contain T^" + std::to_string(k) + " of a point");
    total *= per_step[k].size();
    if (total > limit) throw BudgetError("too many itineraries for one point");
  }
  std::vector<std::size_t> digit(n, 0);
  CellIds itinerary(n);
  for (;;) {
    for (int k = 0; k < n; ++k) itinerary[k] = per_step[k][digit[k]];
    emit(itinerary);
    int k = n - 1;
    while (k >= 0 && ++digit[k] == per_step[k].size()) digit[k--] = 0;
    if (k < 0) return;
  }
}

struct ItineraryHash {
  std::size_t operator()(const CellIds& v) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto x : v) h = (h ^ x) * 0x100000001b3ULL;
    return static_cast<std::size_t>(h);
  }
};

double pairwise_diameter(const System& system, const FinitePointSet& K,
                         const std::vector<std::size_t>& members) {
  double diam = 0.0;
  if (system.ultrametric()) {
    // d(y, z) <= max(d(y, y0), d(z, y0)) and the maximum is attained
    const Point y0 = K.at(members.front());
    for (auto p : members) diam = std::max(diam, system.distance(y0, K.at(p)));
    return diam;
  }
  std::vector<Point> pts;
  pts.reserve(members.size());
  for (auto p : members) pts.push_back(K.at(p));
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b) diam = std::max(diam, system.distance(pts[a], pts[b]));
  return diam;
}

// True when the common cell sets of all listed points intersect.
bool share_cell(const std::vector<CellIds>& cells_of, const std::vector<std::size_t>& members) {
  CellIds common = cells_of[members.front()];
  CellIds next;
  for (auto p : members) {
    next.clear();
    std::set_intersection(common.begin(), common.end(), cells_of[p].begin(), cells_of[p].end(),
                          std::back_inserter(next));
    common.swap(next);
    if (common.empty()) return false;
  }
  return true;
}

}  // namespace

CoverGeometry cover_geometry(const System& system, const Cover& cover, const FinitePointSet& K) {
  if (cover.cells.empty()) throw std::invalid_argument("empty cover");
  const Membership membership(system, cover);
  const std::size_t N = K.size();
  std::vector<CellIds> cells_of(N);
  std::vector<std::vector<std::size_t>> members(cover.cells.size());
  for (std::size_t p = 0; p < N; ++p) {
    membership.cells_at(K, p, 0, cells_of[p]);
    if (cells_of[p].empty()) throw Error("cover does not contain every sample point");
    for (auto c : cells_of[p]) members[c].push_back(p);
  }

  CoverGeometry g;
  for (const auto& m : members)
    if (!m.empty()) g.diam = std::max(g.diam, pairwise_diameter(system, K, m));

  std::vector<Point> pts;
  if (!system.symbolic()) {
    pts.reserve(N);
    for (std::size_t p = 0; p < N; ++p) pts.push_back(K.at(p));
  }
  for (int j = 0; j < 64; ++j) {
    const double delta = std::ldexp(1.0, -j);
    bool fits = true;
    if (system.symbolic()) {
      const int r = system.open_ball_radius(delta);
      const Window range = r < 0 ? Window{0, -1} : Window::intersect({-r, r}, K.window());
      const auto grouping = detail::group_by_restriction(K, range);
      for (const auto& grp : grouping.groups)
        if (!share_cell(cells_of, grp)) {
          fits = false;
          break;
        }
    } else {
      std::vector<std::size_t> ball;
      for (std::size_t y = 0; y < N && fits; ++y) {
        ball.clear();
        for (std::size_t z = 0; z < N; ++z)
          if (system.distance(pts[y], pts[z]) < delta) ball.push_back(z);
        fits = share_cell(cells_of, ball);
      }
    }
    if (fits) {
      g.leb_lower = delta;
      break;
    }
  }
  return g;
}

Cover spanning_cover(const System& system, const FinitePointSet& K, double eps,
                     const SolverBudget& budget) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  std::vector<std::size_t> centers;
  if (system.symbolic()) {
    // closed eps/4 balls are cylinders; one center per class
    const int r = system.closed_ball_radius(eps / 4.0);
    const Window range = detail::bowen_range(r, 1);
    detail::require_window(K, range, "spanning cover");
    for (const auto& grp : detail::group_by_restriction(K, range).groups) centers.push_back(grp.front());
  } else {
    const std::size_t N = K.size();
    if (N > budget.max_points) throw BudgetError("sample too large for a generic spanning cover");
    std::vector<Point> pts;
    for (std::size_t p = 0; p < N; ++p) pts.push_back(K.at(p));
    std::vector<solvers::Bitset> sets(N, solvers::Bitset(N));
    for (std::size_t a = 0; a < N; ++a)
      for (std::size_t b = 0; b < N; ++b)
        if (system.distance(pts[a], pts[b]) <= eps / 4.0) sets[a].set(b);
    centers = solvers::greedy_set_cover(sets, N).chosen;
    std::sort(centers.begin(), centers.end());
  }

  Cover cover;
  cover.construction = "spanning";
  for (auto c : centers) cover.cells.push_back({K.at(c), eps / 2.0});
  cover.measured = cover_geometry(system, cover, K);
  return cover;
}

Cover cylinder_cover(const System& system, const FinitePointSet& K, int generation) {
  if (!system.symbolic()) throw std::invalid_argument("cylinder covers need a symbolic system");
  if (generation < 1) throw std::invalid_argument("generation must be at least 1");
  const Window range{-(generation - 1), generation - 1};
  detail::require_window(K, range, "cylinder cover");
  Cover cover;
  cover.construction = "cylinder";
  const double radius = std::ldexp(1.0, -(generation - 1));
  for (const auto& grp : detail::group_by_restriction(K, range).groups) {
    const Point p = K.at(grp.front());
    Point center{range.lo, {}};
    for (int i = range.lo; i <= range.hi; ++i) center.coords.push_back(p.at(i));
    cover.cells.push_back({std::move(center), radius});
  }
  return cover;
}

JoinedCover join_cover(const System& system, const Cover& cover, const FinitePointSet& K, int n,
                       const JoinBudget& budget) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  const Membership membership(system, cover);
  JoinedCover joined;
  joined.base = cover;
  joined.n = n;
  joined.disjoint = true;
  std::unordered_map<CellIds, std::uint32_t, ItineraryHash> index;
  joined.offsets.push_back(0);
  for (std::size_t p = 0; p < K.size(); ++p) {
    std::uint64_t realized = 0;
    auto cells_at = [&](int k, CellIds& out) { membership.cells_at(K, p, k, out); };
    for_each_itinerary(cells_at, n, budget.max_itineraries_per_point, [&](const CellIds& it) {
      auto [pos, inserted] = index.try_emplace(it, static_cast<std::uint32_t>(joined.itineraries.size()));
      if (inserted) joined.itineraries.push_back(it);
      joined.ids.push_back(pos->second);
      ++realized;
    });
    if (realized != 1) joined.disjoint = false;
    joined.offsets.push_back(joined.ids.size());
  }
  return joined;
}

CountResult minimal_subcover_count(const JoinedCover& joined, const FinitePointSet& K,
                                   SolveMode mode, const SolverBudget& budget) {
  const double eps = joined.base.measured ? joined.base.measured->diam : 0.0;
  if (joined.disjoint) {
    // each point lies in one cell, so every realized cell is needed
    return mode == SolveMode::exact
               ? count_result(joined.size(), Bound::exact, CountMethod::closed_form, joined.n, eps)
               : count_result(joined.size(), Bound::upper_bound, CountMethod::greedy, joined.n, eps);
  }
  const std::size_t N = K.size();
  if (N > budget.max_points) throw BudgetError("sample too large for a subcover search");
  std::vector<solvers::Bitset> sets(joined.size(), solvers::Bitset(N));
  for (std::size_t p = 0; p < N; ++p)
    for (auto i = joined.offsets[p]; i < joined.offsets[p + 1]; ++i) sets[joined.ids[i]].set(p);
  if (mode == SolveMode::greedy) {
    auto sol = solvers::greedy_set_cover(sets, N);
    return count_result(sol.value, Bound::upper_bound, CountMethod::greedy, joined.n, eps);
  }
  auto sol = solvers::min_set_cover(sets, N, {budget.nodes});
  if (!sol) throw Error("joined cover does not cover the sample");
  if (!sol->optimal) throw BudgetError("subcover branch and bound exhausted the node budget; use greedy mode");
  auto res = count_result(sol->value, Bound::exact, CountMethod::branch_and_bound, joined.n, eps);
  res.nodes = sol->nodes;
  return res;
}

CountResult shapira_count(const System& system, const JoinedCover& joined,
                          const FinitePointSet& K, const Measure& mu, double delta,
                          SolveMode mode, const ShapiraOptions& options) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  const int n = joined.n;
  const double eps = joined.base.measured ? joined.base.measured->diam : 0.0;
  const auto rule = solvers::MassRule::at_least;

  const bool exact_atoms = system.symbolic() && mu.exact_cylinders() &&
                           K.exactness() == Exactness::exact_enumeration;
  if (exact_atoms) {
    const auto atom_mass = mu.cylinder_masses(K);
    if (joined.disjoint) {
      std::vector<double> cell_mass(joined.size(), 0.0);
      for (std::size_t p = 0; p < K.size(); ++p) cell_mass[joined.ids[joined.offsets[p]]] += atom_mass[p];
      const auto count = solvers::partition_mass_cover(cell_mass, delta, rule);
      if (!count) {
        double total = 0.0;
        for (double m : cell_mass) total += m;
        throw UnreachableError("cover cells cannot reach delta", total);
      }
      return mode == SolveMode::exact
                 ? count_result(*count, Bound::exact, CountMethod::closed_form, n, eps)
                 : count_result(*count, Bound::upper_bound, CountMethod::greedy, n, eps);
    }
    if (K.size() > options.budget.max_points) throw BudgetError("sample too large for a Shapira search");
    std::vector<solvers::Bitset> sets(joined.size(), solvers::Bitset(K.size()));
    for (std::size_t p = 0; p < K.size(); ++p)
      for (auto i = joined.offsets[p]; i < joined.offsets[p + 1]; ++i) sets[joined.ids[i]].set(p);
    auto sol = mode == SolveMode::greedy
                   ? solvers::greedy_mass_cover(sets, atom_mass, delta, rule)
                   : solvers::min_mass_cover(sets, atom_mass, delta, rule, {options.budget.nodes});
    if (!sol) throw UnreachableError("cover cells cannot reach delta", 0.0);
    if (mode == SolveMode::greedy)
      return count_result(sol->value, Bound::upper_bound, CountMethod::greedy, n, eps);
    if (!sol->optimal) throw BudgetError("Shapira branch and bound exhausted the node budget; use greedy mode");
    auto res = count_result(sol->value, Bound::exact, CountMethod::branch_and_bound, n, eps);
    res.nodes = sol->nodes;
    return res;
  }

  if (options.samples == 0) throw BudgetError("Shapira count needs sample atoms");
  const Window window = system.shift() ? K.window() : Window{0, 0};
  const auto atoms = mu.sample(child_seed(options.seed, 3), options.samples, window);
  std::unordered_map<CellIds, std::uint32_t, ItineraryHash> index;
  for (std::uint32_t i = 0; i < joined.size(); ++i) index.emplace(joined.itineraries[i], i);
  const Membership membership(system, joined.base);
  std::vector<solvers::Bitset> sets(joined.size(), solvers::Bitset(atoms.size()));
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    auto cells_at = [&](int k, CellIds& out) { membership.cells_at(atoms[a], k, out); };
    try {
      for_each_itinerary(cells_at, n, std::uint64_t{1} << 16, [&](const CellIds& it) {
        auto pos = index.find(it);
        if (pos != index.end()) sets[pos->second].set(a);
      });
    } catch (const BudgetError&) {
      throw;
    } catch (const Error&) {
      // atom outside the cover: carries mass no cell can claim
    }
  }
  const std::vector<double> mass(atoms.size(), 1.0 / static_cast<double>(atoms.size()));
  auto sol = mode == SolveMode::greedy
                 ? solvers::greedy_mass_cover(sets, mass, delta, rule)
                 : solvers::min_mass_cover(sets, mass, delta, rule, {options.budget.nodes});
  if (!sol) {
    solvers::Bitset all(atoms.size());
    for (const auto& s : sets) all |= s;
    throw UnreachableError("cover cells cannot reach delta",
                           static_cast<double>(all.count()) / static_cast<double>(atoms.size()));
  }
  if (mode == SolveMode::exact && !sol->optimal)
    throw BudgetError("Shapira branch and bound exhausted the node budget; use greedy mode");
  auto res = count_result(sol->value, Bound::upper_bound,
                          mode == SolveMode::greedy ? CountMethod::greedy : CountMethod::branch_and_bound,
                          n, eps);
  res.nodes = sol->nodes;
  return res;
}

double log_itinerary_mass(const System& system, const Cover& cover, const Measure& mu,
                          const Point& x, int n) {
  if (!system.symbolic()) throw std::invalid_argument("itinerary masses need a symbolic system");
  if (cover.cells.empty()) throw std::invalid_argument("empty cover");
  const int r = system.open_ball_radius(cover.cells.front().radius);
  for (const auto& c : cover.cells)
    if (system.open_ball_radius(c.radius) != r)
      throw std::invalid_argument("itinerary masses need cells of one radius");
  const Membership membership(system, cover);
  CellIds cells;
  for (int k = 0; k < n; ++k) {
    membership.cells_at(x, k, cells);
    if (cells.empty()) throw Error("cover does not contain T^" + std::to_string(k) + " x");
  }
  // cylinders of one radius are disjoint: U^n_x is the cylinder of x
  return mu.log_cylinder_mass(x, detail::bowen_range(r, n));
}

}  // namespace mdim
