#include "mdim/bowen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <sstream>

#include "mdim/detail/cylinders.hpp"
#include "mdim/solvers.hpp"

namespace mdim {

const char* to_string(Bound b) {
  switch (b) {
    case Bound::exact: return "exact";
    case Bound::lower_bound: return "lower_bound";
    case Bound::upper_bound: return "upper_bound";
  }
  return "?";
}

const char* to_string(CountMethod m) {
  switch (m) {
    case CountMethod::closed_form: return "closed_form";
    case CountMethod::branch_and_bound: return "branch_and_bound";
    case CountMethod::greedy: return "greedy";
  }
  return "?";
}

const char* to_string(SolveMode m) { return m == SolveMode::greedy ? "greedy" : "exact"; }

SolveMode solve_mode_from_string(const std::string& s) {
  if (s == "greedy") return SolveMode::greedy;
  if (s == "exact") return SolveMode::exact;
  throw std::invalid_argument("unknown solve mode '" + s + "'");
}

namespace {

void require_survival(const System& system, const Point& p, int n) {
  if (!system.shift()) return;
  const Window w = p.window();
  if (!w.contains(Window{0, n - 1})) {
    std::ostringstream os;
    os << "point window [" << w.lo << ", " << w.hi << "] cannot survive " << n - 1
       << " shifts; need coordinates 0.." << n - 1;
    throw WindowError(os.str(), n - 1);
  }
}

// d_n(x, y), stopping at the first term above cap.
double bowen_distance_capped(const System& system, const Point& x, const Point& y, int n,
                             double cap) {
  double d = 0.0;
  for (int k = 0; k < n; ++k) {
    d = std::max(d, system.distance(x, y, k));
    if (d > cap) break;
  }
  return d;
}

CountResult make_result(std::uint64_t value, Bound bound, CountMethod method, int n, double eps) {
  CountResult r;
  r.value = value;
  r.bound = bound;
  r.method = method;
  r.n = n;
  r.epsilon = eps;
  return r;
}

void check_args(const FinitePointSet& K, int n, double eps) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (K.log_size() < 0.0) throw std::invalid_argument("point set is empty");
}

// Coordinates a shift system must carry for d_n to be decided at eps.
void require_sample_window(const System& system, const FinitePointSet& K, int n, double eps) {
  if (!system.shift()) return;
  detail::require_window(K, {0, n - 1}, "Bowen distance");
  if (system.symbolic())
    detail::require_window(K, detail::bowen_range(system.closed_ball_radius(eps), n),
                           "Bowen distance");
}

bool trivially_one(const System& system, const FinitePointSet& K, double eps) {
  return eps >= system.diameter() || K.log_size() == 0.0;
}

// ---- circle_doubling on the dyadic grid i/m -------------------------------

struct CircleGrid {
  std::uint64_t m = 0;
  std::uint64_t t = 0;  // conflict iff cyclic index distance <= t
};

std::optional<CircleGrid> circle_grid(const System& system, const FinitePointSet& K, int n,
                                      double eps) {
  if (system.kind() != SystemKind::circle_doubling) return std::nullopt;
  if (!K.is_product() || K.filtered() || K.window() != Window{0, 0}) return std::nullopt;
  const auto& axis = K.axis(0);
  const std::uint64_t m = axis.size();
  if (!std::has_single_bit(m)) return std::nullopt;
  for (std::uint64_t i = 0; i < m; ++i)
    if (axis[i] != static_cast<double>(i) / static_cast<double>(m)) return std::nullopt;
  // Below these thresholds 2^k |delta| never wraps past 1/2 before exceeding eps.
  if (eps >= (n == 1 ? 0.5 : 0.25)) return std::nullopt;
  if (n > 62) return std::nullopt;
  const double scaled = std::ldexp(eps * static_cast<double>(m), -(n - 1));
  return CircleGrid{m, static_cast<std::uint64_t>(std::floor(scaled))};
}

// ---- interval_shift product grids ----------------------------------------

// First-fit subset of sorted values with consecutive gaps > gap.
std::uint64_t spaced_subset_size(std::vector<double> values, double gap) {
  std::sort(values.begin(), values.end());
  std::uint64_t count = 1;
  double last = values.front();
  for (double v : values)
    if (v - last > gap) {
      ++count;
      last = v;
    }
  return count;
}

CountResult interval_sublattice(const FinitePointSet& K, int n, double eps) {
  detail::require_window(K, {0, n - 1}, "Bowen distance");
  std::uint64_t value = 1;
  bool whole = true;
  for (int c = K.window().lo; c <= K.window().hi; ++c) {
    const auto& axis = K.axis(c);
    if (c < 0 || c > n - 1) {
      whole = whole && axis.size() == 1;
      continue;
    }
    const std::uint64_t v = spaced_subset_size(axis, eps + kGuardBand);
    whole = whole && v == axis.size();
    if (value > (std::uint64_t{1} << 62) / v) throw BudgetError("separated lattice count overflows 2^62");
    value *= v;
  }
  // Distinct lattice points differ by > eps at some coordinate c in [0, n-1],
  // and the c-th shift puts that coordinate at weight 1.
  return make_result(value, whole ? Bound::exact : Bound::lower_bound, CountMethod::closed_form,
                     n, eps);
}

// ---- explicit conflict graphs --------------------------------------------

struct Relation {
  solvers::Graph within;  // d_n <= eps (as decided for the requested count)
  bool ambiguous = false;
};

std::vector<Point> materialize(const FinitePointSet& K) {
  std::vector<Point> pts;
  pts.reserve(K.size());
  for (std::size_t i = 0; i < K.size(); ++i) pts.push_back(K.at(i));
  return pts;
}

// Pairs within the guard band of eps are put on the conservative side:
// inside for separation (conflict), outside for covering.
enum class Side { separated, spanning };

bool decide_within(const System& system, const Point& x, const Point& y, int n, double eps,
                   Side side, bool& ambiguous) {
  if (system.exact_distances()) return bowen_distance_capped(system, x, y, n, eps) <= eps;
  const double d = bowen_distance_capped(system, x, y, n, eps + kGuardBand);
  if (std::abs(d - eps) <= kGuardBand) {
    ambiguous = true;
    return side == Side::separated;
  }
  return d <= eps;
}

Relation build_relation(const System& system, const std::vector<Point>& pts, int n, double eps,
                        Side side) {
  Relation rel{solvers::Graph(pts.size())};
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if (decide_within(system, pts[i], pts[j], n, eps, side, rel.ambiguous)) rel.within.add_edge(i, j);
  return rel;
}

void require_graph_budget(const FinitePointSet& K, const SolverBudget& budget, const char* what) {
  if (!K.indexable() || K.size() > budget.max_points) {
    std::ostringstream os;
    os << what << " on " << (K.indexable() ? std::to_string(K.size()) : std::string("too many"))
       << " points exceeds the graph budget of " << budget.max_points << " points";
    throw BudgetError(os.str());
  }
}

[[noreturn]] void node_budget_exhausted(const char* what, std::uint64_t nodes) {
  std::ostringstream os;
  os << what << " exhausted the node budget (" << nodes << " nodes); use greedy mode";
  throw BudgetError(os.str());
}

}  // namespace

double bowen_distance(const System& system, const Point& x, const Point& y, int n) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  require_survival(system, x, n);
  require_survival(system, y, n);
  return bowen_distance_capped(system, x, y, n, INFINITY);
}

CountResult separated_count_search(const System& system, const FinitePointSet& K, int n,
                                   double eps, SolveMode mode, const SolverBudget& budget) {
  check_args(K, n, eps);
  require_sample_window(system, K, n, eps);
  if (mode == SolveMode::greedy) {
    // First-fit against the chosen points only; no graph needed.
    constexpr std::size_t kFirstFitLimit = std::size_t{1} << 20;
    if (!K.indexable() || K.size() > kFirstFitLimit)
      throw BudgetError("greedy separated count needs at most 2^20 sample points");
    std::vector<Point> chosen;
    bool ambiguous = false;
    for (std::size_t i = 0; i < K.size(); ++i) {
      const Point p = K.at(i);
      const bool clash = std::any_of(chosen.begin(), chosen.end(), [&](const Point& q) {
        return decide_within(system, p, q, n, eps, Side::separated, ambiguous);
      });
      if (!clash) chosen.push_back(p);
    }
    return make_result(chosen.size(), Bound::lower_bound, CountMethod::greedy, n, eps);
  }
  require_graph_budget(K, budget, "exact separated count");
  const auto rel = build_relation(system, materialize(K), n, eps, Side::separated);
  const auto sol = solvers::max_independent_set(rel.within, {budget.nodes});
  if (!sol.optimal) node_budget_exhausted("maximum independent set", sol.nodes);
  auto r = make_result(sol.value, rel.ambiguous ? Bound::lower_bound : Bound::exact,
                       CountMethod::branch_and_bound, n, eps);
  r.nodes = sol.nodes;
  return r;
}

CountResult spanning_count_search(const System& system, const FinitePointSet& K, int n,
                                  double eps, SolveMode mode, const SolverBudget& budget) {
  check_args(K, n, eps);
  require_sample_window(system, K, n, eps);
  require_graph_budget(K, budget, "spanning count");
  const auto rel = build_relation(system, materialize(K), n, eps, Side::spanning);
  const std::size_t N = rel.within.size();
  std::vector<solvers::Bitset> balls = rel.within.adj;
  for (std::size_t i = 0; i < N; ++i) balls[i].set(i);
  if (mode == SolveMode::greedy) {
    const auto sol = solvers::greedy_set_cover(balls, N);
    return make_result(sol.value, Bound::upper_bound, CountMethod::greedy, n, eps);
  }
  const auto sol = solvers::min_set_cover(balls, N, {budget.nodes});
  if (!sol) throw std::logic_error("balls around every point cannot fail to cover");
  if (!sol->optimal) node_budget_exhausted("minimum dominating set", sol->nodes);
  auto r = make_result(sol->value, rel.ambiguous ? Bound::upper_bound : Bound::exact,
                       CountMethod::branch_and_bound, n, eps);
  r.nodes = sol->nodes;
  return r;
}

CountResult separated_count(const System& system, const FinitePointSet& K, int n, double eps,
                            SolveMode mode, const SolverBudget& budget) {
  check_args(K, n, eps);
  if (trivially_one(system, K, eps)) return make_result(1, Bound::exact, CountMethod::closed_form, n, eps);
  if (system.symbolic()) {
    require_sample_window(system, K, n, eps);
    // d_n <= eps is "agree on [-r, n-1+r]", an equivalence; first-fit keeps one
    // point per class, so greedy and exact coincide.
    const auto classes =
        detail::count_restrictions(K, detail::bowen_range(system.closed_ball_radius(eps), n));
    return mode == SolveMode::exact
               ? make_result(classes, Bound::exact, CountMethod::closed_form, n, eps)
               : make_result(classes, Bound::lower_bound, CountMethod::greedy, n, eps);
  }
  if (auto grid = circle_grid(system, K, n, eps)) {
    const auto [m, t] = *grid;
    if (2 * t + 1 >= m) return make_result(1, Bound::exact, CountMethod::closed_form, n, eps);
    if (mode == SolveMode::exact)
      return make_result(m / (t + 1), Bound::exact, CountMethod::closed_form, n, eps);
    // first-fit takes 0, t+1, 2(t+1), ... while clear of 0 cyclically
    return make_result((m - t - 1) / (t + 1) + 1, Bound::lower_bound, CountMethod::greedy, n, eps);
  }
  if (system.kind() == SystemKind::interval_shift && K.is_product() && !K.filtered() &&
      (!K.indexable() || K.size() > budget.max_points))
    return interval_sublattice(K, n, eps);
  return separated_count_search(system, K, n, eps, mode, budget);
}

CountResult spanning_count(const System& system, const FinitePointSet& K, int n, double eps,
                           SolveMode mode, const SolverBudget& budget) {
  check_args(K, n, eps);
  if (trivially_one(system, K, eps)) return make_result(1, Bound::exact, CountMethod::closed_form, n, eps);
  if (system.symbolic()) {
    require_sample_window(system, K, n, eps);
    // closed d_n-balls are the classes themselves
    const auto classes =
        detail::count_restrictions(K, detail::bowen_range(system.closed_ball_radius(eps), n));
    return mode == SolveMode::exact
               ? make_result(classes, Bound::exact, CountMethod::closed_form, n, eps)
               : make_result(classes, Bound::upper_bound, CountMethod::greedy, n, eps);
  }
  if (auto grid = circle_grid(system, K, n, eps)) {
    const auto [m, t] = *grid;
    // greedy mode also returns the closed form, which is exact
    if (2 * t + 1 >= m) return make_result(1, Bound::exact, CountMethod::closed_form, n, eps);
    return make_result((m + 2 * t) / (2 * t + 1), Bound::exact, CountMethod::closed_form, n, eps);
  }
  return spanning_count_search(system, K, n, eps, mode, budget);
}

}  // namespace mdim
