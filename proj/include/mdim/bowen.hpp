#pragma once

#include <cstdint>
#include <string>

#include "mdim/systems.hpp"

namespace mdim {

enum class Bound { exact, lower_bound, upper_bound };
enum class CountMethod { closed_form, branch_and_bound, greedy };
enum class SolveMode { greedy, exact };

const char* to_string(Bound b);
const char* to_string(CountMethod m);
const char* to_string(SolveMode m);
SolveMode solve_mode_from_string(const std::string& s);

/// A count with the direction in which it is known to be correct.
struct CountResult {
  std::uint64_t value = 0;
  Bound bound = Bound::exact;
  CountMethod method = CountMethod::closed_form;
  int n = 1;
  double epsilon = 0.0;
  std::uint64_t nodes = 0;  // search nodes (branch and bound only)
};

struct SolverBudget {
  std::uint64_t nodes = 10'000'000;
  /// Largest point set turned into an explicit conflict graph.
  std::size_t max_points = 4096;
};

/// Guard band for comparisons against eps on inexact (floating) metrics.
inline constexpr double kGuardBand = 1e-12;

/// max over k in [0, n-1] of d(T^k x, T^k y).
double bowen_distance(const System& system, const Point& x, const Point& y, int n);

/// s_n(K, eps): largest subset with pairwise d_n > eps.
///
/// Closed forms: symbolic systems (cylinder word counts), circle_doubling on
/// the dyadic grid i/m (circulant graphs), interval_shift product grids (a
/// certified separated sub-lattice, lower_bound). Otherwise a conflict graph
/// is searched (exact) or scanned first-fit (greedy).
CountResult separated_count(const System& system, const FinitePointSet& K, int n, double eps,
                            SolveMode mode, const SolverBudget& budget = {});

/// r_n(K, eps): fewest centers in K with every point of K within d_n <= eps.
CountResult spanning_count(const System& system, const FinitePointSet& K, int n, double eps,
                           SolveMode mode, const SolverBudget& budget = {});

/// The same counts without closed-form shortcuts (graph search only); used to
/// cross-check the closed forms.
CountResult separated_count_search(const System& system, const FinitePointSet& K, int n,
                                   double eps, SolveMode mode, const SolverBudget& budget = {});
CountResult spanning_count_search(const System& system, const FinitePointSet& K, int n,
                                  double eps, SolveMode mode, const SolverBudget& budget = {});

}  // namespace mdim
