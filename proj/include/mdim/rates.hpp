#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mdim/bowen.hpp"
#include "mdim/covers.hpp"
#include "mdim/measures.hpp"
#include "mdim/systems.hpp"

namespace mdim {

enum class RateMode { upper, lower };
const char* to_string(RateMode m);
RateMode rate_mode_from_string(const std::string& s);

/// tail: max/min of (1/n) log c_n over the tail. increment: max/min over the
/// tail of the per-step growth (log c_n - log c_n') / (n - n'), which drops
/// additive constants in log c_n.
enum class RateStatistic { tail, increment };
const char* to_string(RateStatistic s);
RateStatistic rate_statistic_from_string(const std::string& s);

/// One rung of a count ladder in log form. Interval-valued entries (box
/// bounds) carry log_lower < log_upper; exact ones have all three equal.
struct LogCount {
  int n = 0;
  double log_value = 0.0;
  double log_lower = 0.0;
  double log_upper = 0.0;
  Bound bound = Bound::exact;
  std::uint64_t raw = 0;  // the count itself when it is an integer count
  bool estimated = false;  // Monte Carlo or box-bound value rather than an exact one
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square
};

struct RateEstimate {
  double value = 0.0;  // nats per step
  RateMode mode = RateMode::upper;
  RateStatistic statistic = RateStatistic::tail;
  Bound bound = Bound::exact;
  bool estimated = false;  // some rung was estimated
  int n_min = 0;
  int n_max = 0;
  SlopeFit slope_fit;  // log c_n against n
  double tail_stat = 0.0;
  double increment_stat = 0.0;
  double value_lower = 0.0;  // the statistic on log_lower / log_upper
  double value_upper = 0.0;
  std::vector<LogCount> diagnostics;

  double slope_gap() const;
};

struct RateOptions {
  double tail_fraction = 0.5;
  RateStatistic statistic = RateStatistic::tail;
};

/// Needs at least 3 entries with values >= 1.
RateEstimate rate_from_counts(const std::vector<std::pair<int, double>>& counts, RateMode mode,
                              const RateOptions& options = {});
RateEstimate rate_from_log_counts(std::vector<LogCount> counts, RateMode mode,
                                  const RateOptions& options = {});

enum class CountKind { separated, spanning };
const char* to_string(CountKind k);

struct GrowthOptions {
  SolveMode mode = SolveMode::exact;  // exact falls back to greedy when the budget runs out
  SolverBudget budget;
  RateOptions rate;
};

/// S(K, eps) (separated) or R(K, eps) (spanning) over an n-ladder.
RateEstimate growth_rate(const System& system, const FinitePointSet& K, double eps,
                         const std::vector<int>& n_ladder, CountKind kind, RateMode mode,
                         const GrowthOptions& options = {});

struct MdimEstimate {
  std::vector<std::pair<double, RateEstimate>> per_eps;
  double slope = 0.0;  // rate against log(1/eps); set when >= 3 eps values remain
  bool has_slope = false;
  RateMode mode = RateMode::upper;
  std::vector<std::string> warnings;
};

/// Grid samples too coarse for an eps (spacing >= eps) drop that eps with a warning.
MdimEstimate mdim_estimate(const System& system, const FinitePointSet& K,
                           const std::vector<double>& eps_ladder, const std::vector<int>& n_ladder,
                           RateMode mode, const GrowthOptions& options = {});

struct KatokRateOptions {
  SolveMode mode = SolveMode::exact;
  KatokOptions katok;
  KatokVariant variant = KatokVariant::ball;
  RateOptions rate;
};

RateEstimate katok_entropy(const Measure& mu, const System& system, double eps, double delta,
                           const std::vector<int>& n_ladder, RateMode mode,
                           const KatokRateOptions& options = {});

struct LocalEntropyEstimate {
  std::vector<std::pair<Point, RateEstimate>> per_point;
  double center = 0.0;  // median of per-point values
  double spread = 0.0;  // interquartile range
  double center_lower = 0.0;
  double center_upper = 0.0;
  bool spread_flagged = false;
  std::vector<std::string> warnings;
};

struct BrinKatokOptions {
  std::uint64_t seed = 1;
  MassOptions mass;
  RateOptions rate;
  double spread_threshold = 0.1;
};

/// Per mu-typical point, the rate of -log mu(B_n(x, eps)).
LocalEntropyEstimate brin_katok_entropy(const Measure& mu, const System& system, double eps,
                                        int points, const std::vector<int>& n_ladder,
                                        RateMode mode, const BrinKatokOptions& options = {});

/// Per point, the rate of -log mu(U^n_x) for a cylinder cover of one radius.
LocalEntropyEstimate cover_brin_katok_entropy(const Measure& mu, const System& system,
                                              const Cover& cover, const std::vector<Point>& points,
                                              const std::vector<int>& n_ladder, RateMode mode,
                                              const RateOptions& rate = {});

/// Same, at given points (exact or box paths where available).
LocalEntropyEstimate brin_katok_at(const Measure& mu, const System& system, double eps,
                                   const std::vector<Point>& points, const std::vector<int>& n_ladder,
                                   RateMode mode, const BrinKatokOptions& options = {});

struct ShapiraRateOptions {
  SolveMode mode = SolveMode::exact;
  ShapiraOptions shapira;
  JoinBudget join;
  RateOptions rate;
};

struct ShapiraEstimate {
  RateEstimate upper;
  RateEstimate lower;
  double gap = 0.0;  // upper - lower
};

ShapiraEstimate shapira_entropy(const Measure& mu, const System& system, const Cover& cover,
                                const FinitePointSet& K, double delta,
                                const std::vector<int>& n_ladder,
                                const ShapiraRateOptions& options = {});

struct NeighborhoodEntropy {
  RateEstimate rate;    // the smallest rate over the radius ladder
  double radius = 0.0;  // where it is attained
  std::vector<std::pair<double, RateEstimate>> per_radius;
  std::vector<std::string> warnings;
};

/// inf over closed neighborhoods B(x, rho) n K of S (separated, h_d) or R
/// (spanning, the tilde variant) at eps.
NeighborhoodEntropy local_entropy_at(const System& system, const FinitePointSet& K,
                                     const Point& x, double eps,
                                     const std::vector<double>& radius_ladder,
                                     const std::vector<int>& n_ladder, CountKind kind,
                                     RateMode mode, const GrowthOptions& options = {});

}  // namespace mdim
