#include "mdim/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mdim/random.hpp"

namespace mdim {

const char* to_string(RateMode m) { return m == RateMode::upper ? "upper" : "lower"; }

RateMode rate_mode_from_string(const std::string& s) {
  if (s == "upper") return RateMode::upper;
  if (s == "lower") return RateMode::lower;
  throw std::invalid_argument("unknown rate mode '" + s + "'");
}

const char* to_string(RateStatistic s) { return s == RateStatistic::tail ? "tail" : "increment"; }

RateStatistic rate_statistic_from_string(const std::string& s) {
  if (s == "tail") return RateStatistic::tail;
  if (s == "increment") return RateStatistic::increment;
  throw std::invalid_argument("unknown rate statistic '" + s + "'");
}

const char* to_string(CountKind k) { return k == CountKind::separated ? "separated" : "spanning"; }

double RateEstimate::slope_gap() const { return std::abs(value - slope_fit.slope); }

namespace {

SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  SlopeFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / m);
  return f;
}

// Statistic over the last `tail` entries of a log series.
double statistic(const std::vector<LogCount>& c, std::size_t tail, RateMode mode, RateStatistic stat,
                 double LogCount::*field) {
  const bool upper = mode == RateMode::upper;
  double best = upper ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  auto take = [&](double v) { best = upper ? std::max(best, v) : std::min(best, v); };
  const std::size_t first = c.size() - tail;
  if (stat == RateStatistic::tail) {
    for (std::size_t j = first; j < c.size(); ++j) take(c[j].*field / c[j].n);
  } else {
    for (std::size_t j = std::max<std::size_t>(first, 1); j < c.size(); ++j)
      take((c[j].*field - c[j - 1].*field) / (c[j].n - c[j - 1].n));
  }
  return best;
}

Bound combine(const std::vector<LogCount>& c) {
  bool lower = false, upper = false;
  for (const auto& e : c) {
    lower = lower || e.bound == Bound::lower_bound;
    upper = upper || e.bound == Bound::upper_bound;
  }
  if (lower && upper) throw std::invalid_argument("ladder mixes lower and upper bounds");
  return lower ? Bound::lower_bound : upper ? Bound::upper_bound : Bound::exact;
}

LogCount log_count(const CountResult& r) {
  LogCount c;
  c.n = r.n;
  c.log_value = c.log_lower = c.log_upper = std::log(static_cast<double>(r.value));
  c.bound = r.bound;
  c.raw = r.value;
  return c;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

// Linear-interpolated quantile of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void summarize(LocalEntropyEstimate& est, double threshold) {
  if (est.per_point.empty()) throw std::invalid_argument("no point produced a rate");
  std::vector<double> v, lo, hi;
  for (const auto& [p, r] : est.per_point) {
    v.push_back(r.value);
    lo.push_back(r.value_lower);
    hi.push_back(r.value_upper);
  }
  est.center = median(v);
  est.center_lower = median(lo);
  est.center_upper = median(hi);
  std::sort(v.begin(), v.end());
  est.spread = quantile(v, 0.75) - quantile(v, 0.25);
  est.spread_flagged = est.spread > threshold;
}

CountResult bowen_count(const System& system, const FinitePointSet& K, int n, double eps, CountKind kind,
                        SolveMode mode, const SolverBudget& budget) {
  auto run = [&](SolveMode m) {
    return kind == CountKind::separated ? separated_count(system, K, n, eps, m, budget)
                                        : spanning_count(system, K, n, eps, m, budget);
  };
  if (mode == SolveMode::greedy) return run(SolveMode::greedy);
  try {
    return run(SolveMode::exact);
  } catch (const BudgetError&) {
    return run(SolveMode::greedy);
  }
}

void require_ladder(const std::vector<int>& n_ladder) {
  if (n_ladder.size() < 3) throw std::invalid_argument("n ladder needs at least 3 entries");
  for (std::size_t i = 0; i < n_ladder.size(); ++i)
    if (n_ladder[i] < 1 || (i > 0 && n_ladder[i] <= n_ladder[i - 1]))
      throw std::invalid_argument("n ladder must be positive and increasing");
}

// Grid spacing of a sample, or 0 when it has none.
double sample_spacing(const System& system, const FinitePointSet& K) {
  if (system.symbolic() || K.exactness() != Exactness::grid_sample) return 0.0;
  if (system.kind() == SystemKind::interval_shift && K.is_product()) {
    const auto& a = K.axis(0);
    return a.size() > 1 ? 1.0 / static_cast<double>(a.size()) : 1.0;
  }
  return K.indexable() ? 1.0 / static_cast<double>(K.size()) : 0.0;
}

}  // namespace

RateEstimate rate_from_log_counts(std::vector<LogCount> counts, RateMode mode, const RateOptions& options) {
  if (counts.size() < 3) throw std::invalid_argument("rate extraction needs at least 3 counts");
  if (!(options.tail_fraction > 0.0 && options.tail_fraction <= 1.0))
    throw std::invalid_argument("tail fraction must lie in (0, 1]");
  std::sort(counts.begin(), counts.end(), [](const LogCount& a, const LogCount& b) { return a.n < b.n; });
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i].n < 1) throw std::invalid_argument("n must be at least 1");
    if (i > 0 && counts[i].n == counts[i - 1].n) throw std::invalid_argument("duplicate n in count ladder");
    if (!(counts[i].log_lower >= 0.0)) throw std::invalid_argument("counts must be at least 1");
  }
  const auto tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(options.tail_fraction * static_cast<double>(counts.size()))));

  RateEstimate r;
  r.mode = mode;
  r.statistic = options.statistic;
  r.bound = combine(counts);
  r.estimated = std::any_of(counts.begin(), counts.end(), [](const LogCount& c) { return c.estimated; });
  r.n_min = counts.front().n;
  r.n_max = counts.back().n;
  std::vector<double> x, y;
  for (const auto& c : counts) {
    x.push_back(c.n);
    y.push_back(c.log_value);
  }
  r.slope_fit = fit_line(x, y);
  r.tail_stat = statistic(counts, tail, mode, RateStatistic::tail, &LogCount::log_value);
  r.increment_stat = statistic(counts, tail, mode, RateStatistic::increment, &LogCount::log_value);
  r.value = options.statistic == RateStatistic::tail ? r.tail_stat : r.increment_stat;
  r.value_lower = statistic(counts, tail, mode, options.statistic, &LogCount::log_lower);
  r.value_upper = statistic(counts, tail, mode, options.statistic, &LogCount::log_upper);
  r.diagnostics = std::move(counts);
  return r;
}

RateEstimate rate_from_counts(const std::vector<std::pair<int, double>>& counts, RateMode mode,
                              const RateOptions& options) {
  std::vector<LogCount> logs;
  for (const auto& [n, v] : counts) {
    if (!(v >= 1.0)) throw std::invalid_argument("counts must be at least 1");
    LogCount c;
    c.n = n;
    c.log_value = c.log_lower = c.log_upper = std::log(v);
    c.raw = v < 1.8e19 && v == std::floor(v) ? static_cast<std::uint64_t>(v) : 0;
    logs.push_back(c);
  }
  return rate_from_log_counts(std::move(logs), mode, options);
}

RateEstimate growth_rate(const System& system, const FinitePointSet& K, double eps,
                         const std::vector<int>& n_ladder, CountKind kind, RateMode mode,
                         const GrowthOptions& options) {
  require_ladder(n_ladder);
  std::vector<LogCount> counts;
  for (int n : n_ladder) counts.push_back(log_count(bowen_count(system, K, n, eps, kind, options.mode, options.budget)));
  return rate_from_log_counts(std::move(counts), mode, options.rate);
}

MdimEstimate mdim_estimate(const System& system, const FinitePointSet& K,
                           const std::vector<double>& eps_ladder, const std::vector<int>& n_ladder,
                           RateMode mode, const GrowthOptions& options) {
  MdimEstimate est;
  est.mode = mode;
  const double spacing = sample_spacing(system, K);
  for (double eps : eps_ladder) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (spacing > 0.0 && spacing >= eps) {
      std::ostringstream os;
      os << "eps = " << eps << " dropped: sample spacing " << spacing << " is not finer";
      est.warnings.push_back(os.str());
      continue;
    }
    est.per_eps.emplace_back(eps, growth_rate(system, K, eps, n_ladder, CountKind::separated, mode, options));
  }
  if (est.per_eps.size() >= 3) {
    std::vector<double> x, y;
    for (const auto& [eps, r] : est.per_eps) {
      x.push_back(std::log(1.0 / eps));
      y.push_back(r.value);
    }
    est.slope = fit_line(x, y).slope;
    est.has_slope = true;
  }
  return est;
}

RateEstimate katok_entropy(const Measure& mu, const System& system, double eps, double delta,
                           const std::vector<int>& n_ladder, RateMode mode,
                           const KatokRateOptions& options) {
  require_ladder(n_ladder);
  std::vector<LogCount> counts;
  for (int n : n_ladder)
    counts.push_back(log_count(katok_count(mu, system, n, eps, delta, options.variant, options.mode, options.katok)));
  return rate_from_log_counts(std::move(counts), mode, options.rate);
}

LocalEntropyEstimate brin_katok_at(const Measure& mu, const System& system, double eps,
                                   const std::vector<Point>& points, const std::vector<int>& n_ladder,
                                   RateMode mode, const BrinKatokOptions& options) {
  require_ladder(n_ladder);
  LocalEntropyEstimate est;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<LogCount> counts;
    for (int n : n_ladder) {
      MassOptions mo = options.mass;
      mo.seed = child_seed(options.mass.seed, i * 7919 + static_cast<std::uint64_t>(n));
      const auto m = ball_mass(mu, system, points[i], n, eps, mo);
      if (!(m.value > 0.0) && m.method == MassMethod::monte_carlo) {
        std::ostringstream os;
        os << "point " << i << ": zero Monte Carlo mass at n = " << n << ", dropped";
        est.warnings.push_back(os.str());
        continue;
      }
      LogCount c;
      c.n = n;
      c.log_value = -m.log_value;
      // a larger mass means a smaller -log mass
      c.log_lower = -m.log_upper;
      c.log_upper = -m.log_lower;
      c.estimated = m.method != MassMethod::exact;
      counts.push_back(c);
    }
    if (counts.size() < 3) {
      est.warnings.push_back("point " + std::to_string(i) + " dropped: fewer than 3 usable masses");
      continue;
    }
    est.per_point.emplace_back(points[i], rate_from_log_counts(std::move(counts), mode, options.rate));
  }
  summarize(est, options.spread_threshold);
  return est;
}

LocalEntropyEstimate brin_katok_entropy(const Measure& mu, const System& system, double eps,
                                        int points, const std::vector<int>& n_ladder,
                                        RateMode mode, const BrinKatokOptions& options) {
  require_ladder(n_ladder);
  if (points < 1) throw std::invalid_argument("need at least one point");
  Window window{0, 0};
  if (system.shift()) {
    int pad = system.spec().window;
    if (system.symbolic()) pad = std::max(pad, system.open_ball_radius(eps) + 1);
    if (mu.kind() == MeasureKind::product_lebesgue) pad = std::max(pad, box_window(eps));
    window = {-pad, n_ladder.back() - 1 + pad};
  }
  const auto xs = mu.sample(child_seed(options.seed, 11), static_cast<std::size_t>(points), window);
  auto est = brin_katok_at(mu, system, eps, xs, n_ladder, mode, options);
  if (points < 8) est.warnings.push_back("fewer than 8 points: spread diagnostic is unreliable");
  return est;
}

LocalEntropyEstimate cover_brin_katok_entropy(const Measure& mu, const System& system,
                                              const Cover& cover, const std::vector<Point>& points,
                                              const std::vector<int>& n_ladder, RateMode mode,
                                              const RateOptions& rate) {
  require_ladder(n_ladder);
  LocalEntropyEstimate est;
  for (const auto& x : points) {
    std::vector<LogCount> counts;
    for (int n : n_ladder) {
      LogCount c;
      c.n = n;
      c.log_value = c.log_lower = c.log_upper = -log_itinerary_mass(system, cover, mu, x, n);
      counts.push_back(c);
    }
    est.per_point.emplace_back(x, rate_from_log_counts(std::move(counts), mode, rate));
  }
  summarize(est, std::numeric_limits<double>::infinity());
  return est;
}

ShapiraEstimate shapira_entropy(const Measure& mu, const System& system, const Cover& cover,
                                const FinitePointSet& K, double delta,
                                const std::vector<int>& n_ladder, const ShapiraRateOptions& options) {
  require_ladder(n_ladder);
  std::vector<LogCount> counts;
  for (int n : n_ladder) {
    const auto joined = join_cover(system, cover, K, n, options.join);
    counts.push_back(log_count(shapira_count(system, joined, K, mu, delta, options.mode, options.shapira)));
  }
  ShapiraEstimate est;
  est.upper = rate_from_log_counts(counts, RateMode::upper, options.rate);
  est.lower = rate_from_log_counts(std::move(counts), RateMode::lower, options.rate);
  est.gap = est.upper.value - est.lower.value;
  return est;
}

NeighborhoodEntropy local_entropy_at(const System& system, const FinitePointSet& K,
                                     const Point& x, double eps,
                                     const std::vector<double>& radius_ladder,
                                     const std::vector<int>& n_ladder, CountKind kind,
                                     RateMode mode, const GrowthOptions& options) {
  NeighborhoodEntropy out;
  bool first = true;
  for (double rho : radius_ladder) {
    std::vector<std::size_t> inside;
    for (std::size_t p = 0; p < K.size(); ++p)
      if (system.distance(x, K.at(p)) <= rho) inside.push_back(p);
    if (inside.empty()) {
      std::ostringstream os;
      os << "rho = " << rho << " dropped: empty neighborhood";
      out.warnings.push_back(os.str());
      continue;
    }
    const auto nbhd = inside.size() == K.size() ? K : K.subset(inside);
    auto r = growth_rate(system, nbhd, eps, n_ladder, kind, mode, options);
    if (first || r.value < out.rate.value) {
      out.rate = r;
      out.radius = rho;
      first = false;
    }
    out.per_radius.emplace_back(rho, std::move(r));
  }
  if (first) throw std::invalid_argument("every neighborhood was empty");
  return out;
}

}  // namespace mdim
