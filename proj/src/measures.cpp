#include "mdim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "mdim/detail/cylinders.hpp"
#include "mdim/random.hpp"
#include "mdim/solvers.hpp"

namespace mdim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kCircleBits = 53;

void require_orbit_coords(int pad, Window range) {
  if (Window{-pad, pad}.contains(range)) return;
  std::ostringstream os;
  os << "orbit points carry coordinates [" << -pad << ", " << pad << "]; requested ["
     << range.lo << ", " << range.hi << "]";
  throw WindowError(os.str(), std::max(-range.lo, range.hi));
}

}  // namespace

const char* to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::bernoulli: return "bernoulli";
    case MeasureKind::product_lebesgue: return "product_lebesgue";
    case MeasureKind::empirical: return "empirical";
  }
  return "?";
}

MeasureKind measure_kind_from_string(const std::string& s) {
  if (s == "bernoulli") return MeasureKind::bernoulli;
  if (s == "product_lebesgue") return MeasureKind::product_lebesgue;
  if (s == "empirical") return MeasureKind::empirical;
  throw std::invalid_argument("unknown measure kind '" + s + "'");
}

const char* to_string(MassMethod m) {
  switch (m) {
    case MassMethod::exact: return "exact";
    case MassMethod::monte_carlo: return "monte_carlo";
    case MassMethod::box_bounds: return "box_bounds";
  }
  return "?";
}

const char* to_string(KatokVariant v) { return v == KatokVariant::ball ? "ball" : "diameter"; }

Measure::Measure(MeasureSpec spec, const System& system) : spec_(std::move(spec)), system_(system) {
  switch (spec_.kind) {
    case MeasureKind::bernoulli: {
      if (system.kind() != SystemKind::full_shift)
        throw std::invalid_argument("bernoulli measure needs a full_shift system");
      const int k = system.alphabet();
      if (spec_.weights.empty()) spec_.weights.assign(k, 1.0 / k);
      if (static_cast<int>(spec_.weights.size()) != k)
        throw std::invalid_argument("bernoulli needs one weight per symbol");
      double total = 0.0;
      for (double w : spec_.weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("bernoulli weights must be nonnegative");
        total += w;
      }
      if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("bernoulli weights must sum to 1");
      for (double w : spec_.weights) log_weights_.push_back(w > 0.0 ? std::log(w) : kNegInf);
      break;
    }
    case MeasureKind::product_lebesgue:
      if (system.kind() != SystemKind::interval_shift)
        throw std::invalid_argument("product_lebesgue measure needs an interval_shift system");
      break;
    case MeasureKind::empirical: {
      if (spec_.orbit_length < 1) throw std::invalid_argument("orbit length must be positive");
      if (spec_.orbit_pad < 0) throw std::invalid_argument("orbit pad must be nonnegative");
      Rng rng(child_seed(spec_.seed, 0));
      const std::uint64_t burn = spec_.orbit_length / 10;
      const std::uint64_t pad = static_cast<std::uint64_t>(spec_.orbit_pad);
      const std::uint64_t kept = system.shift() ? pad + spec_.orbit_length + pad
                                                : spec_.orbit_length + kCircleBits;
      if (system.symbolic()) {
        const int k = system.alphabet();
        const auto& forbidden = system.forbidden_words();
        std::vector<int> word;
        word.reserve(burn + kept);
        std::vector<int> allowed;
        while (word.size() < burn + kept) {
          allowed.clear();
          for (int s = 0; s < k; ++s) {
            word.push_back(s);
            bool ok = true;
            for (const auto& f : forbidden) {
              if (f.size() > word.size()) continue;
              ok = ok && !std::equal(f.begin(), f.end(), word.end() - static_cast<long>(f.size()));
            }
            word.pop_back();
            if (ok) allowed.push_back(s);
          }
          if (allowed.empty()) throw std::invalid_argument("shift space has a dead end; no infinite orbit");
          word.push_back(allowed[uniform_index(rng, allowed.size())]);
        }
        sequence_.assign(word.begin() + static_cast<long>(burn), word.end());
      } else if (system.kind() == SystemKind::interval_shift) {
        for (std::uint64_t i = 0; i < burn; ++i) rng();
        sequence_.resize(kept);
        for (auto& v : sequence_) v = uniform01(rng);
      } else {
        for (std::uint64_t i = 0; i < burn; ++i) rng();
        sequence_.resize(kept);
        for (auto& v : sequence_) v = static_cast<double>(rng() >> 63);
      }
      break;
    }
  }
}

bool Measure::exact_cylinders() const {
  return system_.symbolic() &&
         (spec_.kind == MeasureKind::bernoulli || spec_.kind == MeasureKind::empirical);
}

double Measure::log_cylinder_mass(const Point& x, Window range) const {
  if (range.empty()) return 0.0;
  if (!exact_cylinders()) throw std::logic_error("cylinder masses need a symbolic bernoulli or empirical measure");
  if (spec_.kind == MeasureKind::bernoulli) {
    double acc = 0.0;
    for (int c = range.lo; c <= range.hi; ++c) acc += log_weights_[static_cast<int>(x.at(c))];
    return acc;
  }
  std::vector<double> target(range.size());
  for (int c = range.lo; c <= range.hi; ++c) target[c - range.lo] = x.at(c);
  std::uint64_t hits = 0;
  require_orbit_coords(spec_.orbit_pad, range);
  for (std::uint64_t j = 0; j < spec_.orbit_length; ++j) {
    const double* base = sequence_.data() + spec_.orbit_pad + j + range.lo;
    if (std::equal(target.begin(), target.end(), base)) ++hits;
  }
  return hits == 0 ? kNegInf : std::log(static_cast<double>(hits) / static_cast<double>(spec_.orbit_length));
}

double Measure::cylinder_mass(const Point& x, Window range) const {
  if (spec_.kind == MeasureKind::bernoulli) {
    double acc = 1.0;
    for (int c = range.lo; c <= range.hi; ++c) acc *= spec_.weights[static_cast<int>(x.at(c))];
    return acc;
  }
  return std::exp(log_cylinder_mass(x, range));
}

std::vector<double> Measure::cylinder_masses(const FinitePointSet& K) const {
  if (!exact_cylinders()) throw std::logic_error("cylinder masses need a symbolic bernoulli or empirical measure");
  const Window w = K.window();
  std::vector<double> out(K.size());
  if (spec_.kind == MeasureKind::bernoulli) {
    for (std::size_t i = 0; i < K.size(); ++i) {
      double acc = 1.0;
      for (int c = w.lo; c <= w.hi; ++c) acc *= spec_.weights[static_cast<int>(K.coord(i, c))];
      out[i] = acc;
    }
    return out;
  }
  require_orbit_coords(spec_.orbit_pad, w);
  std::unordered_map<std::string, std::uint64_t> freq;
  for (std::uint64_t j = 0; j < spec_.orbit_length; ++j) ++freq[detail::restriction_key(orbit_point(j, w), w)];
  const double L = static_cast<double>(spec_.orbit_length);
  for (std::size_t i = 0; i < K.size(); ++i) {
    auto it = freq.find(detail::restriction_key(K, i, w));
    out[i] = it == freq.end() ? 0.0 : static_cast<double>(it->second) / L;
  }
  return out;
}

double Measure::log_box_mass(int, const std::vector<std::pair<double, double>>& sides) const {
  if (spec_.kind != MeasureKind::product_lebesgue) throw std::logic_error("box masses need product_lebesgue");
  double acc = 0.0;
  for (auto [a, b] : sides) {
    const double len = std::min(b, 1.0) - std::max(a, 0.0);
    if (len <= 0.0) return kNegInf;
    acc += std::log(len);
  }
  return acc;
}

Point Measure::orbit_point(std::uint64_t j, Window window) const {
  if (spec_.kind != MeasureKind::empirical) throw std::logic_error("orbit points need an empirical measure");
  if (j >= spec_.orbit_length) throw std::out_of_range("orbit index past the orbit length");
  if (!system_.shift()) {
    double x = 0.0;
    for (int b = kCircleBits - 1; b >= 0; --b) x = (x + sequence_[j + b]) * 0.5;
    return Point{0, {x}};
  }
  require_orbit_coords(spec_.orbit_pad, window);
  const double* base = sequence_.data() + spec_.orbit_pad + j;
  return Point{window.lo, std::vector<double>(base + window.lo, base + window.hi + 1)};
}

std::vector<Point> Measure::sample(std::uint64_t seed, std::size_t count, Window window) const {
  Rng rng(seed);
  std::vector<Point> out;
  out.reserve(count);
  const Window w = system_.shift() ? window : Window{0, 0};
  for (std::size_t s = 0; s < count; ++s) {
    switch (spec_.kind) {
      case MeasureKind::bernoulli: {
        Point p{w.lo, std::vector<double>(w.size())};
        for (auto& v : p.coords) {
          double u = uniform01(rng);
          int sym = 0;
          while (sym + 1 < static_cast<int>(spec_.weights.size()) && u >= spec_.weights[sym]) {
            u -= spec_.weights[sym];
            ++sym;
          }
          v = sym;
        }
        out.push_back(std::move(p));
        break;
      }
      case MeasureKind::product_lebesgue: {
        Point p{w.lo, std::vector<double>(w.size())};
        for (auto& v : p.coords) v = uniform01(rng);
        out.push_back(std::move(p));
        break;
      }
      case MeasureKind::empirical:
        out.push_back(orbit_point(uniform_index(rng, spec_.orbit_length), w));
        break;
    }
  }
  return out;
}

double Measure::shannon_entropy() const {
  if (spec_.kind != MeasureKind::bernoulli) throw std::logic_error("Shannon entropy needs bernoulli weights");
  double h = 0.0;
  for (double w : spec_.weights)
    if (w > 0.0) h -= w * std::log(w);
  return h;
}

Measure make_measure(const MeasureSpec& spec, const System& system) { return Measure(spec, system); }

int box_window(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  int l = 0;
  while (std::ldexp(eps, l) < 4.0) ++l;
  return l;
}

namespace {

MassEstimate exact_mass(double log_mass) {
  MassEstimate m;
  m.method = MassMethod::exact;
  m.log_value = m.log_lower = m.log_upper = log_mass;
  m.value = m.lower = m.upper = std::exp(log_mass);
  return m;
}

void require_orbit_window(const System& system, const Point& x, int n) {
  if (system.shift() && !x.window().contains(Window{0, n - 1})) {
    std::ostringstream os;
    os << "point cannot survive " << n - 1 << " shifts";
    throw WindowError(os.str(), n - 1);
  }
}

}  // namespace

MassEstimate ball_mass_monte_carlo(const Measure& mu, const System& system, const Point& x,
                                   int n, double eps, const MassOptions& options) {
  if (options.samples == 0) throw BudgetError("Monte Carlo ball mass needs at least one sample");
  require_orbit_window(system, x, n);
  const auto draws = mu.sample(options.seed, options.samples, x.window());
  std::uint64_t hits = 0;
  for (const auto& y : draws)
    if (bowen_distance(system, x, y, n) < eps) ++hits;
  const double M = static_cast<double>(options.samples);
  const double p = static_cast<double>(hits) / M;
  MassEstimate m;
  m.method = MassMethod::monte_carlo;
  m.samples = options.samples;
  m.seed = options.seed;
  m.value = p;
  m.std_error = std::sqrt(p * (1.0 - p) / M);
  m.lower = std::max(0.0, p - 3.0 * m.std_error);
  m.upper = std::min(1.0, p + 3.0 * m.std_error);
  m.log_value = hits ? std::log(p) : kNegInf;
  m.log_lower = m.lower > 0.0 ? std::log(m.lower) : kNegInf;
  m.log_upper = std::log(m.upper);
  return m;
}

MassEstimate ball_mass(const Measure& mu, const System& system, const Point& x, int n, double eps,
                       const MassOptions& options) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  require_orbit_window(system, x, n);
  if (eps > system.diameter()) return exact_mass(0.0);

  if (mu.exact_cylinders()) {
    // open d_n-balls of an ultrametric shift are cylinders on [-r, n-1+r]
    const auto range = detail::bowen_range(system.open_ball_radius(eps), n);
    auto m = exact_mass(mu.log_cylinder_mass(x, range));
    // direct products keep dyadic masses exact
    const double direct = mu.cylinder_mass(x, range);
    if (direct > 0.0) m.value = m.lower = m.upper = direct;
    return m;
  }

  if (mu.kind() == MeasureKind::product_lebesgue) {
    const int l = box_window(eps);
    const Window inner{-l, n - 1 + l};
    if (!x.window().contains(inner)) {
      std::ostringstream os;
      os << "box bounds at eps = " << eps << " need coordinates [" << inner.lo << ", " << inner.hi
         << "] (l = " << l << ")";
      throw WindowError(os.str(), n - 1 + l);
    }
    std::vector<std::pair<double, double>> I, J;
    for (int c = inner.lo; c <= inner.hi; ++c) I.emplace_back(x.at(c) - eps / 6.0, x.at(c) + eps / 6.0);
    for (int c = 0; c < n; ++c) J.emplace_back(x.at(c) - eps, x.at(c) + eps);
    MassEstimate m;
    m.method = MassMethod::box_bounds;
    m.log_lower = mu.log_box_mass(inner.lo, I);
    m.log_upper = mu.log_box_mass(0, J);
    m.log_value = 0.5 * (m.log_lower + m.log_upper);
    m.lower = std::exp(m.log_lower);
    m.upper = std::exp(m.log_upper);
    m.value = std::exp(m.log_value);
    return m;
  }

  if (mu.kind() == MeasureKind::empirical) {
    std::uint64_t hits = 0;
    const Window w = system.shift() ? Window::intersect(x.window(), {-mu.spec().orbit_pad, mu.spec().orbit_pad})
                                    : Window{0, 0};
    for (std::uint64_t j = 0; j < mu.orbit_length(); ++j)
      if (bowen_distance(system, x, mu.orbit_point(j, w), n) < eps) ++hits;
    return exact_mass(hits ? std::log(static_cast<double>(hits) / static_cast<double>(mu.orbit_length()))
                           : kNegInf);
  }

  return ball_mass_monte_carlo(mu, system, x, n, eps, options);
}

namespace {

using solvers::CellClass;

// Bernoulli cylinder classes on a range of length L: one class per symbol
// composition, with multinomial multiplicity.
std::vector<CellClass> bernoulli_classes(const std::vector<double>& weights, int L) {
  const int k = static_cast<int>(weights.size());
  std::vector<CellClass> out;
  std::vector<int> counts(k, 0);
  // binom[a][b] saturating at UINT64_MAX
  std::vector<std::vector<unsigned __int128>> binom(L + 1, std::vector<unsigned __int128>(L + 1, 0));
  const unsigned __int128 cap = UINT64_MAX;
  for (int a = 0; a <= L; ++a) {
    binom[a][0] = 1;
    for (int b = 1; b <= a; ++b) binom[a][b] = std::min(cap, binom[a - 1][b - 1] + binom[a - 1][b]);
  }
  auto rec = [&](auto&& self, int sym, int left) -> void {
    if (sym == k - 1) {
      counts[sym] = left;
      double mass = 1.0;
      unsigned __int128 mult = 1;
      int remaining = L;
      for (int s = 0; s < k; ++s) {
        if (counts[s] > 0 && weights[s] <= 0.0) return;
        for (int c = 0; c < counts[s]; ++c) mass *= weights[s];
        mult = std::min(cap, mult * binom[remaining][counts[s]]);
        remaining -= counts[s];
      }
      out.push_back({mass, static_cast<std::uint64_t>(mult)});
      return;
    }
    for (int c = 0; c <= left; ++c) {
      counts[sym] = c;
      self(self, sym + 1, left - c);
    }
  };
  rec(rec, 0, L);
  return out;
}

std::vector<CellClass> empirical_classes(const Measure& mu, Window range) {
  std::map<std::vector<double>, std::uint64_t> freq;
  require_orbit_coords(mu.spec().orbit_pad, range);
  for (std::uint64_t j = 0; j < mu.orbit_length(); ++j) ++freq[mu.orbit_point(j, range).coords];
  std::vector<CellClass> out;
  const double L = static_cast<double>(mu.orbit_length());
  for (const auto& [word, hits] : freq) out.push_back({static_cast<double>(hits) / L, 1});
  return out;
}

CountResult count_result(std::uint64_t value, Bound bound, CountMethod method, int n, double eps) {
  CountResult r;
  r.value = value;
  r.bound = bound;
  r.method = method;
  r.n = n;
  r.epsilon = eps;
  return r;
}

}  // namespace

CountResult katok_count(const Measure& mu, const System& system, int n, double eps, double delta,
                        KatokVariant variant, SolveMode mode, const KatokOptions& options) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");

  if (mu.exact_cylinders()) {
    const int r = variant == KatokVariant::ball ? system.open_ball_radius(eps)
                                                : system.closed_ball_radius(eps);
    const auto range = detail::bowen_range(r, n);
    // cells are disjoint, so taking the heaviest first is optimal
    std::vector<CellClass> classes = mu.kind() == MeasureKind::bernoulli
                                         ? bernoulli_classes(mu.spec().weights, range.size())
                                         : empirical_classes(mu, range);
    const auto count = solvers::partition_mass_cover(classes, delta, solvers::MassRule::greater_than);
    if (!count) {
      double total = 0.0;
      for (const auto& c : classes) total += c.mass * static_cast<double>(c.count);
      throw UnreachableError("cylinder masses cannot exceed delta", total);
    }
    if (*count >= UINT64_MAX / 2) throw BudgetError("Katok count overflows 64 bits");
    return mode == SolveMode::exact
               ? count_result(*count, Bound::exact, CountMethod::closed_form, n, eps)
               : count_result(*count, Bound::upper_bound, CountMethod::greedy, n, eps);
  }

  if (options.samples == 0) throw BudgetError("Katok count needs sample atoms");
  const int W = system.shift() ? system.spec().window : 0;
  const Window window = system.shift() ? Window{-W, n - 1 + W} : Window{0, 0};
  const auto atoms = mu.sample(child_seed(options.seed, 1), options.samples, window);
  auto centers = mu.sample(child_seed(options.seed, 2), options.centers, window);
  if (options.reference && options.reference->indexable() &&
      options.reference->size() <= options.budget.max_points)
    for (std::size_t i = 0; i < options.reference->size(); ++i) centers.push_back(options.reference->at(i));
  std::vector<Point> unique;
  for (auto& c : centers)
    if (std::find(unique.begin(), unique.end(), c) == unique.end()) unique.push_back(std::move(c));

  const double radius = variant == KatokVariant::ball ? eps : eps / 2.0;
  std::vector<solvers::Bitset> sets(unique.size(), solvers::Bitset(atoms.size()));
  for (std::size_t c = 0; c < unique.size(); ++c)
    for (std::size_t a = 0; a < atoms.size(); ++a)
      if (bowen_distance(system, unique[c], atoms[a], n) < radius) sets[c].set(a);
  const std::vector<double> mass(atoms.size(), 1.0 / static_cast<double>(atoms.size()));

  auto unreachable = [&]() -> CountResult {
    solvers::Bitset all(atoms.size());
    for (const auto& s : sets) all |= s;
    throw UnreachableError("candidate balls cannot exceed delta",
                           static_cast<double>(all.count()) / static_cast<double>(atoms.size()));
  };
  if (mode == SolveMode::greedy) {
    auto sol = solvers::greedy_mass_cover(sets, mass, delta, solvers::MassRule::greater_than);
    if (!sol) return unreachable();
    return count_result(sol->value, Bound::upper_bound, CountMethod::greedy, n, eps);
  }
  auto sol = solvers::min_mass_cover(sets, mass, delta, solvers::MassRule::greater_than,
                                     {options.budget.nodes});
  if (!sol) return unreachable();
  if (!sol->optimal) throw BudgetError("Katok branch and bound exhausted the node budget; use greedy mode");
  auto res = count_result(sol->value, Bound::upper_bound, CountMethod::branch_and_bound, n, eps);
  res.nodes = sol->nodes;
  return res;
}

}  // namespace mdim
