#include "mdim/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace mdim::solvers {

void Bitset::set_all() {
  std::fill(words_.begin(), words_.end(), ~std::uint64_t{0});
  if (n_ & 63) words_.back() &= (std::uint64_t{1} << (n_ & 63)) - 1;
}

std::size_t Bitset::count() const {
  std::size_t c = 0;
  for (auto w : words_) c += std::popcount(w);
  return c;
}

bool Bitset::any() const {
  return std::any_of(words_.begin(), words_.end(), [](auto w) { return w != 0; });
}

std::size_t Bitset::first() const { return next(0); }

std::size_t Bitset::next(std::size_t i) const {
  if (i >= n_) return n_;
  std::size_t wi = i >> 6;
  std::uint64_t w = words_[wi] & (~std::uint64_t{0} << (i & 63));
  while (true) {
    if (w) return std::min(n_, (wi << 6) + std::countr_zero(w));
    if (++wi >= words_.size()) return n_;
    w = words_[wi];
  }
}

Bitset& Bitset::operator&=(const Bitset& o) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
  return *this;
}

Bitset& Bitset::operator|=(const Bitset& o) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
  return *this;
}

Bitset& Bitset::subtract(const Bitset& o) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
  return *this;
}

std::size_t Bitset::and_count(const Bitset& o) const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) c += std::popcount(words_[i] & o.words_[i]);
  return c;
}

std::size_t Bitset::andnot_count(const Bitset& o) const {
  std::size_t c = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) c += std::popcount(words_[i] & ~o.words_[i]);
  return c;
}

// ---------------------------------------------------------------------------
// independent sets

SolveResult greedy_independent_set(const Graph& conflict) {
  SolveResult r;
  Bitset blocked(conflict.size());
  for (std::size_t v = 0; v < conflict.size(); ++v) {
    if (blocked.test(v)) continue;
    r.chosen.push_back(v);
    blocked |= conflict.adj[v];
  }
  r.value = r.chosen.size();
  r.optimal = false;
  return r;
}

namespace {

class CliqueSearch {
 public:
  CliqueSearch(std::vector<Bitset> adj, std::uint64_t budget) : adj_(std::move(adj)), budget_(budget) {}

  void run(std::vector<std::size_t> incumbent) {
    best_ = std::move(incumbent);
    Bitset all(adj_.size());
    all.set_all();
    std::vector<std::size_t> current;
    expand(current, all);
  }

  const std::vector<std::size_t>& best() const { return best_; }
  std::uint64_t nodes() const { return nodes_; }
  bool exhausted() const { return out_of_budget_; }

 private:
  void expand(std::vector<std::size_t>& current, Bitset candidates) {
    if (++nodes_ > budget_) {
      out_of_budget_ = true;
      return;
    }
    // greedy colouring: colour classes are independent sets of the clique graph
    std::vector<std::size_t> order;
    std::vector<std::size_t> colour;
    Bitset uncoloured = candidates;
    std::size_t k = 0;
    while (uncoloured.any()) {
      ++k;
      Bitset q = uncoloured;
      for (std::size_t v = q.first(); v < q.size(); v = q.next(v + 1)) {
        if (!q.test(v)) continue;
        order.push_back(v);
        colour.push_back(k);
        uncoloured.reset(v);
        q.subtract(adj_[v]);
        q.reset(v);
      }
    }
    for (std::size_t idx = order.size(); idx-- > 0;) {
      if (current.size() + colour[idx] <= best_.size() || out_of_budget_) return;
      const std::size_t v = order[idx];
      current.push_back(v);
      Bitset next = candidates;
      next &= adj_[v];
      if (next.any()) {
        expand(current, next);
      } else if (current.size() > best_.size()) {
        best_ = current;
      }
      current.pop_back();
      candidates.reset(v);
    }
  }

  std::vector<Bitset> adj_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  bool out_of_budget_ = false;
  std::vector<std::size_t> best_;
};

}  // namespace

SolveResult max_independent_set(const Graph& conflict, const SearchBudget& budget) {
  const std::size_t n = conflict.size();
  SolveResult r;
  if (n == 0) {
    r.optimal = true;
    return r;
  }
  // vertices with few conflicts first
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> degree(n);
  for (std::size_t v = 0; v < n; ++v) degree[v] = conflict.adj[v].count();
  std::stable_sort(perm.begin(), perm.end(), [&](auto a, auto b) { return degree[a] < degree[b]; });
  std::vector<std::size_t> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[perm[i]] = i;

  std::vector<Bitset> comp(n, Bitset(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = conflict.adj[perm[i]];
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && !row.test(perm[j])) comp[i].set(j);
  }
  auto seed = greedy_independent_set(conflict).chosen;
  for (auto& v : seed) v = pos[v];

  CliqueSearch search(std::move(comp), budget.nodes);
  search.run(seed);
  r.chosen.clear();
  for (auto v : search.best()) r.chosen.push_back(perm[v]);
  std::sort(r.chosen.begin(), r.chosen.end());
  r.value = r.chosen.size();
  r.nodes = search.nodes();
  r.optimal = !search.exhausted();
  return r;
}

// ---------------------------------------------------------------------------
// set cover

SolveResult greedy_set_cover(const std::vector<Bitset>& sets, std::size_t universe) {
  SolveResult r;
  Bitset uncovered(universe);
  uncovered.set_all();
  while (uncovered.any()) {
    std::size_t best = sets.size(), gain = 0;
    for (std::size_t s = 0; s < sets.size(); ++s) {
      const std::size_t g = sets[s].and_count(uncovered);
      if (g > gain) {
        gain = g;
        best = s;
      }
    }
    if (best == sets.size()) break;  // infeasible remainder
    r.chosen.push_back(best);
    uncovered.subtract(sets[best]);
  }
  r.value = r.chosen.size();
  return r;
}

std::optional<SolveResult> min_set_cover(const std::vector<Bitset>& sets, std::size_t universe,
                                         const SearchBudget& budget) {
  std::vector<std::vector<std::size_t>> containing(universe);
  for (std::size_t s = 0; s < sets.size(); ++s)
    for (std::size_t e = sets[s].first(); e < universe; e = sets[s].next(e + 1)) containing[e].push_back(s);
  for (const auto& c : containing)
    if (c.empty()) return std::nullopt;

  SolveResult incumbent = greedy_set_cover(sets, universe);
  std::uint64_t nodes = 0;
  bool exhausted = false;
  std::vector<std::size_t> chosen;

  std::function<void(const Bitset&)> search = [&](const Bitset& uncovered) {
    if (++nodes > budget.nodes) {
      exhausted = true;
      return;
    }
    const std::size_t left = uncovered.count();
    if (left == 0) {
      if (chosen.size() < incumbent.value) {
        incumbent.chosen = chosen;
        incumbent.value = chosen.size();
      }
      return;
    }
    std::size_t widest = 0;
    for (const auto& s : sets) widest = std::max(widest, s.and_count(uncovered));
    const std::size_t bound = chosen.size() + (left + widest - 1) / widest;
    if (bound >= incumbent.value) return;

    // branch on the element with the fewest covering sets
    std::size_t pick = universe, fewest = sets.size() + 1;
    for (std::size_t e = uncovered.first(); e < universe; e = uncovered.next(e + 1)) {
      if (containing[e].size() < fewest) {
        fewest = containing[e].size();
        pick = e;
      }
    }
    std::vector<std::pair<std::size_t, std::size_t>> options;
    for (auto s : containing[pick]) options.emplace_back(sets[s].and_count(uncovered), s);
    std::stable_sort(options.begin(), options.end(), [](auto a, auto b) { return a.first > b.first; });
    for (auto [gain, s] : options) {
      if (exhausted) return;
      Bitset rest = uncovered;
      rest.subtract(sets[s]);
      chosen.push_back(s);
      search(rest);
      chosen.pop_back();
    }
  };
  Bitset all(universe);
  all.set_all();
  search(all);
  std::sort(incumbent.chosen.begin(), incumbent.chosen.end());
  incumbent.nodes = nodes;
  incumbent.optimal = !exhausted;
  return incumbent;
}

// ---------------------------------------------------------------------------
// mass covers

namespace {

double mass_of(const Bitset& b, const std::vector<double>& atom_mass) {
  double m = 0.0;
  for (std::size_t a = b.first(); a < b.size(); a = b.next(a + 1)) m += atom_mass[a];
  return m;
}

double marginal(const Bitset& set, const Bitset& covered, const std::vector<double>& atom_mass) {
  Bitset fresh = set;
  fresh.subtract(covered);
  return mass_of(fresh, atom_mass);
}

}  // namespace

std::optional<SolveResult> greedy_mass_cover(const std::vector<Bitset>& sets,
                                             const std::vector<double>& atom_mass, double target,
                                             MassRule rule) {
  SolveResult r;
  if (sets.empty()) return std::nullopt;
  Bitset covered(sets.front().size());
  double mass = 0.0;
  while (!reaches(mass, target, rule)) {
    std::size_t best = sets.size();
    double gain = 0.0;
    for (std::size_t s = 0; s < sets.size(); ++s) {
      const double g = marginal(sets[s], covered, atom_mass);
      if (g > gain) {
        gain = g;
        best = s;
      }
    }
    if (best == sets.size()) return std::nullopt;
    r.chosen.push_back(best);
    covered |= sets[best];
    mass = mass_of(covered, atom_mass);
  }
  r.value = r.chosen.size();
  return r;
}

std::optional<SolveResult> min_mass_cover(const std::vector<Bitset>& sets,
                                          const std::vector<double>& atom_mass, double target,
                                          MassRule rule, const SearchBudget& budget) {
  auto seed = greedy_mass_cover(sets, atom_mass, target, rule);
  if (!seed) return std::nullopt;
  SolveResult incumbent = *seed;

  std::vector<std::size_t> order(sets.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> total(sets.size());
  for (std::size_t s = 0; s < sets.size(); ++s) total[s] = mass_of(sets[s], atom_mass);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return total[a] > total[b]; });

  std::uint64_t nodes = 0;
  bool exhausted = false;
  std::vector<std::size_t> chosen;

  std::function<void(std::size_t, const Bitset&)> search = [&](std::size_t i, const Bitset& covered) {
    if (++nodes > budget.nodes) {
      exhausted = true;
      return;
    }
    const double mass = mass_of(covered, atom_mass);
    if (reaches(mass, target, rule)) {
      if (chosen.size() < incumbent.value) {
        incumbent.chosen = chosen;
        incumbent.value = chosen.size();
      }
      return;
    }
    if (chosen.size() + 1 >= incumbent.value || i == order.size()) return;
    // optimistic bound: marginals are subadditive, so the best k remaining
    // marginals summed overestimate what any k sets can add
    std::vector<double> gains;
    for (std::size_t j = i; j < order.size(); ++j) gains.push_back(marginal(sets[order[j]], covered, atom_mass));
    std::sort(gains.begin(), gains.end(), std::greater<>());
    double acc = mass;
    std::size_t need = 0;
    while (need < gains.size() && !reaches(acc, target, rule)) acc += gains[need++];
    if (!reaches(acc, target, rule) || chosen.size() + need >= incumbent.value) return;

    const std::size_t s = order[i];
    if (marginal(sets[s], covered, atom_mass) > 0.0) {
      Bitset with = covered;
      with |= sets[s];
      chosen.push_back(s);
      search(i + 1, with);
      chosen.pop_back();
    }
    if (!exhausted) search(i + 1, covered);
  };
  search(0, Bitset(sets.front().size()));
  std::sort(incumbent.chosen.begin(), incumbent.chosen.end());
  incumbent.nodes = nodes;
  incumbent.optimal = !exhausted;
  return incumbent;
}

std::optional<std::size_t> partition_mass_cover(std::vector<double> cell_mass, double target,
                                                MassRule rule) {
  std::sort(cell_mass.begin(), cell_mass.end(), std::greater<>());
  double acc = 0.0;
  for (std::size_t i = 0; i < cell_mass.size(); ++i) {
    acc += cell_mass[i];
    if (reaches(acc, target, rule)) return i + 1;
  }
  return std::nullopt;
}

std::optional<std::uint64_t> partition_mass_cover(std::vector<CellClass> classes, double target,
                                                  MassRule rule) {
  std::sort(classes.begin(), classes.end(),
            [](const CellClass& a, const CellClass& b) { return a.mass > b.mass; });
  double acc = 0.0;
  std::uint64_t taken = 0;
  for (const auto& c : classes) {
    if (c.count == 0 || c.mass <= 0.0) continue;
    const double whole = acc + c.mass * static_cast<double>(c.count);
    if (!reaches(whole, target, rule)) {
      acc = whole;
      taken += c.count;
      continue;
    }
    // smallest j with acc + j * mass reaching the target, nudged past rounding
    double guess = std::floor((target - acc) / c.mass);
    std::uint64_t j = guess < 0.0 ? 0 : static_cast<std::uint64_t>(guess);
    if (j > c.count) j = c.count;
    while (j > 0 && reaches(acc + c.mass * static_cast<double>(j - 1), target, rule)) --j;
    while (!reaches(acc + c.mass * static_cast<double>(j), target, rule)) ++j;
    return taken + j;
  }
  return std::nullopt;
}

}  // namespace mdim::solvers
