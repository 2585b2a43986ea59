#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

namespace mdim::solvers {

/// Fixed-size dynamic bitset over [0, n).
class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

  std::size_t size() const { return n_; }
  void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }
  void set_all();
  std::size_t count() const;
  bool any() const;
  bool none() const { return !any(); }
  /// Index of the lowest set bit, or size() if none.
  std::size_t first() const;
  std::size_t next(std::size_t i) const;

  Bitset& operator&=(const Bitset& o);
  Bitset& operator|=(const Bitset& o);
  /// this &= ~o
  Bitset& subtract(const Bitset& o);
  std::size_t and_count(const Bitset& o) const;
  std::size_t andnot_count(const Bitset& o) const;
  bool operator==(const Bitset&) const = default;

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Undirected graph as adjacency bitsets (no self loops).
struct Graph {
  explicit Graph(std::size_t n) : adj(n, Bitset(n)) {}
  std::size_t size() const { return adj.size(); }
  void add_edge(std::size_t u, std::size_t v) {
    adj[u].set(v);
    adj[v].set(u);
  }
  std::vector<Bitset> adj;
};

struct SearchBudget {
  std::uint64_t nodes = 10'000'000;
};

struct SolveResult {
  std::size_t value = 0;
  std::vector<std::size_t> chosen;
  std::uint64_t nodes = 0;
  bool optimal = false;  // false when the node budget ran out
};

/// First-fit maximal independent set in vertex order 0, 1, ...
SolveResult greedy_independent_set(const Graph& conflict);

/// Maximum independent set as a maximum clique of the complement, with a
/// greedy-colouring bound (Tomita-style). Seeded with the first-fit solution.
SolveResult max_independent_set(const Graph& conflict, const SearchBudget& budget = {});

/// Greedy cover of the universe by the given sets (ties: lowest index).
SolveResult greedy_set_cover(const std::vector<Bitset>& sets, std::size_t universe);

/// Minimum number of sets covering every element. Elements covered by no set
/// make the instance infeasible (returns nullopt).
std::optional<SolveResult> min_set_cover(const std::vector<Bitset>& sets, std::size_t universe,
                                         const SearchBudget& budget = {});

/// Threshold rule for mass covers.
enum class MassRule { at_least, greater_than };

inline bool reaches(double mass, double target, MassRule rule) {
  return rule == MassRule::at_least ? mass >= target : mass > target;
}

/// Greedy: repeatedly add the set with the largest residual mass (ties: lowest
/// index) until the union mass reaches the target.
std::optional<SolveResult> greedy_mass_cover(const std::vector<Bitset>& sets,
                                             const std::vector<double>& atom_mass, double target,
                                             MassRule rule);

/// Fewest sets whose union mass reaches the target, by branch and bound.
std::optional<SolveResult> min_mass_cover(const std::vector<Bitset>& sets,
                                          const std::vector<double>& atom_mass, double target,
                                          MassRule rule, const SearchBudget& budget = {});

/// Fewest cells from a partition (disjoint cells given by their masses)
/// reaching the target: take the heaviest first. Exact.
std::optional<std::size_t> partition_mass_cover(std::vector<double> cell_mass, double target,
                                                MassRule rule);

/// Equal-mass cells of a partition, given as (mass, how many).
struct CellClass {
  double mass = 0.0;
  std::uint64_t count = 0;
};

/// partition_mass_cover for partitions given by classes of equal-mass cells.
std::optional<std::uint64_t> partition_mass_cover(std::vector<CellClass> classes, double target,
                                                  MassRule rule);

}  // namespace mdim::solvers
