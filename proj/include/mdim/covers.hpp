#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdim/bowen.hpp"
#include "mdim/measures.hpp"
#include "mdim/systems.hpp"

namespace mdim {

/// Open ball {y : d(y, center) < radius}.
struct Ball {
  Point center;
  double radius = 0.0;
};

struct CoverGeometry {
  double diam = 0.0;       // max over cells of the sample diameter
  double leb_lower = 0.0;  // largest dyadic delta whose open sample balls fit in a cell
};

/// Finite open cover by balls, evaluated against a reference sample.
struct Cover {
  std::vector<Ball> cells;
  std::string construction;
  std::optional<CoverGeometry> measured;
};

/// Spanning-set cover: F = greedy (1, eps/4)-spanning subset of K, cells
/// B(f, eps/2). Coverage of K is checked; diam and Leb are measured on K.
Cover spanning_cover(const System& system, const FinitePointSet& K, double eps,
                     const SolverBudget& budget = {});

/// Cylinders fixing coordinates |i| <= g-1, one per word of K (symbolic only).
Cover cylinder_cover(const System& system, const FinitePointSet& K, int generation);

/// U^n relative to K: itineraries (i_0..i_{n-1}) with T^k y in U_{i_k}.
struct JoinedCover {
  Cover base;
  int n = 1;
  std::vector<std::vector<std::uint32_t>> itineraries;
  // CSR lists: itineraries realized by reference point p are
  // ids[offsets[p] .. offsets[p+1])
  std::vector<std::uint64_t> offsets;
  std::vector<std::uint32_t> ids;
  bool disjoint = false;  // every point realizes exactly one itinerary

  std::size_t size() const { return itineraries.size(); }
};

struct JoinBudget {
  std::uint64_t max_itineraries_per_point = 1 << 16;
};

JoinedCover join_cover(const System& system, const Cover& cover, const FinitePointSet& K, int n,
                       const JoinBudget& budget = {});

/// N(U^n) relative to K.
CountResult minimal_subcover_count(const JoinedCover& joined, const FinitePointSet& K,
                                   SolveMode mode, const SolverBudget& budget = {});

CoverGeometry cover_geometry(const System& system, const Cover& cover, const FinitePointSet& K);

struct ShapiraOptions {
  std::uint64_t samples = 4096;  // Monte Carlo atoms when masses are not exact
  std::uint64_t seed = 1;
  SolverBudget budget;
};

/// N_mu(U^n, delta): fewest itinerary cells with union mass >= delta. Exact
/// atoms are the words of a symbolic exact enumeration K; otherwise mu-samples.
CountResult shapira_count(const System& system, const JoinedCover& joined,
                          const FinitePointSet& K, const Measure& mu, double delta,
                          SolveMode mode, const ShapiraOptions& options = {});

/// log mu(U^n_x), U^n_x the union of the cells of U^n containing x, for
/// symbolic covers by cylinders of one radius.
double log_itinerary_mass(const System& system, const Cover& cover, const Measure& mu,
                          const Point& x, int n);

}  // namespace mdim
