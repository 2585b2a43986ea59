#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdim/bowen.hpp"
#include "mdim/systems.hpp"

namespace mdim {

enum class MeasureKind { bernoulli, product_lebesgue, empirical };

const char* to_string(MeasureKind kind);
MeasureKind measure_kind_from_string(const std::string& s);

struct MeasureSpec {
  MeasureKind kind = MeasureKind::bernoulli;
  std::vector<double> weights;            // bernoulli
  std::uint64_t orbit_length = 1 << 16;   // empirical: L
  std::uint64_t seed = 1;                 // empirical: orbit seed
  int orbit_pad = 64;                     // empirical: coordinates kept on each side
};

enum class MassMethod { exact, monte_carlo, box_bounds };
const char* to_string(MassMethod m);

/// A mass with bounds; log fields stay finite where the masses underflow.
struct MassEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double log_value = 0.0;
  double log_lower = 0.0;
  double log_upper = 0.0;
  MassMethod method = MassMethod::exact;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// An invariant measure of a System. Immutable.
///
/// bernoulli: i.i.d. symbols on a full shift. product_lebesgue: i.i.d.
/// uniform coordinates on the interval shift. empirical: the orbit of one
/// seeded typical sequence (random admissible Markov walk for shift spaces,
/// random binary expansion for the doubling map) after a 10% burn-in.
class Measure {
 public:
  Measure(MeasureSpec spec, const System& system);

  MeasureKind kind() const { return spec_.kind; }
  const MeasureSpec& spec() const { return spec_; }
  const System& system() const { return system_; }

  /// Cylinder masses available exactly (bernoulli, or empirical on a shift space).
  bool exact_cylinders() const;
  /// log mass of the cylinder fixing x on the range; -inf when empty.
  double log_cylinder_mass(const Point& x, Window range) const;
  /// Same as a plain mass; exact for dyadic weights (may underflow to 0).
  double cylinder_mass(const Point& x, Window range) const;
  /// Masses of the cylinders fixing each point of K on K's window.
  std::vector<double> cylinder_masses(const FinitePointSet& K) const;
  /// Mass of the product box with coordinate lo + j in [a_j, b_j] (product_lebesgue).
  double log_box_mass(int lo, const std::vector<std::pair<double, double>>& sides) const;

  /// count mu-distributed points on the window, from the given seed.
  std::vector<Point> sample(std::uint64_t seed, std::size_t count, Window window) const;

  std::uint64_t orbit_length() const { return spec_.orbit_length; }
  /// T^j of the orbit start, restricted to the window (empirical only).
  Point orbit_point(std::uint64_t j, Window window) const;

  /// Shannon entropy -sum p log p of the bernoulli weights (nats).
  double shannon_entropy() const;

 private:
  MeasureSpec spec_;
  System system_;
  std::vector<double> log_weights_;
  std::vector<double> sequence_;  // empirical orbit, padded on both sides
};

Measure make_measure(const MeasureSpec& spec, const System& system);

/// Smallest l with 2^l * eps >= 4, the box window of the interval-shift bounds.
int box_window(double eps);

struct MassOptions {
  std::uint64_t samples = 4096;  // Monte Carlo draws M
  std::uint64_t seed = 1;
};

/// mu(B_n(x, eps)), B_n open. Exact for symbolic cylinders and empirical
/// orbits; box bounds for product_lebesgue (lower = mu(I_n), upper = mu(J_n));
/// Monte Carlo otherwise.
MassEstimate ball_mass(const Measure& mu, const System& system, const Point& x, int n,
                       double eps, const MassOptions& options = {});

/// Always the Monte Carlo path (for cross-checks).
MassEstimate ball_mass_monte_carlo(const Measure& mu, const System& system, const Point& x,
                                   int n, double eps, const MassOptions& options);

enum class KatokVariant { ball, diameter };
const char* to_string(KatokVariant v);

struct KatokOptions {
  std::uint64_t samples = 2048;      // atoms for union masses
  std::uint64_t centers = 256;       // mu-sampled candidate centers
  std::uint64_t seed = 1;
  const FinitePointSet* reference = nullptr;  // extra candidate centers
  SolverBudget budget;
};

/// N_mu^delta(n, eps) (ball) or N~_mu^delta(n, eps) (diameter): fewest sets
/// whose union has mass > delta.
///
/// On shift spaces with exact cylinder masses the balls are the cylinders on
/// [-r, n-1+r] (open radius for ball, closed for diameter) and the count is
/// exact. Otherwise candidates are open d_n-balls (radius eps/2 for diameter)
/// around mu-samples and reference points, masses are sample fractions, and
/// the count is an upper bound.
CountResult katok_count(const Measure& mu, const System& system, int n, double eps, double delta,
                        KatokVariant variant, SolveMode mode, const KatokOptions& options = {});

}  // namespace mdim
