#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdim/errors.hpp"

namespace mdim {

/// Closed integer coordinate range [lo, hi]. Empty when hi < lo.
struct Window {
  int lo = 0;
  int hi = -1;

  int size() const { return hi < lo ? 0 : hi - lo + 1; }
  bool empty() const { return hi < lo; }
  bool contains(int i) const { return lo <= i && i <= hi; }
  bool contains(const Window& w) const { return w.empty() || (lo <= w.lo && w.hi <= hi); }
  Window shifted(int k) const { return {lo + k, hi + k}; }
  static Window intersect(const Window& a, const Window& b);
  bool operator==(const Window&) const = default;
};

/// A point of a (possibly truncated) sequence space or of the circle.
///
/// coords[j] is coordinate lo + j. Symbols are stored as small integers.
/// Circle points use a single coordinate at index 0.
struct Point {
  int lo = 0;
  std::vector<double> coords;

  Window window() const { return {lo, lo + static_cast<int>(coords.size()) - 1}; }
  /// Throws WindowError when i is outside the carried window.
  double at(int i) const;
  bool operator==(const Point&) const = default;
};

enum class SystemKind { full_shift, sft, interval_shift, circle_doubling };

const char* to_string(SystemKind kind);
SystemKind system_kind_from_string(const std::string& s);

struct SystemSpec {
  SystemKind kind = SystemKind::full_shift;
  int alphabet = 2;
  std::vector<std::string> forbidden;  // sft only, words over '0'..'9'
  int window = 8;                      // base window [-window, window]
  int grid = 64;                       // interval_shift / circle_doubling resolution
  double precision = 0.0;              // metric precision demanded of the window; 0 disables
};

/// Distance with the truncation error bound of the shared window.
struct Distance {
  double value = 0.0;
  double truncation = 0.0;
};

/// A compact metric space with its map. Immutable.
class System {
 public:
  explicit System(SystemSpec spec);

  const SystemSpec& spec() const { return spec_; }
  SystemKind kind() const { return spec_.kind; }
  bool symbolic() const { return spec_.kind == SystemKind::full_shift || spec_.kind == SystemKind::sft; }
  bool shift() const { return spec_.kind != SystemKind::circle_doubling; }
  bool ultrametric() const { return symbolic(); }
  bool invertible() const { return spec_.kind != SystemKind::circle_doubling; }
  /// Distances are exact binary fractions (symbolic, and circle points on dyadic grids).
  bool exact_distances() const { return spec_.kind != SystemKind::interval_shift; }
  int alphabet() const { return spec_.alphabet; }
  Window base_window() const { return {-spec_.window, spec_.window}; }
  double diameter() const;

  /// d(T^k x, T^k y). For shifts this reads coordinates [i + k] of x and y.
  double distance(const Point& x, const Point& y, int k = 0) const;
  Distance measured_distance(const Point& x, const Point& y) const;

  /// T^j x. Shifts move the window left by j and require the result to still contain 0.
  Point apply(const Point& x, int j) const;

  bool admissible(const Point& x) const;
  /// Throws std::invalid_argument if x is not a valid point of this system.
  void validate(const Point& x) const;

  /// Symbolic only. Largest r such that an (open or closed) ball of radius eps
  /// is the cylinder fixing coordinates |i| <= r; -1 means the ball is everything.
  int open_ball_radius(double eps) const;
  int closed_ball_radius(double eps) const;

  /// sft forbidden words as symbol vectors.
  const std::vector<std::vector<int>>& forbidden_words() const { return forbidden_; }

 private:
  double symbolic_distance(const Point& x, const Point& y, int k) const;
  double interval_distance(const Point& x, const Point& y, int k) const;

  SystemSpec spec_;
  std::vector<std::vector<int>> forbidden_;
};

System make_system(const SystemSpec& spec);
Point apply_map(const System& system, const Point& x, int j);

/// Sum of 2^-|i| over coordinates i outside w (the interval-shift truncation bound).
double interval_tail_weight(const Window& w);

enum class Exactness { exact_enumeration, grid_sample, orbit_sample };
const char* to_string(Exactness e);

/// A finite stand-in for X (or K inside X).
///
/// Either a product set over a window (one value list per coordinate,
/// optionally filtered to an admissible code list) or an explicit list.
/// Product points are indexed in lexicographic order of their coordinates.
class FinitePointSet {
 public:
  static FinitePointSet product(Window window, std::vector<std::vector<double>> axes,
                                Exactness exactness, double density);
  static FinitePointSet from_points(std::vector<Point> points, Exactness exactness,
                                    double density);

  std::size_t size() const;
  Point at(std::size_t i) const;
  /// Coordinate c of point i without materializing the point.
  double coord(std::size_t i, int c) const;
  /// Window carried by every point (intersection for explicit sets).
  Window window() const { return window_; }

  Exactness exactness() const { return exactness_; }
  double density() const { return density_; }

  bool is_product() const { return !axes_.empty(); }
  /// False for products too large to enumerate; only axes() and log_size() work then.
  bool indexable() const { return indexable_; }
  double log_size() const { return axes_.empty() ? std::log(static_cast<double>(points_.size())) : log_size_; }
  bool filtered() const { return codes_.has_value(); }
  const std::vector<std::vector<double>>& axes() const { return axes_; }
  const std::vector<double>& axis(int c) const { return axes_.at(c - window_.lo); }

  /// Keeps only the listed product codes (sorted ascending).
  FinitePointSet filter(std::vector<std::uint64_t> codes) const;
  /// Explicit subset by point index.
  FinitePointSet subset(const std::vector<std::size_t>& indices) const;

 private:
  std::uint64_t code_of(std::size_t i) const { return codes_ ? (*codes_)[i] : i; }
  void require_indexable() const;

  Window window_;
  std::vector<std::vector<double>> axes_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t product_size_ = 0;
  bool indexable_ = true;
  double log_size_ = 0.0;
  std::optional<std::vector<std::uint64_t>> codes_;
  std::vector<Point> points_;
  Exactness exactness_ = Exactness::grid_sample;
  double density_ = 0.0;
};

struct EnumerationBudget {
  std::uint64_t max_points = std::uint64_t{1} << 22;
};

/// All admissible words (symbolic), grid midpoints (interval_shift) or m
/// equispaced points i/m (circle_doubling) on the window.
FinitePointSet enumerate_points(const System& system, Window window, int resolution,
                                const EnumerationBudget& budget = {});

/// The interval-shift midpoint grid on the window as a lazily indexed
/// product; no size budget (closed-form paths read only the axes).
FinitePointSet grid_points(const System& system, Window window, int resolution);

/// Product sub-grid of the interval-shift grid: coordinates in `varying` take
/// the values `values`, every other coordinate of `window` is fixed to `fill`.
FinitePointSet product_lattice(Window window, Window varying, std::vector<double> values,
                               double fill);

}  // namespace mdim
