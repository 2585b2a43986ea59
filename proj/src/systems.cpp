#include "mdim/systems.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace mdim {

Window Window::intersect(const Window& a, const Window& b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

double Point::at(int i) const {
  const int j = i - lo;
  if (j < 0 || j >= static_cast<int>(coords.size())) {
    std::ostringstream os;
    os << "coordinate " << i << " outside point window [" << lo << ", " << window().hi << "]";
    throw WindowError(os.str(), std::abs(i));
  }
  return coords[j];
}

const char* to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::full_shift: return "full_shift";
    case SystemKind::sft: return "sft";
    case SystemKind::interval_shift: return "interval_shift";
    case SystemKind::circle_doubling: return "circle_doubling";
  }
  return "?";
}

SystemKind system_kind_from_string(const std::string& s) {
  if (s == "full_shift") return SystemKind::full_shift;
  if (s == "sft") return SystemKind::sft;
  if (s == "interval_shift") return SystemKind::interval_shift;
  if (s == "circle_doubling") return SystemKind::circle_doubling;
  throw std::invalid_argument("unknown system kind '" + s + "'");
}

const char* to_string(Exactness e) {
  switch (e) {
    case Exactness::exact_enumeration: return "exact_enumeration";
    case Exactness::grid_sample: return "grid_sample";
    case Exactness::orbit_sample: return "orbit_sample";
  }
  return "?";
}

double interval_tail_weight(const Window& w) {
  if (w.empty() || w.lo > 0 || w.hi < 0) throw std::invalid_argument("window must contain 0");
  // sum_{i < lo} 2^{-|i|} = 2^{lo}, sum_{i > hi} 2^{-|i|} = 2^{-hi}
  return std::ldexp(1.0, w.lo) + std::ldexp(1.0, -w.hi);
}

System::System(SystemSpec spec) : spec_(std::move(spec)) {
  if (spec_.window < 0) throw std::invalid_argument("window must be nonnegative");
  switch (spec_.kind) {
    case SystemKind::full_shift:
    case SystemKind::sft:
      if (spec_.alphabet < 2 || spec_.alphabet > 10)
        throw std::invalid_argument("alphabet size must be in [2, 10]");
      break;
    case SystemKind::interval_shift:
    case SystemKind::circle_doubling:
      if (spec_.grid < 1) throw std::invalid_argument("grid resolution must be positive");
      break;
  }
  if (spec_.kind == SystemKind::sft) {
    if (spec_.forbidden.empty()) throw std::invalid_argument("sft needs forbidden words");
    for (const auto& w : spec_.forbidden) {
      if (w.empty()) throw std::invalid_argument("forbidden words must be nonempty");
      std::vector<int> word;
      for (char ch : w) {
        const int s = ch - '0';
        if (s < 0 || s >= spec_.alphabet)
          throw std::invalid_argument("forbidden word '" + w + "' leaves the alphabet");
        word.push_back(s);
      }
      forbidden_.push_back(std::move(word));
    }
  }
  if (spec_.precision > 0.0) {
    if (spec_.kind == SystemKind::interval_shift) {
      const double bound = std::ldexp(1.0, -spec_.window + 1);
      if (bound > spec_.precision) {
        int need = spec_.window;
        while (std::ldexp(1.0, -need + 1) > spec_.precision) ++need;
        std::ostringstream os;
        os << "window " << spec_.window << " has truncation bound 2^(-w+1) = " << bound
           << " > precision " << spec_.precision << "; need window >= " << need;
        throw WindowError(os.str(), need);
      }
    } else if (symbolic()) {
      // resolving distances down to `precision` needs coordinates |i| <= log2(1/precision)
      int need = 0;
      while (std::ldexp(1.0, -need) > spec_.precision) ++need;
      if (spec_.window < need) {
        std::ostringstream os;
        os << "window " << spec_.window << " cannot resolve distances down to "
           << spec_.precision << "; need window >= " << need;
        throw WindowError(os.str(), need);
      }
    }
  }
}

double System::diameter() const {
  switch (spec_.kind) {
    case SystemKind::full_shift:
    case SystemKind::sft: return 1.0;
    case SystemKind::interval_shift: return 3.0;
    case SystemKind::circle_doubling: return 0.5;
  }
  return 0.0;
}

namespace {

Window shared_window(const Point& x, const Point& y, int k) {
  Window w = Window::intersect(x.window(), y.window()).shifted(-k);
  if (w.empty() || !w.contains(0)) {
    std::ostringstream os;
    os << "points do not share a window around coordinate " << k;
    throw WindowError(os.str(), k);
  }
  return w;
}

}  // namespace

double System::symbolic_distance(const Point& x, const Point& y, int k) const {
  const Window w = shared_window(x, y, k);
  const int reach = std::max(-w.lo, w.hi);
  for (int r = 0; r <= reach; ++r) {
    if (w.contains(r) && x.coords[r + k - x.lo] != y.coords[r + k - y.lo]) return std::ldexp(1.0, -r);
    if (r > 0 && w.contains(-r) && x.coords[-r + k - x.lo] != y.coords[-r + k - y.lo])
      return std::ldexp(1.0, -r);
  }
  return 0.0;
}

double System::interval_distance(const Point& x, const Point& y, int k) const {
  const Window w = shared_window(x, y, k);
  double sum = 0.0;
  // nearest coordinates first; fixed order keeps sums reproducible
  const int reach = std::max(-w.lo, w.hi);
  for (int r = 0; r <= reach; ++r) {
    const double weight = std::ldexp(1.0, -r);
    if (w.contains(r)) sum += weight * std::abs(x.coords[r + k - x.lo] - y.coords[r + k - y.lo]);
    if (r > 0 && w.contains(-r))
      sum += weight * std::abs(x.coords[-r + k - x.lo] - y.coords[-r + k - y.lo]);
  }
  return sum;
}

double System::distance(const Point& x, const Point& y, int k) const {
  switch (spec_.kind) {
    case SystemKind::full_shift:
    case SystemKind::sft: return symbolic_distance(x, y, k);
    case SystemKind::interval_shift: return interval_distance(x, y, k);
    case SystemKind::circle_doubling: {
      double a = x.at(0), b = y.at(0);
      for (int j = 0; j < k; ++j) {
        a *= 2.0;
        if (a >= 1.0) a -= 1.0;
        b *= 2.0;
        if (b >= 1.0) b -= 1.0;
      }
      const double d = std::abs(a - b);
      return std::min(d, 1.0 - d);
    }
  }
  return 0.0;
}

Distance System::measured_distance(const Point& x, const Point& y) const {
  Distance out{distance(x, y), 0.0};
  if (shift()) {
    const Window w = shared_window(x, y, 0);
    if (spec_.kind == SystemKind::interval_shift) {
      out.truncation = interval_tail_weight(w);
    } else if (out.value == 0.0) {
      out.truncation = std::ldexp(1.0, -(std::min(-w.lo, w.hi) + 1));
    }
  }
  return out;
}

Point System::apply(const Point& x, int j) const {
  if (j < 0) throw std::invalid_argument("apply_map needs j >= 0");
  if (spec_.kind == SystemKind::circle_doubling) {
    Point y = x;
    for (int s = 0; s < j; ++s) {
      y.coords[0] *= 2.0;
      if (y.coords[0] >= 1.0) y.coords[0] -= 1.0;
    }
    return y;
  }
  if (x.window().hi < j) {
    std::ostringstream os;
    os << "point window [" << x.lo << ", " << x.window().hi << "] cannot survive " << j
       << " shifts; need hi >= " << j;
    throw WindowError(os.str(), j);
  }
  Point y = x;
  y.lo -= j;
  return y;
}

bool System::admissible(const Point& x) const {
  switch (spec_.kind) {
    case SystemKind::full_shift:
    case SystemKind::sft:
      for (double v : x.coords)
        if (v != std::floor(v) || v < 0 || v >= spec_.alphabet) return false;
      if (spec_.kind == SystemKind::sft) {
        const int len = static_cast<int>(x.coords.size());
        for (const auto& w : forbidden_) {
          const int wl = static_cast<int>(w.size());
          for (int s = 0; s + wl <= len; ++s) {
            bool hit = true;
            for (int t = 0; t < wl && hit; ++t) hit = static_cast<int>(x.coords[s + t]) == w[t];
            if (hit) return false;
          }
        }
      }
      return true;
    case SystemKind::interval_shift:
      return std::all_of(x.coords.begin(), x.coords.end(),
                         [](double v) { return v >= 0.0 && v <= 1.0; });
    case SystemKind::circle_doubling:
      return x.lo == 0 && x.coords.size() == 1 && x.coords[0] >= 0.0 && x.coords[0] < 1.0;
  }
  return false;
}

void System::validate(const Point& x) const {
  if (!admissible(x)) throw std::invalid_argument(std::string("invalid point for ") + to_string(kind()));
}

int System::open_ball_radius(double eps) const {
  if (!symbolic()) throw std::logic_error("open_ball_radius needs a symbolic system");
  // d < eps  <=>  every mismatch has 2^{-|i|} < eps  <=>  agree where 2^{-|i|} >= eps
  int r = -1;
  while (r < 1024 && std::ldexp(1.0, -(r + 1)) >= eps) ++r;
  return r;
}

int System::closed_ball_radius(double eps) const {
  if (!symbolic()) throw std::logic_error("closed_ball_radius needs a symbolic system");
  int r = -1;
  while (r < 1024 && std::ldexp(1.0, -(r + 1)) > eps) ++r;
  return r;
}

System make_system(const SystemSpec& spec) { return System(spec); }

Point apply_map(const System& system, const Point& x, int j) { return system.apply(x, j); }

// ---------------------------------------------------------------------------

FinitePointSet FinitePointSet::product(Window window, std::vector<std::vector<double>> axes,
                                       Exactness exactness, double density) {
  if (static_cast<int>(axes.size()) != window.size())
    throw std::invalid_argument("one axis per window coordinate required");
  if (axes.empty()) throw std::invalid_argument("product set needs a nonempty window");
  FinitePointSet s;
  s.window_ = window;
  s.axes_ = std::move(axes);
  s.strides_.assign(s.axes_.size(), 1);
  std::uint64_t total = 1;
  for (int j = static_cast<int>(s.axes_.size()) - 1; j >= 0; --j) {
    if (s.axes_[j].empty()) throw std::invalid_argument("empty axis");
    s.log_size_ += std::log(static_cast<double>(s.axes_[j].size()));
    s.strides_[j] = total;
    if (s.indexable_ && total > (std::uint64_t{1} << 62) / s.axes_[j].size()) s.indexable_ = false;
    if (s.indexable_) total *= s.axes_[j].size();
  }
  s.product_size_ = s.indexable_ ? total : 0;
  s.exactness_ = exactness;
  s.density_ = density;
  return s;
}

FinitePointSet FinitePointSet::from_points(std::vector<Point> points, Exactness exactness,
                                           double density) {
  if (points.empty()) throw std::invalid_argument("point set must be nonempty");
  FinitePointSet s;
  s.window_ = points.front().window();
  for (const auto& p : points) s.window_ = Window::intersect(s.window_, p.window());
  s.points_ = std::move(points);
  s.exactness_ = exactness;
  s.density_ = density;
  return s;
}

void FinitePointSet::require_indexable() const {
  if (!indexable_) {
    std::ostringstream os;
    os << "product set with about e^" << log_size_ << " points cannot be indexed";
    throw BudgetError(os.str());
  }
}

std::size_t FinitePointSet::size() const {
  require_indexable();
  if (!axes_.empty()) return codes_ ? codes_->size() : static_cast<std::size_t>(product_size_);
  return points_.size();
}

double FinitePointSet::coord(std::size_t i, int c) const {
  if (axes_.empty()) return points_[i].at(c);
  if (!window_.contains(c)) {
    std::ostringstream os;
    os << "coordinate " << c << " outside sample window [" << window_.lo << ", " << window_.hi << "]";
    throw WindowError(os.str(), std::abs(c));
  }
  require_indexable();
  const int j = c - window_.lo;
  const auto& ax = axes_[j];
  return ax[(code_of(i) / strides_[j]) % ax.size()];
}

Point FinitePointSet::at(std::size_t i) const {
  if (axes_.empty()) return points_.at(i);
  require_indexable();
  Point p;
  p.lo = window_.lo;
  p.coords.resize(axes_.size());
  const std::uint64_t code = code_of(i);
  for (std::size_t j = 0; j < axes_.size(); ++j)
    p.coords[j] = axes_[j][(code / strides_[j]) % axes_[j].size()];
  return p;
}

FinitePointSet FinitePointSet::filter(std::vector<std::uint64_t> codes) const {
  if (axes_.empty()) throw std::logic_error("filter needs a product set");
  if (codes.empty()) throw std::invalid_argument("filter would leave an empty set");
  require_indexable();
  FinitePointSet s = *this;
  s.codes_ = std::move(codes);
  return s;
}

FinitePointSet FinitePointSet::subset(const std::vector<std::size_t>& indices) const {
  std::vector<Point> pts;
  pts.reserve(indices.size());
  for (auto i : indices) pts.push_back(at(i));
  return from_points(std::move(pts), exactness_, density_);
}

FinitePointSet grid_points(const System& system, Window window, int resolution) {
  if (system.kind() != SystemKind::interval_shift)
    throw std::invalid_argument("grid_points needs interval_shift");
  if (window.empty()) throw std::invalid_argument("grid window is empty");
  if (resolution < 1) throw std::invalid_argument("resolution must be positive");
  const int m = resolution;
  std::vector<double> mids(m);
  for (int i = 0; i < m; ++i) mids[i] = (2.0 * i + 1.0) / (2.0 * m);
  double density = 0.0;
  for (int c = window.lo; c <= window.hi; ++c) density += std::ldexp(1.0, -std::abs(c)) / (2.0 * m);
  return FinitePointSet::product(window, std::vector<std::vector<double>>(window.size(), mids),
                                 Exactness::grid_sample, density);
}

FinitePointSet enumerate_points(const System& system, Window window, int resolution,
                                const EnumerationBudget& budget) {
  if (window.empty()) throw std::invalid_argument("enumeration window is empty");
  auto too_many = [&](double count) {
    std::ostringstream os;
    os << "enumeration would generate " << count << " points (budget " << budget.max_points << ")";
    throw BudgetError(os.str());
  };
  switch (system.kind()) {
    case SystemKind::full_shift:
    case SystemKind::sft: {
      const int k = system.alphabet();
      const double count = std::pow(static_cast<double>(k), window.size());
      std::vector<double> symbols(k);
      for (int s = 0; s < k; ++s) symbols[s] = s;
      std::vector<std::vector<double>> axes(window.size(), symbols);
      if (system.kind() == SystemKind::full_shift) {
        if (count > static_cast<double>(budget.max_points)) too_many(count);
        return FinitePointSet::product(window, std::move(axes), Exactness::exact_enumeration, 0.0);
      }
      // Depth-first over admissible prefixes; codes come out in lexicographic order.
      if (count > 64.0 * static_cast<double>(budget.max_points)) too_many(count);
      const int len = window.size();
      std::vector<int> word(len);
      std::vector<std::uint64_t> codes;
      const auto& forbidden = system.forbidden_words();
      auto suffix_ok = [&](int end) {
        for (const auto& w : forbidden) {
          const int wl = static_cast<int>(w.size());
          if (wl > end + 1) continue;
          bool hit = true;
          for (int t = 0; t < wl && hit; ++t) hit = word[end - wl + 1 + t] == w[t];
          if (hit) return false;
        }
        return true;
      };
      std::function<void(int, std::uint64_t)> dfs = [&](int pos, std::uint64_t code) {
        if (pos == len) {
          if (codes.size() >= budget.max_points) too_many(static_cast<double>(codes.size()) + 1);
          codes.push_back(code);
          return;
        }
        for (int s = 0; s < k; ++s) {
          word[pos] = s;
          if (suffix_ok(pos)) dfs(pos + 1, code * k + s);
        }
      };
      dfs(0, 0);
      auto full = FinitePointSet::product(window, std::move(axes), Exactness::exact_enumeration, 0.0);
      return full.filter(std::move(codes));
    }
    case SystemKind::interval_shift: {
      const int m = resolution;
      if (m < 1) throw std::invalid_argument("resolution must be positive");
      const double count = std::pow(static_cast<double>(m), window.size());
      if (count > static_cast<double>(budget.max_points)) too_many(count);
      return grid_points(system, window, m);
    }
    case SystemKind::circle_doubling: {
      const int m = resolution;
      if (m < 1) throw std::invalid_argument("resolution must be positive");
      if (static_cast<std::uint64_t>(m) > budget.max_points) too_many(m);
      std::vector<double> pts(m);
      for (int i = 0; i < m; ++i) pts[i] = static_cast<double>(i) / m;
      return FinitePointSet::product({0, 0}, {std::move(pts)}, Exactness::grid_sample, 0.5 / m);
    }
  }
  throw std::logic_error("unreachable");
}

FinitePointSet product_lattice(Window window, Window varying, std::vector<double> values,
                               double fill) {
  if (!window.contains(varying)) throw std::invalid_argument("varying coordinates outside window");
  std::vector<std::vector<double>> axes;
  for (int c = window.lo; c <= window.hi; ++c)
    axes.push_back(varying.contains(c) ? values : std::vector<double>{fill});
  return FinitePointSet::product(window, std::move(axes), Exactness::grid_sample, 0.0);
}

}  // namespace mdim
