#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "mdim/measures.hpp"

using namespace mdim;

namespace {

Point word_point(int lo, const std::vector<int>& w) {
  Point p{lo, {}};
  for (int s : w) p.coords.push_back(s);
  return p;
}

// All words over {0,1} on [lo, hi], as points.
std::vector<Point> all_words(int lo, int hi) {
  std::vector<Point> out;
  const int len = hi - lo + 1;
  for (int code = 0; code < (1 << len); ++code) {
    Point p{lo, std::vector<double>(len)};
    for (int j = 0; j < len; ++j) p.coords[j] = (code >> (len - 1 - j)) & 1;
    out.push_back(p);
  }
  return out;
}

double word_mass(const Point& p, const std::vector<double>& w) {
  double m = 1.0;
  for (double s : p.coords) m *= w[static_cast<int>(s)];
  return m;
}

// Oracle d_n from the definition (binary ultrametric on a finite window).
double oracle_dn(const Point& x, const Point& y, int n) {
  double dn = 0.0;
  for (int k = 0; k < n; ++k)
    for (int i = x.lo; i < x.lo + static_cast<int>(x.coords.size()); ++i)
      if (x.coords[i - x.lo] != y.coords[i - y.lo]) dn = std::max(dn, std::ldexp(1.0, -std::abs(i - k)));
  return dn;
}

}  // namespace

TEST_CASE("exact masses") {
  System full({SystemKind::full_shift});
  auto mu = make_measure({MeasureKind::bernoulli, {0.5, 0.5}}, full);
  CHECK(std::exp(mu.log_cylinder_mass(word_point(0, {1, 0, 1}), {0, 2})) == doctest::Approx(0.125));
  CHECK(mu.shannon_entropy() == doctest::Approx(std::log(2.0)));

  System iv({SystemKind::interval_shift});
  auto leb = make_measure({MeasureKind::product_lebesgue}, iv);
  CHECK(std::exp(leb.log_box_mass(-1, {{0.0, 0.25}, {0.5, 0.75}, {0.1, 0.35}})) ==
        doctest::Approx(std::pow(0.25, 3)));

  System gm({SystemKind::sft, 2, {"11"}});
  auto emp = make_measure({MeasureKind::empirical, {}, 5000, 3, 8}, gm);
  CHECK(emp.log_cylinder_mass(word_point(0, {0}), {0, -1}) == 0.0);

  CHECK_THROWS(make_measure({MeasureKind::bernoulli, {0.5, 0.6}}, full));
  CHECK_THROWS(make_measure({MeasureKind::bernoulli, {0.5, 0.5}}, gm));
  CHECK_THROWS(make_measure({MeasureKind::product_lebesgue}, full));
}

TEST_CASE("bernoulli ball masses match a word-enumeration oracle") {
  System full({SystemKind::full_shift});
  for (auto weights : {std::vector<double>{0.5, 0.5}, std::vector<double>{0.3, 0.7}}) {
    auto mu = make_measure({MeasureKind::bernoulli, weights}, full);
    for (int n = 1; n <= 4; ++n)
      for (double eps : {1.0, 0.5, 0.3, 0.25}) {
        const int lo = -3, hi = n + 2;
        auto words = all_words(lo, hi);
        const Point& x = words[words.size() / 3];
        double oracle = 0.0;
        for (const auto& y : words)
          if (oracle_dn(x, y, n) < eps) oracle += word_mass(y, weights);
        auto m = ball_mass(mu, full, x, n, eps);
        CHECK(m.method == MassMethod::exact);
        CHECK(m.value == doctest::Approx(oracle).epsilon(1e-12));
      }
  }
}

TEST_CASE("uniform bernoulli ball at eps 1/2 has mass 2^-(n+2)") {
  System full({SystemKind::full_shift});
  auto mu = make_measure({MeasureKind::bernoulli}, full);
  Point x{-4, std::vector<double>(16, 1.0)};
  for (int n = 1; n <= 8; ++n) {
    auto m = ball_mass(mu, full, x, n, 0.5);
    CHECK(m.value == std::ldexp(1.0, -(n + 2)));
    CHECK(m.lower == m.upper);
    CHECK(m.std_error == 0.0);
    if (n <= 4) {
      auto mc = ball_mass_monte_carlo(mu, full, x, n, 0.5, {20000, 17});
      CHECK(std::abs(mc.value - m.value) <= 3.0 * mc.std_error + 1e-12);
    }
  }
  CHECK(ball_mass(mu, full, x, 3, 1.5).value == 1.0);
}

TEST_CASE("box bounds") {
  CHECK(box_window(0.125) == 5);
  CHECK(box_window(0.01) == 9);
  CHECK(box_window(std::ldexp(1.0, -6)) == 8);

  System iv({SystemKind::interval_shift, 2, {}, 12});
  auto leb = make_measure({MeasureKind::product_lebesgue}, iv);
  auto xs = leb.sample(99, 6, {-12, 12});
  for (double eps : {0.5, 0.3}) {
    const int l = box_window(eps);
    for (int n = 1; n <= 2; ++n)
      for (const auto& x : xs) {
        if (!x.window().contains(Window{-l, n - 1 + l})) continue;
        auto b = ball_mass(leb, iv, x, n, eps);
        CHECK(b.method == MassMethod::box_bounds);
        CHECK(b.lower <= b.value);
        CHECK(b.value <= b.upper);
        CHECK(b.log_lower >= (n + 2 * l) * std::log(eps / 6.0) - 1e-9);
        CHECK(b.log_upper <= n * std::log(4.0 * eps) + 1e-9);
        auto mc = ball_mass_monte_carlo(leb, iv, x, n, eps, {20000, 5});
        CHECK(mc.value >= b.lower - 3.0 * mc.std_error - 1e-12);
        CHECK(mc.value <= b.upper + 3.0 * mc.std_error + 1e-12);
      }
  }
  Point narrow{-2, std::vector<double>(5, 0.5)};
  CHECK_THROWS_AS(ball_mass(leb, iv, narrow, 2, 0.125), WindowError);
}

TEST_CASE("sampled invariance of cylinder and box events") {
  System full({SystemKind::full_shift});
  auto mu = make_measure({MeasureKind::bernoulli, {0.3, 0.7}}, full);
  auto pts = mu.sample(7, 40000, {-2, 4});
  auto freq = [&](const std::function<bool(const Point&)>& in) {
    double hits = 0;
    for (const auto& p : pts) hits += in(p);
    return hits / pts.size();
  };
  // E = {x_0 = 1, x_1 = 0}; T^-1 E = {x_1 = 1, x_2 = 0}
  const double pe = freq([](const Point& p) { return p.at(0) == 1 && p.at(1) == 0; });
  const double pt = freq([](const Point& p) { return p.at(1) == 1 && p.at(2) == 0; });
  const double se = std::sqrt(pe * (1 - pe) / pts.size() + pt * (1 - pt) / pts.size());
  CHECK(std::abs(pe - pt) <= 3 * se);
  CHECK(pe == doctest::Approx(0.21).epsilon(0.05));

  System iv({SystemKind::interval_shift, 2, {}, 3});
  auto leb = make_measure({MeasureKind::product_lebesgue}, iv);
  auto ys = leb.sample(8, 40000, {-3, 3});
  double a = 0, b = 0;
  for (const auto& y : ys) {
    a += y.at(0) < 0.3 && y.at(1) > 0.6;
    b += y.at(1) < 0.3 && y.at(2) > 0.6;
  }
  a /= ys.size();
  b /= ys.size();
  CHECK(std::abs(a - b) <= 3 * std::sqrt(2 * 0.12 * 0.88 / ys.size()));
}

TEST_CASE("empirical orbits") {
  System gm({SystemKind::sft, 2, {"11"}});
  auto emp = make_measure({MeasureKind::empirical, {}, 20000, 11, 8}, gm);
  const double L = 20000;
  for (std::uint64_t j = 0; j < 200; ++j) CHECK(gm.admissible(emp.orbit_point(j, {-8, 8})));
  // masses over all words on a range sum to 1; invariance up to 2 boundary hits
  double total = 0;
  for (const auto& w : all_words(0, 3)) {
    const double m = std::exp(emp.log_cylinder_mass(w, {0, 3}));
    total += m;
    Point shifted{1, w.coords};
    const double m1 = std::exp(emp.log_cylinder_mass(shifted, {1, 4}));
    CHECK(std::abs(m - m1) <= 2.0 / L + 1e-15);
    if (w.coords[1] == 1 && w.coords[2] == 1) CHECK(m == 0.0);
  }
  CHECK(total == doctest::Approx(1.0));

  System c({SystemKind::circle_doubling});
  auto orbit = make_measure({MeasureKind::empirical, {}, 5000, 2}, c);
  for (std::uint64_t j = 0; j + 1 < 100; ++j) {
    const double x = orbit.orbit_point(j, {0, 0}).coords[0];
    const double y = orbit.orbit_point(j + 1, {0, 0}).coords[0];
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(std::abs(std::fmod(2 * x, 1.0) - y) <= std::ldexp(1.0, -52));
  }
  auto m = ball_mass(orbit, c, Point{0, {0.3}}, 1, 0.1);
  CHECK(m.method == MassMethod::exact);
  CHECK(m.value == doctest::Approx(0.2).epsilon(0.1));
}

TEST_CASE("katok counts on bernoulli cylinders") {
  System full({SystemKind::full_shift});
  auto mu = make_measure({MeasureKind::bernoulli}, full);
  for (int n = 1; n <= 10; ++n) {
    auto r = katok_count(mu, full, n, 0.5, 0.5, KatokVariant::ball, SolveMode::exact);
    CHECK(r.value == (std::uint64_t{1} << (n + 1)) + 1);
    CHECK(r.bound == Bound::exact);
    CHECK(katok_count(mu, full, n, 0.5, std::ldexp(1.0, -(n + 3)), KatokVariant::ball, SolveMode::exact).value == 1);
  }
  // non-uniform weights against an expanded, sorted cell list
  auto skew = make_measure({MeasureKind::bernoulli, {0.3, 0.7}}, full);
  for (int n = 1; n <= 4; ++n)
    for (double eps : {0.5, 0.25})
      for (double delta : {0.3, 0.5, 0.7})
        for (auto variant : {KatokVariant::ball, KatokVariant::diameter}) {
          const int r = variant == KatokVariant::ball ? full.open_ball_radius(eps) : full.closed_ball_radius(eps);
          std::vector<double> masses;
          for (const auto& w : all_words(-r, n - 1 + r)) masses.push_back(word_mass(w, {0.3, 0.7}));
          std::sort(masses.rbegin(), masses.rend());
          std::uint64_t oracle = 0;
          double acc = 0;
          while (!(acc > delta)) acc += masses[oracle++];
          auto got = katok_count(skew, full, n, eps, delta, variant, SolveMode::exact);
          CHECK(got.value == oracle);
          CHECK(katok_count(skew, full, n, eps, delta, variant, SolveMode::greedy).value >= got.value);
        }
}

TEST_CASE("katok monotonicity") {
  System gm({SystemKind::sft, 2, {"11"}});
  auto emp = make_measure({MeasureKind::empirical, {}, 20000, 5, 16}, gm);
  for (int n = 1; n <= 6; ++n)
    for (double eps : {0.5, 0.25}) {
      std::uint64_t prev = 0;
      for (double delta : {0.3, 0.5, 0.7}) {
        auto v = katok_count(emp, gm, n, eps, delta, KatokVariant::ball, SolveMode::exact).value;
        CHECK(v >= prev);
        prev = v;
        if (n > 1) CHECK(v >= katok_count(emp, gm, n - 1, eps, delta, KatokVariant::ball, SolveMode::exact).value);
        CHECK(v <= katok_count(emp, gm, n, eps / 2, delta, KatokVariant::ball, SolveMode::exact).value);
      }
    }
}

TEST_CASE("sampled katok counts") {
  System iv({SystemKind::interval_shift, 2, {}, 2});
  auto leb = make_measure({MeasureKind::product_lebesgue}, iv);
  KatokOptions opt;
  opt.samples = 300;
  opt.centers = 24;
  opt.seed = 4;
  for (double delta : {0.1, 0.2}) {
    auto g = katok_count(leb, iv, 1, 0.8, delta, KatokVariant::ball, SolveMode::greedy, opt);
    auto e = katok_count(leb, iv, 1, 0.8, delta, KatokVariant::ball, SolveMode::exact, opt);
    CHECK(g.value >= e.value);
    CHECK(e.bound == Bound::upper_bound);
  }
  System c({SystemKind::circle_doubling});
  auto orbit = make_measure({MeasureKind::empirical, {}, 4000, 2}, c);
  opt.centers = 2;
  try {
    katok_count(orbit, c, 3, 0.01, 0.9, KatokVariant::ball, SolveMode::greedy, opt);
    FAIL("expected UnreachableError");
  } catch (const UnreachableError& e) {
    CHECK(e.achieved() < 0.9);
  }
}
