#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "mdim/rates.hpp"

using namespace mdim;

namespace {

const double kLog2 = std::log(2.0);

std::vector<int> range(int lo, int hi, int step = 1) {
  std::vector<int> v;
  for (int n = lo; n <= hi; n += step) v.push_back(n);
  return v;
}

const RateOptions kIncrement{0.5, RateStatistic::increment};

}  // namespace

TEST_CASE("rate extraction on closed-form ladders") {
  std::vector<std::pair<int, double>> pure, offset, flat;
  for (int n = 1; n <= 10; ++n) {
    pure.emplace_back(n, std::ldexp(1.0, n));
    offset.emplace_back(n, std::ldexp(1.0, n + 3));
    flat.emplace_back(n, 1.0);
  }
  for (auto mode : {RateMode::upper, RateMode::lower}) {
    auto r = rate_from_counts(pure, mode);
    CHECK(r.value == doctest::Approx(kLog2));
    CHECK(r.slope_fit.residual == doctest::Approx(0.0));
    CHECK(rate_from_counts(flat, mode).value == 0.0);
  }
  auto up = rate_from_counts(offset, RateMode::upper);
  auto lo = rate_from_counts(offset, RateMode::lower);
  // tail = last 5 entries, n = 6..10
  CHECK(up.tail_stat == doctest::Approx(9.0 / 6.0 * kLog2));
  CHECK(lo.tail_stat == doctest::Approx(13.0 / 10.0 * kLog2));
  CHECK(lo.value <= up.value);
  CHECK(up.slope_fit.slope == doctest::Approx(kLog2));
  CHECK(up.increment_stat == doctest::Approx(kLog2));
  CHECK(up.slope_gap() == doctest::Approx(up.value - kLog2));
  CHECK(up.diagnostics.size() == 10);
  CHECK(up.diagnostics.front().raw == 16);
  CHECK_THROWS_AS(rate_from_counts({{1, 2.0}, {2, 4.0}}, RateMode::upper), std::invalid_argument);
  CHECK_THROWS_AS(rate_from_counts({{1, 2.0}, {2, 0.5}, {3, 8.0}}, RateMode::upper), std::invalid_argument);
}

TEST_CASE("bound tags propagate") {
  std::vector<LogCount> c(3);
  for (int i = 0; i < 3; ++i) c[i].n = i + 1;
  c[1].bound = Bound::lower_bound;
  CHECK(rate_from_log_counts(c, RateMode::upper).bound == Bound::lower_bound);
  c[2].bound = Bound::upper_bound;
  CHECK_THROWS_AS(rate_from_log_counts(c, RateMode::upper), std::invalid_argument);
}

TEST_CASE("growth rates on the full shift") {
  System full({SystemKind::full_shift, 2, {}, 9});
  auto K = enumerate_points(full, full.base_window(), 0);
  const auto ladder = range(2, 8);
  for (int m = 1; m <= 3; ++m) {
    const double eps = std::ldexp(1.0, -m);
    for (auto kind : {CountKind::separated, CountKind::spanning}) {
      auto r = growth_rate(full, K, eps, ladder, kind, RateMode::upper);
      CHECK(r.bound == Bound::exact);
      CHECK(r.increment_stat == doctest::Approx(kLog2));
      // counts 2^{n+2m-2}; tail n = 5..8, max at n = 5
      CHECK(r.tail_stat == doctest::Approx((5.0 + 2 * m - 2) / 5.0 * kLog2));
      for (const auto& d : r.diagnostics) CHECK(d.raw == (std::uint64_t{1} << (d.n + 2 * m - 2)));
    }
  }
  CHECK(growth_rate(full, K, 1.5, ladder, CountKind::separated, RateMode::upper).value == 0.0);
}

TEST_CASE("mdim slopes") {
  System full({SystemKind::full_shift, 2, {}, 9});
  auto K = enumerate_points(full, full.base_window(), 0);
  GrowthOptions inc;
  inc.rate = kIncrement;
  auto flat = mdim_estimate(full, K, {0.5, 0.25, 0.125}, range(2, 8), RateMode::upper, inc);
  REQUIRE(flat.has_slope);
  CHECK(std::abs(flat.slope) < 1e-9);

  System iv({SystemKind::interval_shift, 2, {}, 8, 1024});
  auto grid = grid_points(iv, iv.base_window(), 1024);
  auto est = mdim_estimate(iv, grid, {0.125, 0.0625, 0.03125, 0.015625}, range(2, 8), RateMode::upper, inc);
  REQUIRE(est.has_slope);
  CHECK(est.slope > 0.8);
  CHECK(est.slope < 1.2);
  for (const auto& [eps, r] : est.per_eps) CHECK(r.bound == Bound::lower_bound);

  auto coarse = grid_points(iv, iv.base_window(), 16);
  auto dropped = mdim_estimate(iv, coarse, {0.125, 0.0625, 0.03125}, range(2, 4), RateMode::upper, inc);
  CHECK(dropped.per_eps.size() == 1);
  CHECK(dropped.warnings.size() == 2);
  CHECK_FALSE(dropped.has_slope);
}

TEST_CASE("Katok entropy of the uniform Bernoulli shift") {
  System full({SystemKind::full_shift});
  auto mu = make_measure({MeasureKind::bernoulli, {0.5, 0.5}}, full);
  KatokRateOptions opt;
  opt.rate = kIncrement;
  auto r = katok_entropy(mu, full, 0.5, 0.5, range(2, 12), RateMode::upper, opt);
  for (const auto& d : r.diagnostics) CHECK(d.raw == (std::uint64_t{1} << (d.n + 1)) + 1);
  CHECK(r.value == doctest::Approx(kLog2).epsilon(1e-3));
  CHECK(r.bound == Bound::exact);
  // delta below one ball: every count is 1
  CHECK(katok_entropy(mu, full, 0.5, 1e-9, range(2, 6), RateMode::upper, opt).value == 0.0);
}

TEST_CASE("Katok rates approach the Shannon entropy as eps shrinks") {
  System full({SystemKind::full_shift});
  auto mu = make_measure({MeasureKind::bernoulli, {0.3, 0.7}}, full);
  KatokRateOptions opt;
  opt.rate = kIncrement;
  const auto ladder = range(8, 40, 4);
  const double h = mu.shannon_entropy();
  for (int m = 1; m <= 3; ++m) {
    auto r = katok_entropy(mu, full, std::ldexp(1.0, -m), 0.5, ladder, RateMode::upper, opt);
    const double err = std::abs(r.value - h);
    CHECK(err < 0.05);
  }
}

TEST_CASE("Brin-Katok on exact cylinders and box bounds") {
  System full({SystemKind::full_shift});
  auto mu = make_measure({MeasureKind::bernoulli, {0.5, 0.5}}, full);
  BrinKatokOptions opt;
  opt.rate = kIncrement;
  auto bk = brin_katok_entropy(mu, full, 0.5, 8, range(2, 10), RateMode::upper, opt);
  CHECK(bk.per_point.size() == 8);
  for (const auto& [x, r] : bk.per_point) {
    CHECK(r.value == doctest::Approx(kLog2));
    for (const auto& d : r.diagnostics) CHECK(d.log_value == doctest::Approx((d.n + 2) * kLog2));
  }
  CHECK(bk.spread == doctest::Approx(0.0));
  CHECK(brin_katok_entropy(mu, full, 3.0, 8, range(2, 4), RateMode::upper).center == 0.0);

  System iv({SystemKind::interval_shift, 2, {}, 8, 64});
  auto leb = make_measure({MeasureKind::product_lebesgue}, iv);
  auto box = brin_katok_entropy(leb, iv, 0.01, 8, {1024, 2048, 4096, 8192}, RateMode::upper);
  CHECK(box.center > std::log(25.0));
  CHECK(box.center < std::log(300.0));
  CHECK(box.center_lower <= box.center);
  CHECK(box.center <= box.center_upper);
  CHECK(box.per_point.front().second.estimated);
}

TEST_CASE("Shapira entropy") {
  System full({SystemKind::full_shift});
  auto mu = make_measure({MeasureKind::bernoulli, {0.5, 0.5}}, full);
  auto K = enumerate_points(full, {0, 11}, 0);
  auto cover = cylinder_cover(full, K, 1);
  ShapiraRateOptions opt;
  opt.rate = kIncrement;
  auto est = shapira_entropy(mu, full, cover, K, 0.5, range(2, 12), opt);
  for (const auto& d : est.upper.diagnostics) CHECK(d.raw == (std::uint64_t{1} << (d.n - 1)));
  CHECK(est.upper.value == doctest::Approx(kLog2));
  CHECK(est.gap == doctest::Approx(0.0));
  // delta changes only the constant in front of 2^n
  for (double delta : {0.3, 0.7}) {
    auto other = shapira_entropy(mu, full, cover, K, delta, range(2, 12), opt);
    CHECK(std::abs(other.upper.value - est.upper.value) < 2.0 / (delta * 2048.0));
  }

  Cover one;
  one.cells.push_back({K.at(0), 2.0});
  CHECK(shapira_entropy(mu, full, one, K, 0.5, range(2, 6)).upper.value == 0.0);
}

TEST_CASE("local entropy on cylinder neighborhoods") {
  System full({SystemKind::full_shift, 2, {}, 9});
  auto K = enumerate_points(full, full.base_window(), 0);
  GrowthOptions opt;
  opt.rate = kIncrement;
  const auto S = growth_rate(full, K, 0.25, range(2, 8), CountKind::separated, RateMode::upper, opt);
  for (std::size_t p : {std::size_t{0}, std::size_t{12345}}) {
    auto h = local_entropy_at(full, K, K.at(p), 0.25, {2.0, 0.5, 0.25}, range(2, 8), CountKind::separated,
                              RateMode::upper, opt);
    CHECK(h.per_radius.size() == 3);
    for (const auto& [rho, r] : h.per_radius) CHECK(r.value == doctest::Approx(kLog2));
    CHECK(h.rate.value <= S.value + 1e-12);
    CHECK(h.rate.value == doctest::Approx(S.value));
  }
}
