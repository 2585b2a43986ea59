#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <string>

#include "mdim/detail/cylinders.hpp"
#include "mdim/systems.hpp"

using namespace mdim;

namespace {

Point word(int lo, std::initializer_list<double> v) { return Point{lo, std::vector<double>(v)}; }

// brute force: every word of length len over {0,1} that avoids "11"
std::set<std::string> golden_words(int len) {
  std::set<std::string> out;
  for (int code = 0; code < (1 << len); ++code) {
    std::string w;
    for (int j = len - 1; j >= 0; --j) w += ((code >> j) & 1) ? '1' : '0';
    if (w.find("11") == std::string::npos) out.insert(w);
  }
  return out;
}

}  // namespace

TEST_CASE("symbolic distance is 2^-|i| at the nearest mismatch") {
  System s({SystemKind::full_shift});
  auto x = word(-2, {0, 0, 0, 0, 0});
  auto y = word(-2, {0, 0, 0, 1, 0});
  CHECK(s.distance(x, y) == 0.5);
  CHECK(s.distance(x, x) == 0.0);
  auto z = word(-2, {1, 0, 0, 1, 0});
  CHECK(s.distance(x, z) == 0.5);
  // after one shift the mismatch at index 1 sits at 0
  CHECK(s.distance(x, y, 1) == 1.0);
}

TEST_CASE("interval shift distance with truncation bound") {
  System s({SystemKind::interval_shift, 2, {}, 5});
  Point zeros{-5, std::vector<double>(11, 0.0)};
  Point ones{-5, std::vector<double>(11, 1.0)};
  auto d = s.measured_distance(zeros, ones);
  CHECK(d.value == doctest::Approx(3.0 - std::ldexp(1.0, -4)).epsilon(1e-15));
  CHECK(d.truncation == doctest::Approx(std::ldexp(1.0, -4)));
  CHECK(d.value + d.truncation == doctest::Approx(3.0));
}

TEST_CASE("precision demands a wide enough window") {
  SystemSpec spec{SystemKind::interval_shift, 2, {}, 3};
  spec.precision = 1e-3;
  try {
    System s(spec);
    FAIL("expected WindowError");
  } catch (const WindowError& e) {
    CHECK(e.required() == 11);
  }
}

TEST_CASE("circle doubling distance and map") {
  System s({SystemKind::circle_doubling});
  auto a = word(0, {0.1});
  auto b = word(0, {0.9});
  CHECK(s.distance(a, b) == doctest::Approx(0.2));
  auto y = apply_map(s, word(0, {0.3}), 2);
  CHECK(y.coords[0] == doctest::Approx(0.2));
  CHECK(s.distance(word(0, {0.25}), word(0, {0.5}), 1) == 0.5);
}

TEST_CASE("shift map moves the window and refuses to run off") {
  System s({SystemKind::full_shift});
  auto x = word(-1, {1, 0, 1});
  auto y = s.apply(x, 1);
  CHECK(y.at(0) == 1.0);
  CHECK(y.at(-1) == 0.0);
  CHECK_THROWS_AS(s.apply(x, 2), WindowError);
}

TEST_CASE("ball radii on the dyadic ladder") {
  System s({SystemKind::full_shift});
  CHECK(s.open_ball_radius(1.0) == 0);
  CHECK(s.closed_ball_radius(1.0) == -1);
  CHECK(s.open_ball_radius(0.5) == 1);
  CHECK(s.closed_ball_radius(0.5) == 0);
  CHECK(s.open_ball_radius(0.3) == 1);
  CHECK(s.closed_ball_radius(0.3) == 1);
  CHECK(s.open_ball_radius(2.0) == -1);
}

TEST_CASE("enumeration matches brute force") {
  System full({SystemKind::full_shift});
  CHECK(enumerate_points(full, {0, 2}, 0).size() == 8);

  System gm({SystemKind::sft, 2, {"11"}});
  for (int len = 1; len <= 10; ++len) {
    auto K = enumerate_points(gm, {0, len - 1}, 0);
    std::set<std::string> got;
    for (std::size_t i = 0; i < K.size(); ++i) {
      CHECK(gm.admissible(K.at(i)));
      got.insert(detail::restriction_key(K, i, K.window()));
    }
    CHECK(got.size() == K.size());
    CHECK(got == golden_words(len));
  }
  CHECK(enumerate_points(gm, {0, 3}, 0).size() == 8);

  System iv({SystemKind::interval_shift});
  auto M = enumerate_points(iv, {0, 0}, 4);
  REQUIRE(M.size() == 4);
  CHECK(M.coord(0, 0) == 0.125);
  CHECK(M.coord(1, 0) == 0.375);
  CHECK(M.coord(2, 0) == 0.625);
  CHECK(M.coord(3, 0) == 0.875);

  CHECK_THROWS_AS(enumerate_points(full, {0, 30}, 0, {1000}), BudgetError);
}

TEST_CASE("product indexing is lexicographic") {
  System full({SystemKind::full_shift, 3});
  auto K = enumerate_points(full, {-1, 1}, 0);
  CHECK(K.size() == 27);
  CHECK(detail::restriction_key(K, 0, K.window()) == "000");
  CHECK(detail::restriction_key(K, 1, K.window()) == "001");
  CHECK(detail::restriction_key(K, 3, K.window()) == "010");
  CHECK(detail::restriction_key(K, 26, K.window()) == "222");
}

TEST_CASE("restriction counts agree with direct hashing") {
  System gm({SystemKind::sft, 2, {"11"}});
  auto K = enumerate_points(gm, {-3, 6}, 0);
  for (int lo = -3; lo <= 0; ++lo)
    for (int hi = 0; hi <= 6; ++hi) {
      std::set<std::string> words;
      for (std::size_t i = 0; i < K.size(); ++i) {
        std::string w;
        for (int c = lo; c <= hi; ++c) w += static_cast<char>('0' + static_cast<int>(K.coord(i, c)));
        words.insert(w);
      }
      CHECK(detail::count_restrictions(K, {lo, hi}) == words.size());
    }
  CHECK_THROWS_AS(detail::count_restrictions(K, {-4, 0}), WindowError);
}
