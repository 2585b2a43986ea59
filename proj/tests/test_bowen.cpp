#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "mdim/bowen.hpp"
#include "mdim/solvers.hpp"

using namespace mdim;

namespace {

// Oracle d_n for binary words stored as strings over [lo, lo+len-1]; written
// from the definition, independent of the library metric.
double oracle_dn(const std::string& x, const std::string& y, int lo, int n) {
  const int hi = lo + static_cast<int>(x.size()) - 1;
  double dn = 0.0;
  for (int k = 0; k < n; ++k) {
    double d = 0.0;
    for (int i = lo; i <= hi; ++i) {
      const int j = i - k;  // coordinate j of T^k x is coordinate i of x
      if (x[i - lo] != y[i - lo]) d = std::max(d, std::ldexp(1.0, -std::abs(j)));
    }
    dn = std::max(dn, d);
  }
  return dn;
}

std::vector<std::string> binary_words(int len) {
  std::vector<std::string> out;
  for (int code = 0; code < (1 << len); ++code) {
    std::string w;
    for (int j = len - 1; j >= 0; --j) w += ((code >> j) & 1) ? '1' : '0';
    out.push_back(w);
  }
  return out;
}

struct OracleCounts {
  std::size_t separated;
  std::size_t spanning;
};

OracleCounts oracle_counts(const std::vector<std::string>& words, int lo, int n, double eps) {
  const std::size_t N = words.size();
  solvers::Graph g(N);
  std::vector<solvers::Bitset> balls(N, solvers::Bitset(N));
  for (std::size_t i = 0; i < N; ++i) {
    balls[i].set(i);
    for (std::size_t j = i + 1; j < N; ++j)
      if (oracle_dn(words[i], words[j], lo, n) <= eps) {
        g.add_edge(i, j);
        balls[i].set(j);
        balls[j].set(i);
      }
  }
  return {solvers::max_independent_set(g).value, solvers::min_set_cover(balls, N)->value};
}

Point pt(int lo, std::initializer_list<double> v) { return Point{lo, std::vector<double>(v)}; }

}  // namespace

TEST_CASE("bowen distance") {
  System s({SystemKind::full_shift});
  auto x = pt(0, {0, 0, 0, 0});
  auto y = pt(0, {0, 0, 0, 1});
  CHECK(bowen_distance(s, x, y, 1) == 0.125);
  CHECK(bowen_distance(s, x, y, 4) == 1.0);
  CHECK(bowen_distance(s, x, x, 4) == 0.0);
  CHECK_THROWS_AS(bowen_distance(s, x, y, 5), WindowError);
}

TEST_CASE("full shift closed form matches the oracle and 2^(n+2m-2)") {
  System s({SystemKind::full_shift});
  for (int m = 1; m <= 3; ++m)
    for (int n = 1; n <= 4; ++n) {
      const double eps = std::ldexp(1.0, -m);
      const Window w{-m, n - 1 + m};
      if (w.size() > 10) continue;
      auto K = enumerate_points(s, w, 0);
      const std::uint64_t formula = std::uint64_t{1} << (n + 2 * m - 2);
      auto sep = separated_count(s, K, n, eps, SolveMode::exact);
      auto span = spanning_count(s, K, n, eps, SolveMode::exact);
      CHECK(sep.value == formula);
      CHECK(span.value == formula);
      CHECK(sep.bound == Bound::exact);
      CHECK(sep.method == CountMethod::closed_form);
      auto oracle = oracle_counts(binary_words(w.size()), w.lo, n, eps);
      CHECK(oracle.separated == formula);
      CHECK(oracle.spanning == formula);
    }
}

TEST_CASE("symbolic closed form equals branch and bound") {
  System gm({SystemKind::sft, 2, {"11"}});
  System full({SystemKind::full_shift, 3});
  for (const System* s : {&gm, &full})
    for (int n = 1; n <= 4; ++n)
      for (double eps : {1.0, 0.5, 0.3, 0.25}) {
        const Window w{-2, n + 1};
        auto K = enumerate_points(*s, w, 0);
        if (K.size() > 800) continue;
        for (auto mode : {SolveMode::exact, SolveMode::greedy}) {
          auto closed = separated_count(*s, K, n, eps, mode);
          auto search = separated_count_search(*s, K, n, eps, mode);
          CHECK(closed.value == search.value);
          auto closed_r = spanning_count(*s, K, n, eps, mode);
          auto search_r = spanning_count_search(*s, K, n, eps, mode);
          CHECK(closed_r.value == search_r.value);
        }
      }
}

TEST_CASE("separated and spanning chain r_n <= s_n <= r_n(eps/2)") {
  System gm({SystemKind::sft, 2, {"11"}});
  System circle({SystemKind::circle_doubling});
  auto K = enumerate_points(gm, {-4, 8}, 0);
  auto C = enumerate_points(circle, {0, 0}, 64);
  for (int n = 1; n <= 4; ++n)
    for (double eps : {0.5, 0.25, 0.125, 0.1}) {
      for (auto [s, set] : {std::pair{&gm, &K}, std::pair{&circle, &C}}) {
        auto r = spanning_count(*s, *set, n, eps, SolveMode::exact).value;
        auto sep = separated_count(*s, *set, n, eps, SolveMode::exact).value;
        auto r2 = spanning_count(*s, *set, n, eps / 2, SolveMode::exact).value;
        CHECK(r <= sep);
        CHECK(sep <= r2);
      }
    }
}

TEST_CASE("trivial instances") {
  System s({SystemKind::full_shift});
  auto one = FinitePointSet::from_points({pt(-2, {0, 1, 0, 1, 1})}, Exactness::grid_sample, 0.0);
  CHECK(separated_count(s, one, 2, 0.1, SolveMode::exact).value == 1);
  CHECK(spanning_count(s, one, 2, 0.1, SolveMode::exact).value == 1);
  auto K = enumerate_points(s, {-3, 6}, 0);
  auto big = separated_count(s, K, 3, 1.0, SolveMode::exact);
  CHECK(big.value == 1);
  CHECK(big.bound == Bound::exact);
}

TEST_CASE("circle doubling closed forms equal branch and bound") {
  System c({SystemKind::circle_doubling});
  CHECK(spanning_count(c, enumerate_points(c, {0, 0}, 64), 1, 0.25, SolveMode::exact).value == 2);
  for (int m : {8, 16, 32, 64})
    for (int n = 1; n <= 4; ++n)
      for (double eps : {0.4, 0.2, 0.1, 0.05, 0.03}) {
        auto K = enumerate_points(c, {0, 0}, m);
        auto closed = separated_count(c, K, n, eps, SolveMode::exact);
        auto search = separated_count_search(c, K, n, eps, SolveMode::exact);
        CHECK(closed.value == search.value);
        auto closed_r = spanning_count(c, K, n, eps, SolveMode::exact);
        auto search_r = spanning_count_search(c, K, n, eps, SolveMode::exact);
        CHECK(closed_r.value == search_r.value);
        auto greedy = separated_count(c, K, n, eps, SolveMode::greedy);
        auto greedy_search = separated_count_search(c, K, n, eps, SolveMode::greedy);
        CHECK(greedy.value == greedy_search.value);
      }
}

TEST_CASE("greedy brackets exact") {
  System iv({SystemKind::interval_shift, 2, {}, 2});
  auto K = enumerate_points(iv, {-1, 2}, 3);
  for (int n = 1; n <= 3; ++n)
    for (double eps : {0.6, 0.4, 0.3}) {
      auto gs = separated_count(iv, K, n, eps, SolveMode::greedy);
      auto es = separated_count(iv, K, n, eps, SolveMode::exact);
      auto gr = spanning_count(iv, K, n, eps, SolveMode::greedy);
      auto er = spanning_count(iv, K, n, eps, SolveMode::exact);
      CHECK(gs.value <= es.value);
      CHECK(er.value <= gr.value);
      CHECK(gs.bound == Bound::lower_bound);
      CHECK(gr.bound == Bound::upper_bound);
    }
}

TEST_CASE("monotone in eps and n") {
  System gm({SystemKind::sft, 2, {"11"}});
  auto K = enumerate_points(gm, {-4, 9}, 0);
  for (int n = 1; n <= 5; ++n) {
    std::uint64_t prev = 0;
    for (double eps : {1.0, 0.5, 0.25, 0.125}) {
      auto v = separated_count(gm, K, n, eps, SolveMode::exact).value;
      CHECK(v >= prev);
      prev = v;
      if (n > 1) CHECK(v >= separated_count(gm, K, n - 1, eps, SolveMode::exact).value);
    }
  }
}

TEST_CASE("interval shift sub-lattice is a separated set") {
  System iv({SystemKind::interval_shift, 2, {}, 3});
  const int n = 2;
  const double eps = 0.3;
  auto big = grid_points(iv, {-3, 3}, 8);
  CHECK(big.size() > SolverBudget{}.max_points);
  auto lattice = separated_count(iv, big, n, eps, SolveMode::exact);
  CHECK(lattice.bound == Bound::lower_bound);
  // midpoints of an 8-grid with gaps > 0.3: 1/16, 7/16, 13/16 -> 3 per coordinate
  CHECK(lattice.value == 9);
  auto sub = product_lattice({-3, 3}, {0, n - 1}, {1.0 / 16, 7.0 / 16, 13.0 / 16}, 1.0 / 16);
  auto direct = separated_count_search(iv, sub, n, eps, SolveMode::exact);
  CHECK(direct.value == 9);

  auto huge = grid_points(iv, {-3, 3}, 1024);
  CHECK_FALSE(huge.indexable());
  // 1/2048 and the first midpoints past +0.3, +0.6, +0.9
  CHECK(separated_count(iv, huge, n, eps, SolveMode::exact).value == 16);
}

TEST_CASE("exact search respects budgets") {
  System s({SystemKind::interval_shift, 2, {}, 2});
  auto K = enumerate_points(s, {-1, 2}, 4);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < K.size(); ++i) pts.push_back(K.at(i));
  auto listed = FinitePointSet::from_points(pts, Exactness::grid_sample, 0.0);
  CHECK_THROWS_AS(separated_count(s, listed, 1, 0.3, SolveMode::exact, {10'000'000, 16}), BudgetError);
}
