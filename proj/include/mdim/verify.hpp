#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mdim/bowen.hpp"
#include "mdim/measures.hpp"
#include "mdim/rates.hpp"
#include "mdim/systems.hpp"

namespace mdim {

enum class Verdict { exact_pass, statistical_pass, fail };
const char* to_string(Verdict v);

/// One evaluation of left <= middle <= right. Open sides are +-infinity.
struct ChainInstance {
  std::string parameters;
  double left = 0.0;
  double middle = 0.0;
  double right = 0.0;
  Verdict verdict = Verdict::exact_pass;
  double z = 0.0;  // statistical chains: worst violation in standard errors
  std::string note;
};

struct ChainReport {
  std::string chain_id;
  std::string statement;
  std::vector<ChainInstance> instances;
  Verdict verdict = Verdict::exact_pass;  // worst instance
  double z = 0.0;

  std::size_t violations() const;
};

struct SuiteSystem {
  std::string name;
  SystemSpec system;
  MeasureSpec measure;
};

/// Symbolic systems with exact cylinder masses; the golden-mean shift
/// carries its empirical orbit measure.
std::vector<SuiteSystem> default_suite_systems();

struct SuiteConfig {
  std::vector<SuiteSystem> systems = default_suite_systems();
  std::vector<double> eps = {0.5, 0.25, 0.125};
  std::vector<int> n_ladder = {2, 3, 4, 5, 6, 7, 8};
  std::vector<double> deltas = {0.3, 0.5, 0.7};
  /// Ladder for rate probes built on closed-form counts (Katok classes, cylinder masses).
  std::vector<int> long_ladder = {20, 24, 28, 32, 36, 40};
  double rate_tolerance = 1e-9;
  /// interval_shift + product_lebesgue Monte Carlo chains
  bool statistical = true;
  std::vector<double> statistical_eps = {0.25, 0.125};
  std::vector<int> statistical_n = {1, 2, 3};
  std::uint64_t samples = 20000;
  SolverBudget budget;
  std::uint64_t seed = 1;
  int jobs = 1;
};

/// Every chain on every compatible instance. Failures are reported, not thrown.
std::vector<ChainReport> run_inequality_suite(const SuiteConfig& config);

/// Greedy vs exact sandwiches over the same symbolic instances.
std::vector<ChainReport> run_greedy_sandwich(const SuiteConfig& config);

struct ExampleConfig {
  std::vector<double> eps_ladder = {0.125, 0.0625, 0.03125, 0.015625};
  int grid = 1024;
  int window = 8;
  std::vector<int> n_ladder = {2, 3, 4, 5, 6, 7, 8};
  std::vector<int> bk_ladder = {1024, 2048, 4096, 8192};
  int points = 16;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct ExampleRow {
  double eps = 0.0;
  int ell = 0;
  double bk = 0.0;  // median over points of the box-path estimate
  double bk_lower = 0.0;
  double bk_upper = 0.0;
  double bk_spread = 0.0;
  double band_lower = 0.0;  // log(1/(4 eps))
  double band_upper = 0.0;  // log(3/eps)
  double S = 0.0;
  double S_over_log = 0.0;
  Bound S_bound = Bound::exact;
  bool in_band = false;  // bk within [band_lower - 0.05, band_upper + 0.05]
};

struct ExampleReport {
  std::vector<ExampleRow> rows;
  double bk_slope = 0.0;  // bk against log(1/eps)
  double S_slope = 0.0;   // S against log(1/eps), the mdim estimate
  MdimEstimate mdim;
  std::vector<LocalEntropyEstimate> bk;
};

/// The interval shift with product Lebesgue measure. Throws WindowError naming
/// l(eps_min) when the window is too small.
ExampleReport reproduce_example(const ExampleConfig& config);

}  // namespace mdim
