#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdim/measures.hpp"
#include "mdim/rates.hpp"
#include "mdim/systems.hpp"

namespace mdim::cli {

/// Invalid configuration; line is 0 for whole-file problems.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string out = "out";
  int jobs = 1;
  std::vector<std::string> tasks;

  SystemSpec system;
  std::optional<MeasureSpec> measure;

  std::vector<double> eps;  // default 2^-3..2^-7
  std::vector<int> n;       // default 2..10 symbolic, 2..8 otherwise
  std::vector<double> delta = {0.5};
  std::vector<int> bk_n;    // default: n
  std::vector<double> radius;  // local entropy neighborhoods; default 2, eps, eps/2
  RateMode mode = RateMode::upper;
  RateStatistic statistic = RateStatistic::tail;
  double tail_fraction = 0.5;

  std::uint64_t samples = 4096;
  std::uint64_t nodes = 10'000'000;
  std::size_t max_points = 4096;
  std::uint64_t enumerate = std::uint64_t{1} << 22;
  int points = 16;

  std::string cover = "spanning";  // spanning | cylinder
  int generation = 1;

  std::vector<double> verify_eps = {0.5, 0.25, 0.125};
  std::vector<int> verify_n = {2, 3, 4, 5, 6, 7, 8};
  std::vector<double> verify_delta = {0.3, 0.5, 0.7};
  bool verify_statistical = true;

  std::vector<double> example_eps = {0.125, 0.0625, 0.03125, 0.015625};
  int example_grid = 1024;
  int example_window = 8;
  std::vector<int> example_n = {2, 3, 4, 5, 6, 7, 8};
  std::vector<int> example_bk_n = {1024, 2048, 4096, 8192};
};

inline const std::vector<std::string>& known_tasks() {
  static const std::vector<std::string> tasks = {"growth",        "mdim",   "katok",  "brin_katok",
                                                 "shapira",       "local_entropy", "verify", "example"};
  return tasks;
}

ExperimentConfig parse_config(std::istream& in, const std::string& source);
ExperimentConfig load_config(const std::string& path);

/// Effective settings that determine results (seed, out and jobs excluded).
std::string canonical_form(const ExperimentConfig& cfg);
/// FNV-1a 64 of the canonical form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// "0.5", "2^-3", "1e-2".
double parse_real(const std::string& s);
/// "2..8", "2, 4, 8", "1024..8192*2" (geometric with factor).
std::vector<int> parse_int_list(const std::string& s);
/// "0.5, 0.25" or "2^-3..2^-7" (powers of two, both ends included).
std::vector<double> parse_real_list(const std::string& s);

}  // namespace mdim::cli
