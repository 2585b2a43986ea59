#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "json.hpp"
#include "mdim/random.hpp"
#include "mdim/verify.hpp"
#include "runner.hpp"

using namespace mdim;

namespace {

const double kLog2 = std::log(2.0);

struct Result {
  bool pass = false;
  std::string detail;
};

std::vector<int> range(int lo, int hi, int step = 1) {
  std::vector<int> v;
  for (int i = lo; i <= hi; i += step) v.push_back(i);
  return v;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

RateOptions increment() {
  RateOptions r;
  r.statistic = RateStatistic::increment;
  return r;
}

std::filesystem::path scratch() {
  return std::filesystem::temp_directory_path() / "mdim_acceptance";
}

cli::ExperimentConfig interval_run(const std::string& out) {
  std::istringstream in(
      "seed = 2024\n"
      "tasks = mdim\n"
      "[system]\nkind = interval_shift\nwindow = 8\ngrid = 1024\n"
      "[ladder]\neps = 2^-3..2^-6\nn = 2..8\nstatistic = increment\n");
  auto cfg = cli::parse_config(in, "interval_run");
  cfg.out = out;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

Result criterion_1() {
  const auto dir = scratch() / "criterion_1";
  std::filesystem::remove_all(dir);
  std::ostringstream log;
  const auto outcome = cli::run_experiment(interval_run(dir.string()), log);
  if (outcome.exit_code != 0) return {false, "run exited with " + std::to_string(outcome.exit_code)};
  std::ifstream summary(dir / "summary.jsonl");
  std::string line;
  while (std::getline(summary, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j.value("id", "") != "mdim") continue;
    if (j["slope"].is_null()) return {false, "no slope"};
    const double slope = j["slope"].get<double>();
    return {slope >= 0.8 && slope <= 1.2, "slope " + fmt("%.6f", slope) + " (grid 1024, window 8)"};
  }
  return {false, "no mdim summary"};
}

Result criterion_2() {
  ExampleConfig cfg;
  cfg.eps_ladder = {0.125, 0.0625, 0.03125, 0.015625};
  const auto rep = reproduce_example(cfg);
  bool ok = !rep.rows.empty();
  std::string detail;
  for (const auto& r : rep.rows) {
    ok = ok && r.in_band;
    detail += fmt("eps=%g: ", r.eps) + fmt("%.4f in ", r.bk) + fmt("[%.4f, ", r.band_lower - 0.05) +
              fmt("%.4f]; ", r.band_upper + 0.05);
  }
  return {ok, detail};
}

Result criterion_3() {
  SuiteConfig cfg;
  cfg.statistical = false;
  const auto reports = run_inequality_suite(cfg);
  bool ok = true;
  std::string detail;
  std::size_t instances = 0;
  for (const auto& r : reports) {
    instances += r.instances.size();
    if (r.violations() || r.verdict == Verdict::fail) {
      ok = false;
      detail += r.chain_id + " " + std::to_string(r.violations()) + "/" + std::to_string(r.instances.size()) +
                " violated; ";
    }
  }
  return {ok, std::to_string(reports.size()) + " chains, " + std::to_string(instances) + " instances; " +
                  (detail.empty() ? "no violations" : detail)};
}

Result criterion_4() {
  System full({SystemKind::full_shift});
  const auto mu = make_measure({MeasureKind::bernoulli, {0.5, 0.5}}, full);
  const double eps = 0.125;
  std::string detail;
  bool ok = true;

  KatokRateOptions kopt;
  kopt.rate = increment();
  std::vector<double> katok;
  for (double delta : {0.3, 0.5, 0.7}) {
    katok.push_back(katok_entropy(mu, full, eps, delta, range(20, 40, 4), RateMode::upper, kopt).value);
    ok = ok && std::abs(katok.back() - kLog2) <= 0.02;
  }
  const double spread = *std::max_element(katok.begin(), katok.end()) - *std::min_element(katok.begin(), katok.end());
  ok = ok && spread <= 1e-6;
  detail += "katok " + fmt("%.6f", katok[1]) + " (delta spread " + fmt("%.2e", spread) + "); ";

  BrinKatokOptions bopt;
  bopt.rate = increment();
  const auto bk = brin_katok_entropy(mu, full, eps, 16, range(20, 40, 4), RateMode::upper, bopt);
  ok = ok && std::abs(bk.center - kLog2) <= 0.02;
  detail += "brin_katok " + fmt("%.6f", bk.center) + "; ";

  const auto K = enumerate_points(full, {0, 11}, 0);
  const auto cover = cylinder_cover(full, K, 1);
  ShapiraRateOptions sopt;
  sopt.rate = increment();
  const auto sh = shapira_entropy(mu, full, cover, K, 0.5, range(2, 12), sopt);
  ok = ok && std::abs(sh.upper.value - kLog2) <= 0.02;
  detail += "shapira " + fmt("%.6f", sh.upper.value) + "; log 2 = " + fmt("%.6f", kLog2);
  return {ok, detail};
}

Result criterion_5() {
  GrowthOptions opt;
  opt.rate = increment();
  System full({SystemKind::full_shift, 2, {}, 6});
  const auto K = enumerate_points(full, {-4, 11}, 0);
  const auto fs = mdim_estimate(full, K, {0.5, 0.25, 0.125, 0.0625}, range(2, 8), RateMode::upper, opt);

  System circle({SystemKind::circle_doubling, 2, {}, 0, 1 << 16});
  const auto grid = enumerate_points(circle, {0, 0}, 1 << 16);
  const auto cd =
      mdim_estimate(circle, grid, {0.125, 0.0625, 0.03125, 0.015625}, range(2, 8), RateMode::upper, opt);
  const bool ok = fs.has_slope && cd.has_slope && std::abs(fs.slope) <= 0.1 && std::abs(cd.slope) <= 0.1;
  return {ok, "full_shift " + fmt("%.6f", fs.slope) + ", circle_doubling " + fmt("%.6f", cd.slope)};
}

Result criterion_6() {
  SuiteConfig cfg;
  cfg.statistical = false;
  std::size_t violations = 0, instances = 0;
  std::string detail;
  for (const auto& r : run_greedy_sandwich(cfg)) {
    violations += r.violations();
    instances += r.instances.size();
    detail += r.chain_id + " " + std::to_string(r.violations()) + "/" + std::to_string(r.instances.size()) + "; ";
  }
  return {violations == 0 && instances > 0, detail};
}

Result criterion_7() {
  System full({SystemKind::full_shift, 2, {}, 9});
  const auto K = enumerate_points(full, full.base_window(), 0);
  GrowthOptions opt;
  opt.rate = increment();
  const double eps = 0.25;
  const auto ladder = range(2, 8);
  const double S = growth_rate(full, K, eps, ladder, CountKind::separated, RateMode::upper, opt).value;
  const double R = growth_rate(full, K, eps, ladder, CountKind::spanning, RateMode::upper, opt).value;
  Rng rng(child_seed(7, 0));
  double sup_h = -1.0, sup_ht = -1.0;
  const std::vector<double> radii = {2.0, eps, eps / 2.0};
  for (int p = 0; p < 16; ++p) {
    const auto x = K.at(uniform_index(rng, K.size()));
    sup_h = std::max(sup_h, local_entropy_at(full, K, x, eps, radii, ladder, CountKind::separated,
                                             RateMode::upper, opt).rate.value);
    sup_ht = std::max(sup_ht, local_entropy_at(full, K, x, eps, radii, ladder, CountKind::spanning,
                                               RateMode::upper, opt).rate.value);
  }
  const bool ok = std::abs(sup_h - S) <= 1e-6 && sup_ht >= R - 1e-9;
  return {ok, "sup h " + fmt("%.9f", sup_h) + " vs S " + fmt("%.9f", S) + "; sup h~ " + fmt("%.9f", sup_ht) +
                  " >= R " + fmt("%.9f", R)};
}

Result criterion_8() {
  const auto a = scratch() / "run_a";
  const auto b = scratch() / "run_b";
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  std::ostringstream log;
  cli::run_experiment(interval_run(a.string()), log);
  const auto outcome = cli::run_experiment(interval_run(b.string()), log);
  bool ok = !outcome.files.empty();
  std::string detail;
  for (const auto& f : outcome.files) {
    const bool same = slurp(a / f) == slurp(b / f) && !slurp(a / f).empty();
    ok = ok && same;
    detail += f + (same ? " identical; " : " DIFFERS; ");
  }
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  int only = 0;
  app.add_option("--only", only, "Run a single criterion")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
      {"interval shift mean dimension slope in [0.8, 1.2]", criterion_1},
      {"interval shift Brin-Katok box estimate inside its band", criterion_2},
      {"exact symbolic inequality chains, zero violations", criterion_3},
      {"Katok, Brin-Katok and Shapira rates within 0.02 of log 2", criterion_4},
      {"zero mean dimension for full shift and doubling map", criterion_5},
      {"greedy versus exact sandwich, zero violations", criterion_6},
      {"sup of local entropies equals the global rate", criterion_7},
      {"byte-identical reruns", criterion_8},
  };
  std::filesystem::create_directories(scratch());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i) + 1 != only) continue;
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    failed += !r.pass;
    std::cout << "criterion " << i + 1 << ": " << (r.pass ? "PASS" : "FAIL") << "  " << criteria[i].first
              << "  [" << r.detail << "]" << std::endl;
  }
  return failed ? 1 : 0;
}
