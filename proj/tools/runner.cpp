#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "mdim/detail/cylinders.hpp"
#include "mdim/detail/parallel.hpp"
#include "mdim/errors.hpp"
#include "mdim/random.hpp"
#include "mdim/verify.hpp"

namespace mdim::cli {

namespace {

using json = nlohmann::ordered_json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Row {
  std::string estimate;
  double eps = kNaN;
  int n = -1;
  double delta = kNaN;
  long point = -1;
  std::string kind;
  std::optional<std::uint64_t> raw;
  double log_count = kNaN;
  std::string bound;
  double rate = kNaN;
  std::string mode;
  std::string statistic;
  double std_error = kNaN;
};

struct TaskOutput {
  std::string file;
  std::string header;
  std::vector<std::string> lines;
  std::vector<json> summary;
  std::string status = "ok";
  std::string message;
  int exit_code = kExitOk;
};

struct Context {
  const ExperimentConfig& cfg;
  std::string hash;
  System system;
  std::optional<Measure> measure;
};

std::string format_row(const Context& ctx, const std::string& task, const Row& r) {
  std::ostringstream os;
  os << ctx.hash << ',' << ctx.cfg.seed << ',' << task << ',' << r.estimate << ',' << num(r.eps) << ','
     << (r.n >= 0 ? std::to_string(r.n) : "") << ',' << num(r.delta) << ','
     << (r.point >= 0 ? std::to_string(r.point) : "") << ',' << r.kind << ','
     << (r.raw ? std::to_string(*r.raw) : "") << ',' << num(r.log_count) << ',' << r.bound << ','
     << num(r.rate) << ',' << r.mode << ',' << r.statistic << ',' << num(r.std_error);
  return os.str();
}

json base_summary(const Context& ctx, const std::string& id) {
  json j;
  j["config_hash"] = ctx.hash;
  j["seed"] = ctx.cfg.seed;
  j["id"] = id;
  return j;
}

SolverBudget solver_budget(const ExperimentConfig& cfg) {
  SolverBudget b;
  b.nodes = cfg.nodes;
  b.max_points = cfg.max_points;
  return b;
}

RateOptions rate_options(const ExperimentConfig& cfg) {
  RateOptions r;
  r.tail_fraction = cfg.tail_fraction;
  r.statistic = cfg.statistic;
  return r;
}

GrowthOptions growth_options(const ExperimentConfig& cfg) {
  GrowthOptions g;
  g.budget = solver_budget(cfg);
  g.rate = rate_options(cfg);
  return g;
}

int symbolic_pad(const System& sys, double eps) {
  return std::max({0, sys.closed_ball_radius(eps / 4.0), sys.open_ball_radius(eps / 2.0),
                   sys.closed_ball_radius(eps / 2.0), sys.open_ball_radius(eps)});
}

/// The reference sample K: every word on the window the counts read
/// (symbolic), the dyadic grid (circle), or the midpoint grid (interval).
FinitePointSet reference_set(const ExperimentConfig& cfg, const System& sys) {
  const int n_max = *std::max_element(cfg.n.begin(), cfg.n.end());
  EnumerationBudget budget;
  budget.max_points = cfg.enumerate;
  if (sys.symbolic()) {
    int pad = cfg.cover == "cylinder" ? cfg.generation - 1 : 0;
    for (double eps : cfg.eps) pad = std::max(pad, symbolic_pad(sys, eps));
    return enumerate_points(sys, {-pad, n_max - 1 + pad}, 0, budget);
  }
  if (sys.kind() == SystemKind::circle_doubling) return enumerate_points(sys, {0, 0}, cfg.system.grid, budget);
  const Window base = sys.base_window();
  return grid_points(sys, {std::min(base.lo, 0), std::max(base.hi, n_max - 1)}, cfg.system.grid);
}

void add_rate_rows(const Context& ctx, TaskOutput& out, const std::string& task, const RateEstimate& est,
                   Row proto, bool with_counts) {
  if (with_counts) {
    for (const auto& c : est.diagnostics) {
      Row r = proto;
      r.estimate = "count";
      r.n = c.n;
      if (c.raw) r.raw = c.raw;
      r.log_count = c.log_value;
      r.bound = to_string(c.bound);
      out.lines.push_back(format_row(ctx, task, r));
    }
  }
  Row r = proto;
  r.estimate = "rate";
  r.n = est.n_max;
  r.bound = to_string(est.bound);
  r.rate = est.value;
  r.mode = to_string(est.mode);
  r.statistic = to_string(est.statistic);
  out.lines.push_back(format_row(ctx, task, r));
  if (est.value_lower != est.value_upper) {
    r.estimate = "rate_lower";
    r.rate = est.value_lower;
    out.lines.push_back(format_row(ctx, task, r));
    r.estimate = "rate_upper";
    r.rate = est.value_upper;
    out.lines.push_back(format_row(ctx, task, r));
  }
}

json rate_json(const RateEstimate& est) {
  json j;
  j["rate"] = jnum(est.value);
  j["bound"] = to_string(est.bound);
  j["mode"] = to_string(est.mode);
  j["statistic"] = to_string(est.statistic);
  j["estimated"] = est.estimated;
  j["n_min"] = est.n_min;
  j["n_max"] = est.n_max;
  j["tail"] = jnum(est.tail_stat);
  j["increment"] = jnum(est.increment_stat);
  j["slope"] = jnum(est.slope_fit.slope);
  return j;
}

const Measure& require_measure(const Context& ctx, const std::string& task) {
  if (!ctx.measure) throw std::invalid_argument("task '" + task + "' needs a measure");
  return *ctx.measure;
}

// ---- tasks ------------------------------------------------------------------

void task_growth(const Context& ctx, TaskOutput& out) {
  const auto& cfg = ctx.cfg;
  const auto K = reference_set(cfg, ctx.system);
  json s = base_summary(ctx, "growth");
  s["results"] = json::array();
  for (double eps : cfg.eps)
    for (CountKind kind : {CountKind::separated, CountKind::spanning}) {
      const auto est = growth_rate(ctx.system, K, eps, cfg.n, kind, cfg.mode, growth_options(cfg));
      Row proto;
      proto.eps = eps;
      proto.kind = to_string(kind);
      add_rate_rows(ctx, out, "growth", est, proto, true);
      json r = rate_json(est);
      r["eps"] = eps;
      r["kind"] = to_string(kind);
      s["results"].push_back(r);
    }
  out.summary.push_back(s);
}

void task_mdim(const Context& ctx, TaskOutput& out) {
  const auto& cfg = ctx.cfg;
  const auto K = reference_set(cfg, ctx.system);
  const auto est = mdim_estimate(ctx.system, K, cfg.eps, cfg.n, cfg.mode, growth_options(cfg));
  json s = base_summary(ctx, "mdim");
  s["per_eps"] = json::array();
  for (const auto& [eps, rate] : est.per_eps) {
    Row proto;
    proto.eps = eps;
    proto.kind = "separated";
    add_rate_rows(ctx, out, "mdim", rate, proto, true);
    json r = rate_json(rate);
    r["eps"] = eps;
    s["per_eps"].push_back(r);
  }
  if (est.has_slope) {
    Row r;
    r.estimate = "mdim_slope";
    r.kind = "separated";
    r.rate = est.slope;
    r.mode = to_string(est.mode);
    r.statistic = to_string(cfg.statistic);
    out.lines.push_back(format_row(ctx, "mdim", r));
  }
  s["slope"] = est.has_slope ? jnum(est.slope) : json(nullptr);
  s["warnings"] = est.warnings;
  out.summary.push_back(s);
}

void task_katok(const Context& ctx, TaskOutput& out) {
  const auto& cfg = ctx.cfg;
  const auto& mu = require_measure(ctx, "katok");
  json s = base_summary(ctx, "katok");
  s["results"] = json::array();
  std::uint64_t stream = 0;
  for (double eps : cfg.eps)
    for (double delta : cfg.delta) {
      KatokRateOptions opts;
      opts.katok.samples = cfg.samples;
      opts.katok.seed = child_seed(cfg.seed, stream++);
      opts.katok.budget = solver_budget(cfg);
      opts.rate = rate_options(cfg);
      const auto est = katok_entropy(mu, ctx.system, eps, delta, cfg.n, cfg.mode, opts);
      Row proto;
      proto.eps = eps;
      proto.delta = delta;
      proto.kind = "ball";
      add_rate_rows(ctx, out, "katok", est, proto, true);
      json r = rate_json(est);
      r["eps"] = eps;
      r["delta"] = delta;
      s["results"].push_back(r);
    }
  out.summary.push_back(s);
}

json local_json(const LocalEntropyEstimate& est) {
  json j;
  j["center"] = jnum(est.center);
  j["center_lower"] = jnum(est.center_lower);
  j["center_upper"] = jnum(est.center_upper);
  j["spread"] = jnum(est.spread);
  j["spread_flagged"] = est.spread_flagged;
  j["points"] = est.per_point.size();
  j["warnings"] = est.warnings;
  return j;
}

void task_brin_katok(const Context& ctx, TaskOutput& out) {
  const auto& cfg = ctx.cfg;
  const auto& mu = require_measure(ctx, "brin_katok");
  json s = base_summary(ctx, "brin_katok");
  s["results"] = json::array();
  for (std::size_t i = 0; i < cfg.eps.size(); ++i) {
    const double eps = cfg.eps[i];
    BrinKatokOptions opts;
    opts.seed = child_seed(cfg.seed, i);
    opts.mass.samples = cfg.samples;
    opts.mass.seed = child_seed(cfg.seed, 1000 + i);
    opts.rate = rate_options(cfg);
    const auto est = brin_katok_entropy(mu, ctx.system, eps, cfg.points, cfg.bk_n, cfg.mode, opts);
    for (std::size_t p = 0; p < est.per_point.size(); ++p) {
      const auto& rate = est.per_point[p].second;
      Row r;
      r.estimate = "local_rate";
      r.eps = eps;
      r.n = rate.n_max;
      r.point = static_cast<long>(p);
      r.kind = "ball";
      r.bound = to_string(rate.bound);
      r.rate = rate.value;
      r.mode = to_string(rate.mode);
      r.statistic = to_string(rate.statistic);
      out.lines.push_back(format_row(ctx, "brin_katok", r));
    }
    Row r;
    r.eps = eps;
    r.kind = "ball";
    r.mode = to_string(cfg.mode);
    r.statistic = to_string(cfg.statistic);
    for (auto [name, value] : {std::pair<const char*, double>{"center", est.center},
                               {"center_lower", est.center_lower},
                               {"center_upper", est.center_upper},
                               {"spread", est.spread}}) {
      r.estimate = name;
      r.rate = value;
      out.lines.push_back(format_row(ctx, "brin_katok", r));
    }
    json j = local_json(est);
    j["eps"] = eps;
    s["results"].push_back(j);
  }
  out.summary.push_back(s);
}

void task_shapira(const Context& ctx, TaskOutput& out) {
  const auto& cfg = ctx.cfg;
  const auto& mu = require_measure(ctx, "shapira");
  const auto K = reference_set(cfg, ctx.system);
  json s = base_summary(ctx, "shapira");
  s["results"] = json::array();
  std::vector<std::pair<double, Cover>> covers;
  if (cfg.cover == "cylinder") {
    covers.emplace_back(kNaN, cylinder_cover(ctx.system, K, cfg.generation));
  } else {
    for (double eps : cfg.eps) covers.emplace_back(eps, spanning_cover(ctx.system, K, eps, solver_budget(cfg)));
  }
  std::uint64_t stream = 0;
  for (const auto& [eps, cover] : covers)
    for (double delta : cfg.delta) {
      ShapiraRateOptions opts;
      opts.shapira.samples = cfg.samples;
      opts.shapira.seed = child_seed(cfg.seed, stream++);
      opts.shapira.budget = solver_budget(cfg);
      opts.rate = rate_options(cfg);
      const auto est = shapira_entropy(mu, ctx.system, cover, K, delta, cfg.n, opts);
      Row proto;
      proto.eps = eps;
      proto.delta = delta;
      proto.kind = cover.construction;
      add_rate_rows(ctx, out, "shapira", est.upper, proto, true);
      add_rate_rows(ctx, out, "shapira", est.lower, proto, false);
      json r;
      r["eps"] = jnum(eps);
      r["delta"] = delta;
      r["cover"] = cover.construction;
      r["cells"] = cover.cells.size();
      if (cover.measured) {
        r["diam"] = cover.measured->diam;
        r["leb_lower"] = cover.measured->leb_lower;
      }
      r["upper"] = rate_json(est.upper);
      r["lower"] = rate_json(est.lower);
      r["gap"] = jnum(est.gap);
      s["results"].push_back(r);
    }
  out.summary.push_back(s);
}

void task_local_entropy(const Context& ctx, TaskOutput& out) {
  const auto& cfg = ctx.cfg;
  const auto K = reference_set(cfg, ctx.system);
  if (!K.indexable()) throw BudgetError("reference sample too large to pick points from");
  Rng rng(child_seed(cfg.seed, 0));
  std::vector<Point> points;
  for (int p = 0; p < cfg.points; ++p) points.push_back(K.at(uniform_index(rng, K.size())));
  json s = base_summary(ctx, "local_entropy");
  s["results"] = json::array();
  for (double eps : cfg.eps) {
    const auto radii = cfg.radius.empty() ? std::vector<double>{2.0, eps, eps / 2.0} : cfg.radius;
    for (CountKind kind : {CountKind::separated, CountKind::spanning}) {
      double sup = -std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < points.size(); ++p) {
        const auto est = local_entropy_at(ctx.system, K, points[p], eps, radii, cfg.n, kind, cfg.mode,
                                          growth_options(cfg));
        sup = std::max(sup, est.rate.value);
        Row r;
        r.estimate = "local_rate";
        r.eps = eps;
        r.n = est.rate.n_max;
        r.point = static_cast<long>(p);
        r.kind = to_string(kind);
        r.bound = to_string(est.rate.bound);
        r.rate = est.rate.value;
        r.mode = to_string(est.rate.mode);
        r.statistic = to_string(est.rate.statistic);
        out.lines.push_back(format_row(ctx, "local_entropy", r));
      }
      Row r;
      r.estimate = "sup";
      r.eps = eps;
      r.kind = to_string(kind);
      r.rate = sup;
      r.mode = to_string(cfg.mode);
      r.statistic = to_string(cfg.statistic);
      out.lines.push_back(format_row(ctx, "local_entropy", r));
      json j;
      j["eps"] = eps;
      j["kind"] = to_string(kind);
      j["sup"] = jnum(sup);
      s["results"].push_back(j);
    }
  }
  out.summary.push_back(s);
}

void task_verify(const Context& ctx, TaskOutput& out) {
  const auto& cfg = ctx.cfg;
  out.header = kVerifyHeader;
  SuiteConfig suite;
  suite.eps = cfg.verify_eps;
  suite.n_ladder = cfg.verify_n;
  suite.deltas = cfg.verify_delta;
  suite.statistical = cfg.verify_statistical;
  suite.budget = solver_budget(cfg);
  suite.seed = cfg.seed;
  suite.jobs = cfg.jobs;
  auto reports = run_inequality_suite(suite);
  for (auto& r : run_greedy_sandwich(suite)) reports.push_back(std::move(r));
  std::size_t failed = 0;
  for (const auto& rep : reports) {
    for (const auto& in : rep.instances) {
      std::ostringstream os;
      os << ctx.hash << ',' << cfg.seed << ',' << rep.chain_id << ',' << csv_field(in.parameters) << ','
         << num(in.left) << ',' << num(in.middle) << ',' << num(in.right) << ',' << to_string(in.verdict) << ','
         << num(in.z) << ',' << csv_field(in.note);
      out.lines.push_back(os.str());
    }
    json j = base_summary(ctx, "verify/" + rep.chain_id);
    j["statement"] = rep.statement;
    j["verdict"] = to_string(rep.verdict);
    j["instances"] = rep.instances.size();
    j["violations"] = rep.violations();
    j["z"] = jnum(rep.z);
    out.summary.push_back(j);
    if (rep.verdict == Verdict::fail) ++failed;
  }
  json j = base_summary(ctx, "verify");
  j["chains"] = reports.size();
  j["failed"] = failed;
  out.summary.insert(out.summary.begin(), j);
  if (failed) {
    out.status = "failed";
    out.message = std::to_string(failed) + " chain(s) violated";
    out.exit_code = kExitFailure;
  }
}

void task_example(const Context& ctx, TaskOutput& out) {
  const auto& cfg = ctx.cfg;
  out.header = kExampleHeader;
  ExampleConfig ex;
  ex.eps_ladder = cfg.example_eps;
  ex.grid = cfg.example_grid;
  ex.window = cfg.example_window;
  ex.n_ladder = cfg.example_n;
  ex.bk_ladder = cfg.example_bk_n;
  ex.points = cfg.points;
  ex.seed = cfg.seed;
  ex.jobs = cfg.jobs;
  const auto rep = reproduce_example(ex);
  json s = base_summary(ctx, "example");
  s["rows"] = json::array();
  bool all_in_band = true;
  for (const auto& r : rep.rows) {
    std::ostringstream os;
    os << ctx.hash << ',' << cfg.seed << ',' << num(r.eps) << ',' << r.ell << ',' << num(r.bk) << ','
       << num(r.bk_lower) << ',' << num(r.bk_upper) << ',' << num(r.bk_spread) << ',' << num(r.band_lower) << ','
       << num(r.band_upper) << ',' << num(r.S) << ',' << num(r.S_over_log) << ',' << to_string(r.S_bound) << ','
       << (r.in_band ? "true" : "false");
    out.lines.push_back(os.str());
    json j;
    j["eps"] = r.eps;
    j["ell"] = r.ell;
    j["bk"] = jnum(r.bk);
    j["S"] = jnum(r.S);
    j["in_band"] = r.in_band;
    s["rows"].push_back(j);
    all_in_band = all_in_band && r.in_band;
  }
  s["bk_slope"] = jnum(rep.bk_slope);
  s["S_slope"] = jnum(rep.S_slope);
  s["mdim_slope"] = rep.mdim.has_slope ? jnum(rep.mdim.slope) : json(nullptr);
  s["all_in_band"] = all_in_band;
  s["warnings"] = rep.mdim.warnings;
  out.summary.push_back(s);
}

TaskOutput run_task(const Context& ctx, const std::string& task) {
  TaskOutput out;
  out.file = task + ".csv";
  out.header = kEstimateHeader;
  try {
    if (task == "growth") task_growth(ctx, out);
    else if (task == "mdim") task_mdim(ctx, out);
    else if (task == "katok") task_katok(ctx, out);
    else if (task == "brin_katok") task_brin_katok(ctx, out);
    else if (task == "shapira") task_shapira(ctx, out);
    else if (task == "local_entropy") task_local_entropy(ctx, out);
    else if (task == "verify") task_verify(ctx, out);
    else if (task == "example") task_example(ctx, out);
    else throw std::invalid_argument("unknown task '" + task + "'");
  } catch (const BudgetError& e) {
    out.lines.clear();
    out.summary.clear();
    out.status = "degraded";
    out.message = e.what();
  } catch (const WindowError& e) {
    out.lines.clear();
    out.summary.clear();
    out.status = "window_error";
    out.message = std::string(e.what()) + " (required window " + std::to_string(e.required()) + ")";
    out.exit_code = kExitConfig;
  } catch (const std::exception& e) {
    out.lines.clear();
    out.summary.clear();
    out.status = "error";
    out.message = e.what();
    out.exit_code = kExitFailure;
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp);
    f << content;
    if (!f) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  Context ctx{cfg, config_hash(cfg), System(cfg.system), std::nullopt};
  if (cfg.measure) ctx.measure.emplace(make_measure(*cfg.measure, ctx.system));

  std::vector<TaskOutput> outputs(cfg.tasks.size());
  std::mutex log_mutex;
  detail::parallel_for(cfg.jobs, cfg.tasks.size(), [&](std::size_t i) {
    outputs[i] = run_task(ctx, cfg.tasks[i]);
    std::lock_guard lock(log_mutex);
    log << "[" << cfg.tasks[i] << "] " << outputs[i].status << " (" << outputs[i].lines.size() << " rows)";
    if (!outputs[i].message.empty()) log << ": " << outputs[i].message;
    log << "\n";
  });

  RunOutcome outcome;
  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  std::string summary;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto& o = outputs[i];
    std::string csv = o.header + "\n";
    for (const auto& line : o.lines) csv += line + "\n";
    write_atomic(dir / o.file, csv);
    outcome.files.push_back(o.file);

    json head = base_summary(ctx, cfg.tasks[i] + "/status");
    head["status"] = o.status;
    head["rows"] = o.lines.size();
    if (!o.message.empty()) head["message"] = o.message;
    summary += head.dump() + "\n";
    for (const auto& j : o.summary) summary += j.dump() + "\n";

    if (o.status == "degraded") outcome.warnings.push_back(cfg.tasks[i] + ": " + o.message);
    if (o.exit_code == kExitConfig || (o.exit_code == kExitFailure && outcome.exit_code == kExitOk))
      outcome.exit_code = o.exit_code;
  }
  write_atomic(dir / "summary.jsonl", summary);
  outcome.files.push_back("summary.jsonl");
  return outcome;
}

}  // namespace mdim::cli
