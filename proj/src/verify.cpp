#include "mdim/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "mdim/covers.hpp"
#include "mdim/detail/parallel.hpp"
#include "mdim/random.hpp"

namespace mdim {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::exact_pass: return "exact_pass";
    case Verdict::statistical_pass: return "statistical_pass";
    case Verdict::fail: return "fail";
  }
  return "?";
}

std::size_t ChainReport::violations() const {
  return static_cast<std::size_t>(std::count_if(instances.begin(), instances.end(),
                                                [](const ChainInstance& i) { return i.verdict == Verdict::fail; }));
}

std::vector<SuiteSystem> default_suite_systems() {
  SuiteSystem full{"full_shift(2)", {SystemKind::full_shift, 2, {}, 8}, {MeasureKind::bernoulli, {0.5, 0.5}}};
  SuiteSystem golden{"golden_mean", {SystemKind::sft, 2, {"11"}, 8}, {MeasureKind::empirical, {}, 1 << 16, 1, 64}};
  return {full, golden};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double as_double(const CountResult& c) { return static_cast<double>(c.value); }

bool all_exact(std::initializer_list<const CountResult*> counts) {
  return std::all_of(counts.begin(), counts.end(), [](const CountResult* c) { return c->bound == Bound::exact; });
}

ChainInstance judge(std::string params, double left, double middle, double right, bool exact,
                    double tolerance = 0.0) {
  ChainInstance in;
  in.parameters = std::move(params);
  in.left = left;
  in.middle = middle;
  in.right = right;
  const bool left_ok = left <= middle + tolerance;
  const bool right_ok = middle <= right + tolerance;
  if (!left_ok || !right_ok) {
    in.verdict = Verdict::fail;
    in.note = !left_ok && !right_ok ? "both sides violated" : !left_ok ? "left side violated" : "right side violated";
  } else {
    in.verdict = exact ? Verdict::exact_pass : Verdict::statistical_pass;
    if (!exact) in.note = "inexact tags";
  }
  return in;
}

ChainInstance error_instance(std::string params, const std::exception& e) {
  ChainInstance in;
  in.parameters = std::move(params);
  in.left = in.middle = in.right = std::numeric_limits<double>::quiet_NaN();
  in.verdict = Verdict::fail;
  in.note = e.what();
  return in;
}

void finish(ChainReport& r) {
  r.verdict = Verdict::exact_pass;
  for (const auto& in : r.instances) {
    if (in.verdict == Verdict::fail) r.verdict = Verdict::fail;
    else if (in.verdict == Verdict::statistical_pass && r.verdict == Verdict::exact_pass)
      r.verdict = Verdict::statistical_pass;
    r.z = std::max(r.z, in.z);
  }
}

ChainReport chain(std::string id, std::string statement) {
  ChainReport r;
  r.chain_id = std::move(id);
  r.statement = std::move(statement);
  return r;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Coordinates [-pad, n-1+pad] cover every cylinder the symbolic chains read at eps.
int symbolic_pad(const System& sys, double eps) {
  return std::max({0, sys.closed_ball_radius(eps / 4.0), sys.open_ball_radius(eps / 2.0),
                   sys.closed_ball_radius(eps / 2.0), sys.open_ball_radius(eps)});
}

struct DeltaCounts {
  CountResult tilde_2eps, ball_eps, tilde_eps, tilde_diam, shapira, ball_leb, ball_eps4;
  CountResult ball_eps_greedy, tilde_eps_greedy, shapira_greedy;
};

struct Unit {
  std::size_t system = 0;
  double eps = 0.0;
  int n = 0;
  std::string error;
  CountResult r, s, r2, s3, sleb, cover_count;
  CountResult s_greedy, r_greedy;
  double diam = 0.0, leb = 0.0;
  std::vector<DeltaCounts> per_delta;
};

Unit evaluate_unit(const SuiteConfig& cfg, const System& sys, const Measure& mu, std::size_t si, double eps,
                   int n) {
  Unit u;
  u.system = si;
  u.eps = eps;
  u.n = n;
  const auto& budget = cfg.budget;
  const int pad = symbolic_pad(sys, eps);
  const auto K = enumerate_points(sys, {-pad, n - 1 + pad}, 0);
  u.r = spanning_count(sys, K, n, eps, SolveMode::exact, budget);
  u.s = separated_count(sys, K, n, eps, SolveMode::exact, budget);
  u.r2 = spanning_count(sys, K, n, eps / 2.0, SolveMode::exact, budget);
  u.s_greedy = separated_count(sys, K, n, eps, SolveMode::greedy, budget);
  u.r_greedy = spanning_count(sys, K, n, eps, SolveMode::greedy, budget);

  const auto cover = spanning_cover(sys, K, eps, budget);
  u.diam = cover.measured->diam;
  u.leb = cover.measured->leb_lower;
  const auto joined = join_cover(sys, cover, K, n);
  u.cover_count = minimal_subcover_count(joined, K, SolveMode::exact, budget);
  if (u.diam > 0.0) u.s3 = separated_count(sys, K, n, 3.0 * u.diam, SolveMode::exact, budget);
  u.sleb = separated_count(sys, K, n, u.leb, SolveMode::exact, budget);

  KatokOptions ko;
  ko.budget = budget;
  ko.seed = cfg.seed;
  ShapiraOptions so;
  so.budget = budget;
  so.seed = cfg.seed;
  for (double delta : cfg.deltas) {
    DeltaCounts d;
    auto katok = [&](double e, KatokVariant v, SolveMode m) { return katok_count(mu, sys, n, e, delta, v, m, ko); };
    d.tilde_2eps = katok(2.0 * eps, KatokVariant::diameter, SolveMode::exact);
    d.ball_eps = katok(eps, KatokVariant::ball, SolveMode::exact);
    d.tilde_eps = katok(eps, KatokVariant::diameter, SolveMode::exact);
    d.tilde_diam = u.diam > 0.0 ? katok(u.diam, KatokVariant::diameter, SolveMode::exact) : CountResult{1};
    d.ball_leb = katok(u.leb, KatokVariant::ball, SolveMode::exact);
    d.ball_eps4 = katok(eps / 4.0, KatokVariant::ball, SolveMode::exact);
    d.shapira = shapira_count(sys, joined, K, mu, delta, SolveMode::exact, so);
    d.ball_eps_greedy = katok(eps, KatokVariant::ball, SolveMode::greedy);
    d.tilde_eps_greedy = katok(eps, KatokVariant::diameter, SolveMode::greedy);
    d.shapira_greedy = shapira_count(sys, joined, K, mu, delta, SolveMode::greedy, so);
    u.per_delta.push_back(d);
  }
  return u;
}

std::string unit_params(const SuiteConfig& cfg, const Unit& u) {
  return "system=" + cfg.systems[u.system].name + " eps=" + fmt(u.eps) + " n=" + std::to_string(u.n);
}

std::vector<Unit> evaluate_units(const SuiteConfig& cfg) {
  struct Key {
    std::size_t system;
    double eps;
    int n;
  };
  std::vector<Key> keys;
  for (std::size_t si = 0; si < cfg.systems.size(); ++si)
    for (double eps : cfg.eps)
      for (int n : cfg.n_ladder) keys.push_back({si, eps, n});
  std::vector<System> systems;
  std::vector<Measure> measures;
  for (const auto& s : cfg.systems) {
    systems.emplace_back(s.system);
    measures.push_back(make_measure(s.measure, systems.back()));
  }
  std::vector<Unit> units(keys.size());
  detail::parallel_for(cfg.jobs, keys.size(), [&](std::size_t i) {
    const auto& k = keys[i];
    try {
      units[i] = evaluate_unit(cfg, systems[k.system], measures[k.system], k.system, k.eps, k.n);
    } catch (const std::exception& e) {
      units[i] = Unit{};
      units[i].system = k.system;
      units[i].eps = k.eps;
      units[i].n = k.n;
      units[i].error = e.what();
    }
  });
  return units;
}

bool uniform_bernoulli(const MeasureSpec& m) {
  if (m.kind != MeasureKind::bernoulli || m.weights.empty()) return false;
  return std::all_of(m.weights.begin(), m.weights.end(), [&](double w) { return w == m.weights.front(); });
}

RateOptions increments() { return {0.5, RateStatistic::increment}; }

// Points sampled from mu carrying the coordinates the long-ladder probes read.
std::vector<Point> probe_points(const Measure& mu, const SuiteConfig& cfg, int pad,
                                std::size_t count) {
  return mu.sample(child_seed(cfg.seed, 101), count, {-pad, cfg.long_ladder.back() - 1 + pad});
}

}  // namespace

std::vector<ChainReport> run_inequality_suite(const SuiteConfig& cfg) {
  const auto units = evaluate_units(cfg);
  auto span_sep = chain("spanning_separated", "r_n(K, eps) <= s_n(K, eps) <= r_n(K, eps/2)");
  auto cover_sep = chain("cover_separated", "s_n(K, 3 diam U) <= N(U^n) <= s_n(K, Leb U)");
  auto ball_diam = chain("ball_diameter", "Ntilde(n, 2 eps) <= N(n, eps) <= Ntilde(n, eps)");
  auto geometry = chain("shapira_katok_geometry", "Ntilde(n, diam U) <= N_mu(U^n, delta) <= N(n, Leb U)");
  auto sk_counts = chain("shapira_katok_counts", "N(n, eps) <= N_mu(U^n, delta) <= N(n, eps/4)");
  auto sk_upper = chain("shapira_katok_upper", "h^K(eps, delta) <= h^S(U) <= h^K(eps/4, delta), upper rates");
  auto sk_lower = chain("shapira_katok_lower", "h^K(eps, delta) <= h^S(U) <= h^K(eps/4, delta), lower rates");

  // ladders for the rate chains, keyed by (system, eps, delta)
  std::map<std::tuple<std::size_t, double, std::size_t>, std::array<std::vector<LogCount>, 3>> ladders;
  auto log_count = [](const CountResult& c, int n) {
    LogCount l;
    l.n = n;
    l.log_value = l.log_lower = l.log_upper = std::log(static_cast<double>(c.value));
    l.bound = c.bound;
    l.raw = c.value;
    return l;
  };

  for (const auto& u : units) {
    const auto p = unit_params(cfg, u);
    if (!u.error.empty()) {
      const std::runtime_error e(u.error);
      for (auto* r : {&span_sep, &cover_sep, &ball_diam, &geometry, &sk_counts}) r->instances.push_back(error_instance(p, e));
      continue;
    }
    span_sep.instances.push_back(judge(p, as_double(u.r), as_double(u.s), as_double(u.r2), all_exact({&u.r, &u.s, &u.r2})));
    auto in = judge(p + " diam=" + fmt(u.diam) + " leb=" + fmt(u.leb), u.diam > 0.0 ? as_double(u.s3) : -kInf,
                    as_double(u.cover_count), as_double(u.sleb), all_exact({&u.s3, &u.cover_count, &u.sleb}));
    cover_sep.instances.push_back(in);
    for (std::size_t di = 0; di < cfg.deltas.size(); ++di) {
      const auto& d = u.per_delta[di];
      const auto pd = p + " delta=" + fmt(cfg.deltas[di]);
      ball_diam.instances.push_back(judge(pd, as_double(d.tilde_2eps), as_double(d.ball_eps), as_double(d.tilde_eps),
                                    all_exact({&d.tilde_2eps, &d.ball_eps, &d.tilde_eps})));
      geometry.instances.push_back(judge(pd, as_double(d.tilde_diam), as_double(d.shapira), as_double(d.ball_leb),
                                        all_exact({&d.tilde_diam, &d.shapira, &d.ball_leb})));
      sk_counts.instances.push_back(judge(pd, as_double(d.ball_eps), as_double(d.shapira), as_double(d.ball_eps4),
                                     all_exact({&d.ball_eps, &d.shapira, &d.ball_eps4})));
      auto& lad = ladders[{u.system, u.eps, di}];
      lad[0].push_back(log_count(d.ball_eps, u.n));
      lad[1].push_back(log_count(d.shapira, u.n));
      lad[2].push_back(log_count(d.ball_eps4, u.n));
    }
  }

  for (const auto& [key, lad] : ladders) {
    const auto& [si, eps, di] = key;
    const auto p = "system=" + cfg.systems[si].name + " eps=" + fmt(eps) + " delta=" + fmt(cfg.deltas[di]);
    if (lad[0].size() < 3) continue;
    for (auto mode : {RateMode::upper, RateMode::lower}) {
      const auto a = rate_from_log_counts(lad[0], mode);
      const auto b = rate_from_log_counts(lad[1], mode);
      const auto c = rate_from_log_counts(lad[2], mode);
      const bool exact = a.bound == Bound::exact && b.bound == Bound::exact && c.bound == Bound::exact;
      (mode == RateMode::upper ? sk_upper : sk_lower)
          .instances.push_back(judge(p, a.value, b.value, c.value, exact, cfg.rate_tolerance));
    }
  }

  auto cover_bk = chain("cover_brin_katok", "h^BK(diam U) <= h^BK(U) <= h^BK(Leb U), per point, increment rates");
  auto katok_bk = chain("katok_brin_katok", "h^K(eps/4, delta) >= lower h^BK(eps), increment rates");
  auto local_sup = chain("local_spanning_sup", "sup_x htilde_d(x, eps) >= R(K, eps), increment rates");
  for (std::size_t si = 0; si < cfg.systems.size(); ++si) {
    const auto& ss = cfg.systems[si];
    const System sys(ss.system);
    const auto mu = make_measure(ss.measure, sys);
    const bool uniform = uniform_bernoulli(ss.measure);
    for (double eps : cfg.eps) {
      const auto p = "system=" + ss.name + " eps=" + fmt(eps);
      if (uniform) {
        try {
          // generation-g cylinder cover with cells of diameter <= eps
          const int g = std::max(1, sys.open_ball_radius(eps));
          const auto Kc = enumerate_points(sys, {-g, g}, 0);
          auto cover = cylinder_cover(sys, Kc, g);
          const auto geo = cover_geometry(sys, cover, Kc);
          const auto pts = probe_points(mu, cfg, g + 2, 8);
          BrinKatokOptions bo;
          bo.rate = increments();
          const auto left = brin_katok_at(mu, sys, geo.diam, pts, cfg.long_ladder, RateMode::upper, bo);
          const auto mid = cover_brin_katok_entropy(mu, sys, cover, pts, cfg.long_ladder, RateMode::upper, increments());
          const auto right = brin_katok_at(mu, sys, geo.leb_lower, pts, cfg.long_ladder, RateMode::upper, bo);
          for (std::size_t i = 0; i < pts.size(); ++i)
            cover_bk.instances.push_back(judge(p + " g=" + std::to_string(g) + " point=" + std::to_string(i),
                                              left.per_point[i].second.value, mid.per_point[i].second.value,
                                              right.per_point[i].second.value, true, cfg.rate_tolerance));
        } catch (const std::exception& e) {
          cover_bk.instances.push_back(error_instance(p, e));
        }
        for (double delta : cfg.deltas) {
          const auto pd = p + " delta=" + fmt(delta);
          try {
            KatokRateOptions ko;
            ko.rate = increments();
            ko.katok.budget = cfg.budget;
            const auto hk = katok_entropy(mu, sys, eps / 4.0, delta, cfg.long_ladder, RateMode::upper, ko);
            BrinKatokOptions bo;
            bo.rate = increments();
            bo.seed = cfg.seed;
            const auto bk = brin_katok_entropy(mu, sys, eps, 8, cfg.long_ladder, RateMode::lower, bo);
            katok_bk.instances.push_back(judge(pd, bk.center, hk.value, kInf, hk.bound == Bound::exact, cfg.rate_tolerance));
          } catch (const std::exception& e) {
            katok_bk.instances.push_back(error_instance(pd, e));
          }
        }
      }
      if (ss.system.kind == SystemKind::full_shift) {
        try {
          const int pad = std::max(0, sys.closed_ball_radius(eps));
          const auto K = enumerate_points(sys, {-pad, cfg.n_ladder.back() - 1 + pad}, 0);
          GrowthOptions go;
          go.rate = increments();
          go.budget = cfg.budget;
          const auto R = growth_rate(sys, K, eps, cfg.n_ladder, CountKind::spanning, RateMode::upper, go);
          double sup = -kInf;
          Rng rng(child_seed(cfg.seed, 202));
          for (int i = 0; i < 16; ++i) {
            const auto x = K.at(uniform_index(rng, K.size()));
            const auto h = local_entropy_at(sys, K, x, eps, {2.0, eps, eps / 2.0}, cfg.n_ladder, CountKind::spanning,
                                            RateMode::upper, go);
            sup = std::max(sup, h.rate.value);
          }
          local_sup.instances.push_back(judge(p, R.value, sup, kInf, R.bound == Bound::exact, cfg.rate_tolerance));
        } catch (const std::exception& e) {
          local_sup.instances.push_back(error_instance(p, e));
        }
      }
    }
  }

  std::vector<ChainReport> out{span_sep, cover_sep, ball_diam, geometry, sk_counts, sk_upper, sk_lower, cover_bk, katok_bk, local_sup};

  if (cfg.statistical) {
    auto box = chain("box_inclusion", "mu(I_n) <= mu(B_n(x, eps)) <= mu(J_n), Monte Carlo middle");
    const System iv({SystemKind::interval_shift, 2, {}, 8, 64});
    const auto leb = make_measure({MeasureKind::product_lebesgue, {}}, iv);
    std::size_t k = 0;
    for (double eps : cfg.statistical_eps)
      for (int n : cfg.statistical_n) {
        const auto p = "system=interval_shift eps=" + fmt(eps) + " n=" + std::to_string(n);
        try {
          const int l = box_window(eps);
          const auto x = leb.sample(child_seed(cfg.seed, 300 + k), 1, {-l - 1, n + l})[0];
          MassOptions mo{cfg.samples, child_seed(cfg.seed, 400 + k)};
          const auto bounds = ball_mass(leb, iv, x, n, eps, mo);
          const auto mc = ball_mass_monte_carlo(leb, iv, x, n, eps, mo);
          const double se = std::max(mc.std_error, 1.0 / static_cast<double>(cfg.samples));
          auto in = judge(p, bounds.lower, mc.value, bounds.upper, false);
          in.z = std::max({0.0, (bounds.lower - mc.value) / se, (mc.value - bounds.upper) / se});
          in.verdict = in.z <= 3.0 ? Verdict::statistical_pass : Verdict::fail;
          in.note = "z = " + fmt(in.z);
          box.instances.push_back(in);
        } catch (const std::exception& e) {
          box.instances.push_back(error_instance(p, e));
        }
        ++k;
      }
    out.push_back(box);
  }
  for (auto& r : out) finish(r);
  return out;
}

std::vector<ChainReport> run_greedy_sandwich(const SuiteConfig& cfg) {
  const auto units = evaluate_units(cfg);
  auto sep = chain("greedy_separated", "greedy s_n <= exact s_n");
  auto span = chain("greedy_spanning", "exact r_n <= greedy r_n");
  auto katok = chain("greedy_katok", "exact N, Ntilde <= greedy N, Ntilde");
  auto shap = chain("greedy_shapira", "exact N_mu(U^n, delta) <= greedy N_mu(U^n, delta)");
  for (const auto& u : units) {
    const auto p = unit_params(cfg, u);
    if (!u.error.empty()) {
      const std::runtime_error e(u.error);
      for (auto* r : {&sep, &span, &katok, &shap}) r->instances.push_back(error_instance(p, e));
      continue;
    }
    sep.instances.push_back(judge(p, as_double(u.s_greedy), as_double(u.s), kInf, true));
    span.instances.push_back(judge(p, as_double(u.r), as_double(u.r_greedy), kInf, true));
    for (std::size_t di = 0; di < cfg.deltas.size(); ++di) {
      const auto& d = u.per_delta[di];
      const auto pd = p + " delta=" + fmt(cfg.deltas[di]);
      katok.instances.push_back(judge(pd + " variant=ball", as_double(d.ball_eps), as_double(d.ball_eps_greedy), kInf, true));
      katok.instances.push_back(
          judge(pd + " variant=diameter", as_double(d.tilde_eps), as_double(d.tilde_eps_greedy), kInf, true));
      shap.instances.push_back(judge(pd, as_double(d.shapira), as_double(d.shapira_greedy), kInf, true));
    }
  }
  std::vector<ChainReport> out{sep, span, katok, shap};
  for (auto& r : out) finish(r);
  return out;
}

ExampleReport reproduce_example(const ExampleConfig& cfg) {
  if (cfg.eps_ladder.empty()) throw std::invalid_argument("empty eps ladder");
  const double eps_min = *std::min_element(cfg.eps_ladder.begin(), cfg.eps_ladder.end());
  const int ell = box_window(eps_min);
  if (cfg.window < ell) {
    std::ostringstream os;
    os << "window " << cfg.window << " is smaller than l(" << eps_min << ") = " << ell;
    throw WindowError(os.str(), ell);
  }
  const System iv({SystemKind::interval_shift, 2, {}, cfg.window, cfg.grid});
  const auto leb = make_measure({MeasureKind::product_lebesgue, {}}, iv);
  const auto K = grid_points(iv, iv.base_window(), cfg.grid);

  ExampleReport rep;
  GrowthOptions go;
  go.rate = increments();
  rep.mdim = mdim_estimate(iv, K, cfg.eps_ladder, cfg.n_ladder, RateMode::upper, go);
  rep.S_slope = rep.mdim.slope;

  rep.bk.resize(cfg.eps_ladder.size());
  detail::parallel_for(cfg.jobs, cfg.eps_ladder.size(), [&](std::size_t i) {
    BrinKatokOptions bo;
    bo.seed = child_seed(cfg.seed, i);
    rep.bk[i] = brin_katok_entropy(leb, iv, cfg.eps_ladder[i], cfg.points, cfg.bk_ladder, RateMode::upper, bo);
  });

  std::vector<double> x, y;
  for (std::size_t i = 0; i < cfg.eps_ladder.size(); ++i) {
    const double eps = cfg.eps_ladder[i];
    ExampleRow row;
    row.eps = eps;
    row.ell = box_window(eps);
    row.bk = rep.bk[i].center;
    row.bk_lower = rep.bk[i].center_lower;
    row.bk_upper = rep.bk[i].center_upper;
    row.bk_spread = rep.bk[i].spread;
    row.band_lower = std::log(1.0 / (4.0 * eps));
    row.band_upper = std::log(3.0 / eps);
    for (const auto& [e, r] : rep.mdim.per_eps)
      if (e == eps) {
        row.S = r.value;
        row.S_bound = r.bound;
      }
    row.S_over_log = row.S / std::log(1.0 / eps);
    row.in_band = row.bk >= row.band_lower - 0.05 && row.bk <= row.band_upper + 0.05;
    rep.rows.push_back(row);
    x.push_back(std::log(1.0 / eps));
    y.push_back(row.bk);
  }
  if (x.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mx += x[i];
      my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
    }
    rep.bk_slope = sxx > 0 ? sxy / sxx : 0.0;
  }
  return rep;
}

}  // namespace mdim
