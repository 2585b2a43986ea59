#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "config.hpp"
#include "mdim/errors.hpp"
#include "mdim/verify.hpp"
#include "runner.hpp"

namespace py = pybind11;
using namespace mdim;

namespace {

SolveMode solve_mode(const std::string& s) { return solve_mode_from_string(s); }

py::dict count_dict(const CountResult& r) {
  py::dict d;
  d["value"] = r.value;
  d["bound"] = to_string(r.bound);
  d["method"] = to_string(r.method);
  d["n"] = r.n;
  d["eps"] = r.epsilon;
  return d;
}

py::dict rate_dict(const RateEstimate& e) {
  py::dict d;
  d["value"] = e.value;
  d["mode"] = to_string(e.mode);
  d["statistic"] = to_string(e.statistic);
  d["bound"] = to_string(e.bound);
  d["estimated"] = e.estimated;
  d["n_min"] = e.n_min;
  d["n_max"] = e.n_max;
  d["tail"] = e.tail_stat;
  d["increment"] = e.increment_stat;
  d["slope"] = e.slope_fit.slope;
  py::list counts;
  for (const auto& c : e.diagnostics) counts.append(py::make_tuple(c.n, c.log_value, to_string(c.bound)));
  d["log_counts"] = counts;
  return d;
}

RateOptions rate_options(const std::string& statistic, double tail_fraction) {
  RateOptions r;
  r.statistic = rate_statistic_from_string(statistic);
  r.tail_fraction = tail_fraction;
  return r;
}

py::dict chain_dict(const ChainReport& r) {
  py::dict d;
  d["chain_id"] = r.chain_id;
  d["statement"] = r.statement;
  d["verdict"] = to_string(r.verdict);
  d["instances"] = r.instances.size();
  d["violations"] = r.violations();
  d["z"] = r.z;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bowen-metric counts, entropy rates and mean dimension estimates";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<WindowError>(m, "WindowError", PyExc_RuntimeError);
  py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);
  py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::class_<Point>(m, "Point")
      .def(py::init([](int lo, std::vector<double> coords) { return Point{lo, std::move(coords)}; }),
           py::arg("lo"), py::arg("coords"))
      .def_readonly("lo", &Point::lo)
      .def_readonly("coords", &Point::coords)
      .def("__repr__", [](const Point& p) {
        std::ostringstream os;
        os << "Point(lo=" << p.lo << ", len=" << p.coords.size() << ")";
        return os.str();
      });

  py::class_<System>(m, "System")
      .def(py::init([](const std::string& kind, int alphabet, std::vector<std::string> forbidden, int window,
                       int grid) {
             return System({system_kind_from_string(kind), alphabet, std::move(forbidden), window, grid});
           }),
           py::arg("kind"), py::arg("alphabet") = 2, py::arg("forbidden") = std::vector<std::string>{},
           py::arg("window") = 8, py::arg("grid") = 64)
      .def_property_readonly("kind", [](const System& s) { return to_string(s.kind()); })
      .def_property_readonly("symbolic", &System::symbolic)
      .def_property_readonly("diameter", &System::diameter)
      .def("distance", [](const System& s, const Point& x, const Point& y, int k) { return s.distance(x, y, k); },
           py::arg("x"), py::arg("y"), py::arg("k") = 0)
      .def("bowen_distance", [](const System& s, const Point& x, const Point& y, int n) {
        return bowen_distance(s, x, y, n);
      });

  py::class_<FinitePointSet>(m, "PointSet")
      .def("__len__", &FinitePointSet::size)
      .def("at", &FinitePointSet::at)
      .def_property_readonly("window", [](const FinitePointSet& K) {
        return py::make_tuple(K.window().lo, K.window().hi);
      });

  m.def("enumerate_points",
        [](const System& s, int lo, int hi, int resolution, std::uint64_t max_points) {
          EnumerationBudget b;
          b.max_points = max_points;
          return enumerate_points(s, {lo, hi}, resolution, b);
        },
        py::arg("system"), py::arg("lo"), py::arg("hi"), py::arg("resolution") = 0,
        py::arg("max_points") = std::uint64_t{1} << 22);
  m.def("grid_points", [](const System& s, int lo, int hi, int resolution) {
    return grid_points(s, {lo, hi}, resolution);
  });

  m.def("separated_count",
        [](const System& s, const FinitePointSet& K, int n, double eps, const std::string& mode) {
          return count_dict(separated_count(s, K, n, eps, solve_mode(mode)));
        },
        py::arg("system"), py::arg("K"), py::arg("n"), py::arg("eps"), py::arg("mode") = "exact");
  m.def("spanning_count",
        [](const System& s, const FinitePointSet& K, int n, double eps, const std::string& mode) {
          return count_dict(spanning_count(s, K, n, eps, solve_mode(mode)));
        },
        py::arg("system"), py::arg("K"), py::arg("n"), py::arg("eps"), py::arg("mode") = "exact");

  py::class_<Measure>(m, "Measure")
      .def(py::init([](const std::string& kind, const System& s, std::vector<double> weights,
                       std::uint64_t orbit_length, std::uint64_t seed) {
             MeasureSpec spec;
             spec.kind = measure_kind_from_string(kind);
             spec.weights = std::move(weights);
             spec.orbit_length = orbit_length;
             spec.seed = seed;
             return make_measure(spec, s);
           }),
           py::arg("kind"), py::arg("system"), py::arg("weights") = std::vector<double>{},
           py::arg("orbit_length") = 1 << 16, py::arg("seed") = 1)
      .def_property_readonly("kind", [](const Measure& mu) { return to_string(mu.kind()); })
      .def("shannon_entropy", &Measure::shannon_entropy);

  m.def("growth_rate",
        [](const System& s, const FinitePointSet& K, double eps, std::vector<int> ladder, const std::string& kind,
           const std::string& mode, const std::string& statistic, double tail_fraction) {
          GrowthOptions opt;
          opt.rate = rate_options(statistic, tail_fraction);
          const auto k = kind == "spanning" ? CountKind::spanning : CountKind::separated;
          if (kind != "spanning" && kind != "separated") throw std::invalid_argument("kind: separated | spanning");
          return rate_dict(growth_rate(s, K, eps, ladder, k, rate_mode_from_string(mode), opt));
        },
        py::arg("system"), py::arg("K"), py::arg("eps"), py::arg("n_ladder"), py::arg("kind") = "separated",
        py::arg("mode") = "upper", py::arg("statistic") = "tail", py::arg("tail_fraction") = 0.5);

  m.def("mdim_estimate",
        [](const System& s, const FinitePointSet& K, std::vector<double> eps, std::vector<int> ladder,
           const std::string& mode, const std::string& statistic) {
          GrowthOptions opt;
          opt.rate = rate_options(statistic, 0.5);
          const auto est = mdim_estimate(s, K, eps, ladder, rate_mode_from_string(mode), opt);
          py::dict d;
          py::list per;
          for (const auto& [e, r] : est.per_eps) per.append(py::make_tuple(e, rate_dict(r)));
          d["per_eps"] = per;
          d["slope"] = est.has_slope ? py::cast(est.slope) : py::none();
          d["warnings"] = est.warnings;
          return d;
        },
        py::arg("system"), py::arg("K"), py::arg("eps_ladder"), py::arg("n_ladder"), py::arg("mode") = "upper",
        py::arg("statistic") = "increment");

  m.def("katok_entropy",
        [](const Measure& mu, const System& s, double eps, double delta, std::vector<int> ladder,
           const std::string& statistic) {
          KatokRateOptions opt;
          opt.rate = rate_options(statistic, 0.5);
          return rate_dict(katok_entropy(mu, s, eps, delta, ladder, RateMode::upper, opt));
        },
        py::arg("measure"), py::arg("system"), py::arg("eps"), py::arg("delta"), py::arg("n_ladder"),
        py::arg("statistic") = "increment");

  m.def("brin_katok_entropy",
        [](const Measure& mu, const System& s, double eps, int points, std::vector<int> ladder,
           const std::string& statistic, std::uint64_t seed) {
          BrinKatokOptions opt;
          opt.seed = seed;
          opt.rate = rate_options(statistic, 0.5);
          const auto est = brin_katok_entropy(mu, s, eps, points, ladder, RateMode::upper, opt);
          py::dict d;
          d["center"] = est.center;
          d["center_lower"] = est.center_lower;
          d["center_upper"] = est.center_upper;
          d["spread"] = est.spread;
          d["warnings"] = est.warnings;
          return d;
        },
        py::arg("measure"), py::arg("system"), py::arg("eps"), py::arg("points"), py::arg("n_ladder"),
        py::arg("statistic") = "increment", py::arg("seed") = 1);

  m.def("shapira_entropy",
        [](const Measure& mu, const System& s, const FinitePointSet& K, int generation, double delta,
           std::vector<int> ladder, const std::string& statistic) {
          ShapiraRateOptions opt;
          opt.rate = rate_options(statistic, 0.5);
          const auto cover = cylinder_cover(s, K, generation);
          const auto est = shapira_entropy(mu, s, cover, K, delta, ladder, opt);
          py::dict d;
          d["upper"] = rate_dict(est.upper);
          d["lower"] = rate_dict(est.lower);
          d["gap"] = est.gap;
          return d;
        },
        py::arg("measure"), py::arg("system"), py::arg("K"), py::arg("generation"), py::arg("delta"),
        py::arg("n_ladder"), py::arg("statistic") = "increment");

  m.def("run_inequality_suite",
        [](std::vector<double> eps, std::vector<int> n_ladder, bool statistical, std::uint64_t seed) {
          SuiteConfig cfg;
          cfg.eps = std::move(eps);
          cfg.n_ladder = std::move(n_ladder);
          cfg.statistical = statistical;
          cfg.seed = seed;
          py::list out;
          for (const auto& r : run_inequality_suite(cfg)) out.append(chain_dict(r));
          for (const auto& r : run_greedy_sandwich(cfg)) out.append(chain_dict(r));
          return out;
        },
        py::arg("eps") = std::vector<double>{0.5, 0.25, 0.125}, py::arg("n_ladder") = std::vector<int>{2, 3, 4, 5, 6, 7, 8},
        py::arg("statistical") = false, py::arg("seed") = 1);

  m.def("reproduce_example",
        [](std::vector<double> eps, int window, int points, std::uint64_t seed) {
          ExampleConfig cfg;
          cfg.eps_ladder = std::move(eps);
          cfg.window = window;
          cfg.points = points;
          cfg.seed = seed;
          const auto rep = reproduce_example(cfg);
          py::dict d;
          py::list rows;
          for (const auto& r : rep.rows) {
            py::dict row;
            row["eps"] = r.eps;
            row["ell"] = r.ell;
            row["bk"] = r.bk;
            row["band_lower"] = r.band_lower;
            row["band_upper"] = r.band_upper;
            row["S"] = r.S;
            row["in_band"] = r.in_band;
            rows.append(row);
          }
          d["rows"] = rows;
          d["bk_slope"] = rep.bk_slope;
          d["S_slope"] = rep.S_slope;
          d["mdim_slope"] = rep.mdim.has_slope ? py::cast(rep.mdim.slope) : py::none();
          return d;
        },
        py::arg("eps") = std::vector<double>{0.125, 0.0625, 0.03125, 0.015625}, py::arg("window") = 8,
        py::arg("points") = 16, py::arg("seed") = 1);

  m.def("config_hash", [](const std::string& path) { return cli::config_hash(cli::load_config(path)); });
  m.def("run_config",
        [](const std::string& path, std::optional<std::string> out, std::optional<std::uint64_t> seed, int jobs) {
          auto cfg = cli::load_config(path);
          if (out) cfg.out = *out;
          if (seed) cfg.seed = *seed;
          cfg.jobs = jobs;
          std::ostringstream log;
          const auto outcome = [&] {
            py::gil_scoped_release release;
            return cli::run_experiment(cfg, log);
          }();
          py::dict d;
          d["exit_code"] = outcome.exit_code;
          d["files"] = outcome.files;
          d["warnings"] = outcome.warnings;
          d["log"] = log.str();
          return d;
        },
        py::arg("path"), py::arg("out") = py::none(), py::arg("seed") = py::none(), py::arg("jobs") = 1);
}
