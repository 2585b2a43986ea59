#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mdim::cli {

ConfigError::ConfigError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
      line_(line) {}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  const auto t = trim(s);
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) throw std::invalid_argument("not an integer: '" + t + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  const auto v = parse_int(s);
  if (v < 0) throw std::invalid_argument("must be non-negative: '" + s + "'");
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>) s += fmt17(v[i]);
    else s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

double parse_real(const std::string& raw) {
  const auto s = trim(raw);
  if (s.rfind("2^", 0) == 0) return std::ldexp(1.0, static_cast<int>(parse_int(s.substr(2))));
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split(s, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(static_cast<int>(parse_int(item)));
      continue;
    }
    const auto lo = parse_int(item.substr(0, dots));
    auto rest = item.substr(dots + 2);
    const auto star = rest.find('*');
    const std::int64_t factor = star == std::string::npos ? 0 : parse_int(rest.substr(star + 1));
    const auto hi = parse_int(rest.substr(0, star));
    if (hi < lo) throw std::invalid_argument("empty range '" + item + "'");
    if (star != std::string::npos && (factor < 2 || lo < 1)) throw std::invalid_argument("bad geometric range '" + item + "'");
    for (std::int64_t v = lo; v <= hi; v = factor ? v * factor : v + 1) out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_real(item));
      continue;
    }
    const auto a = trim(item.substr(0, dots)), b = trim(item.substr(dots + 2));
    if (a.rfind("2^", 0) != 0 || b.rfind("2^", 0) != 0)
      throw std::invalid_argument("real ranges must be powers of two like 2^-3..2^-7");
    const auto ea = parse_int(a.substr(2)), eb = parse_int(b.substr(2));
    const std::int64_t step = eb >= ea ? 1 : -1;
    for (auto e = ea;; e += step) {
      out.push_back(std::ldexp(1.0, static_cast<int>(e)));
      if (e == eb) break;
    }
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  using Setter = std::function<void(const std::string&)>;
  bool has_seed = false, has_system = false, has_measure = false;
  MeasureSpec measure;
  std::map<std::string, std::map<std::string, Setter>> keys;
  keys["run"] = {
      {"seed", [&](const std::string& v) { cfg.seed = parse_uint(v); has_seed = true; }},
      {"out", [&](const std::string& v) { cfg.out = v; }},
      {"jobs", [&](const std::string& v) { cfg.jobs = static_cast<int>(parse_int(v)); }},
      {"tasks", [&](const std::string& v) { cfg.tasks = split(v, ','); }},
  };
  keys["system"] = {
      {"kind", [&](const std::string& v) { cfg.system.kind = system_kind_from_string(v); has_system = true; }},
      {"alphabet", [&](const std::string& v) { cfg.system.alphabet = static_cast<int>(parse_int(v)); }},
      {"forbidden", [&](const std::string& v) { cfg.system.forbidden = split(v, ','); }},
      {"window", [&](const std::string& v) { cfg.system.window = static_cast<int>(parse_int(v)); }},
      {"grid", [&](const std::string& v) { cfg.system.grid = static_cast<int>(parse_int(v)); }},
      {"precision", [&](const std::string& v) { cfg.system.precision = parse_real(v); }},
  };
  keys["measure"] = {
      {"kind", [&](const std::string& v) { measure.kind = measure_kind_from_string(v); has_measure = true; }},
      {"weights", [&](const std::string& v) { measure.weights = parse_real_list(v); }},
      {"orbit_length", [&](const std::string& v) { measure.orbit_length = parse_uint(v); }},
      {"orbit_seed", [&](const std::string& v) { measure.seed = parse_uint(v); }},
      {"orbit_pad", [&](const std::string& v) { measure.orbit_pad = static_cast<int>(parse_int(v)); }},
  };
  keys["ladder"] = {
      {"eps", [&](const std::string& v) { cfg.eps = parse_real_list(v); }},
      {"n", [&](const std::string& v) { cfg.n = parse_int_list(v); }},
      {"delta", [&](const std::string& v) { cfg.delta = parse_real_list(v); }},
      {"bk_n", [&](const std::string& v) { cfg.bk_n = parse_int_list(v); }},
      {"radius", [&](const std::string& v) { cfg.radius = parse_real_list(v); }},
      {"mode", [&](const std::string& v) { cfg.mode = rate_mode_from_string(v); }},
      {"statistic", [&](const std::string& v) { cfg.statistic = rate_statistic_from_string(v); }},
      {"tail_fraction", [&](const std::string& v) { cfg.tail_fraction = parse_real(v); }},
  };
  keys["budget"] = {
      {"samples", [&](const std::string& v) { cfg.samples = parse_uint(v); }},
      {"nodes", [&](const std::string& v) { cfg.nodes = parse_uint(v); }},
      {"max_points", [&](const std::string& v) { cfg.max_points = parse_uint(v); }},
      {"enumerate", [&](const std::string& v) { cfg.enumerate = parse_uint(v); }},
      {"points", [&](const std::string& v) { cfg.points = static_cast<int>(parse_int(v)); }},
  };
  keys["cover"] = {
      {"construction", [&](const std::string& v) { cfg.cover = v; }},
      {"generation", [&](const std::string& v) { cfg.generation = static_cast<int>(parse_int(v)); }},
  };
  keys["verify"] = {
      {"eps", [&](const std::string& v) { cfg.verify_eps = parse_real_list(v); }},
      {"n", [&](const std::string& v) { cfg.verify_n = parse_int_list(v); }},
      {"delta", [&](const std::string& v) { cfg.verify_delta = parse_real_list(v); }},
      {"statistical", [&](const std::string& v) { cfg.verify_statistical = parse_bool(v); }},
  };
  keys["example"] = {
      {"eps", [&](const std::string& v) { cfg.example_eps = parse_real_list(v); }},
      {"grid", [&](const std::string& v) { cfg.example_grid = static_cast<int>(parse_int(v)); }},
      {"window", [&](const std::string& v) { cfg.example_window = static_cast<int>(parse_int(v)); }},
      {"n", [&](const std::string& v) { cfg.example_n = parse_int_list(v); }},
      {"bk_n", [&](const std::string& v) { cfg.example_bk_n = parse_int_list(v); }},
  };

  std::string section = "run";
  std::map<std::string, int> seen;
  std::map<std::string, int> line_of;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(source, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!keys.count(section)) throw ConfigError(source, lineno, "unknown section [" + section + "]");
      line_of[section] = lineno;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, lineno, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    auto& table = keys[section];
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError(source, lineno, "unknown key '" + key + "' in [" + section + "]");
    const auto full = section + "." + key;
    if (seen.count(full))
      throw ConfigError(source, lineno, "duplicate key '" + key + "' (first set on line " + std::to_string(seen[full]) + ")");
    seen[full] = lineno;
    if (value.empty()) throw ConfigError(source, lineno, "empty value for '" + key + "'");
    try {
      it->second(value);
    } catch (const std::exception& e) {
      throw ConfigError(source, lineno, key + ": " + e.what());
    }
  }

  auto at = [&](const std::string& full) { return seen.count(full) ? seen[full] : 0; };
  if (!has_seed) throw ConfigError(source, 0, "missing mandatory key 'seed'");
  for (const auto& t : cfg.tasks)
    if (std::find(known_tasks().begin(), known_tasks().end(), t) == known_tasks().end())
      throw ConfigError(source, at("run.tasks"), "unknown task '" + t + "'");
  if (cfg.jobs < 1) throw ConfigError(source, at("run.jobs"), "jobs must be at least 1");

  const bool needs_system = std::any_of(cfg.tasks.begin(), cfg.tasks.end(),
                                        [](const std::string& t) { return t != "verify" && t != "example"; });
  if (needs_system && !has_system) throw ConfigError(source, 0, "tasks need a [system] with 'kind'");
  std::optional<System> system;
  try {
    system.emplace(cfg.system);
  } catch (const std::exception& e) {
    throw ConfigError(source, line_of.count("system") ? line_of["system"] : 0, std::string("[system] ") + e.what());
  }
  if (has_measure) {
    try {
      make_measure(measure, *system);
    } catch (const std::exception& e) {
      throw ConfigError(source, line_of["measure"], std::string("[measure] ") + e.what());
    }
    cfg.measure = measure;
  }
  for (const char* t : {"katok", "brin_katok", "shapira"})
    if (std::find(cfg.tasks.begin(), cfg.tasks.end(), t) != cfg.tasks.end() && !cfg.measure)
      throw ConfigError(source, 0, std::string("task '") + t + "' needs a [measure] with 'kind'");

  if (cfg.eps.empty()) cfg.eps = parse_real_list("2^-3..2^-7");
  if (cfg.n.empty()) cfg.n = parse_int_list(system->symbolic() ? "2..10" : "2..8");
  if (cfg.bk_n.empty()) cfg.bk_n = cfg.n;
  for (double e : cfg.eps)
    if (!(e > 0)) throw ConfigError(source, at("ladder.eps"), "eps values must be positive");
  for (double d : cfg.delta)
    if (!(d > 0 && d < 1)) throw ConfigError(source, at("ladder.delta"), "delta values must lie in (0, 1)");
  for (double d : cfg.verify_delta)
    if (!(d > 0 && d < 1)) throw ConfigError(source, at("verify.delta"), "delta values must lie in (0, 1)");
  auto increasing = [](const std::vector<int>& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] < 1 || (i && v[i] <= v[i - 1])) return false;
    return v.size() >= 3;
  };
  if (!increasing(cfg.n)) throw ConfigError(source, at("ladder.n"), "n ladder needs >= 3 increasing positive entries");
  if (!increasing(cfg.bk_n)) throw ConfigError(source, at("ladder.bk_n"), "bk_n ladder needs >= 3 increasing positive entries");
  if (!increasing(cfg.verify_n)) throw ConfigError(source, at("verify.n"), "n ladder needs >= 3 increasing positive entries");
  if (!(cfg.tail_fraction > 0 && cfg.tail_fraction <= 1))
    throw ConfigError(source, at("ladder.tail_fraction"), "tail_fraction must lie in (0, 1]");
  if (cfg.cover != "spanning" && cfg.cover != "cylinder")
    throw ConfigError(source, at("cover.construction"), "construction must be 'spanning' or 'cylinder'");
  if (cfg.points < 1) throw ConfigError(source, at("budget.points"), "points must be at least 1");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  return parse_config(in, path);
}

std::string canonical_form(const ExperimentConfig& c) {
  std::ostringstream os;
  std::vector<std::string> tasks = c.tasks;
  os << "tasks=" << [&] {
    std::string s;
    for (std::size_t i = 0; i < tasks.size(); ++i) s += (i ? "," : "") + tasks[i];
    return s;
  }() << "\n";
  os << "system.kind=" << to_string(c.system.kind) << "\nsystem.alphabet=" << c.system.alphabet << "\nsystem.forbidden=";
  for (std::size_t i = 0; i < c.system.forbidden.size(); ++i) os << (i ? "," : "") << c.system.forbidden[i];
  os << "\nsystem.window=" << c.system.window << "\nsystem.grid=" << c.system.grid
     << "\nsystem.precision=" << fmt17(c.system.precision) << "\n";
  if (c.measure) {
    os << "measure.kind=" << to_string(c.measure->kind) << "\nmeasure.weights=" << join(c.measure->weights)
       << "\nmeasure.orbit_length=" << c.measure->orbit_length << "\nmeasure.orbit_seed=" << c.measure->seed
       << "\nmeasure.orbit_pad=" << c.measure->orbit_pad << "\n";
  }
  os << "ladder.eps=" << join(c.eps) << "\nladder.n=" << join(c.n) << "\nladder.delta=" << join(c.delta)
     << "\nladder.bk_n=" << join(c.bk_n) << "\nladder.radius=" << join(c.radius) << "\nladder.mode=" << to_string(c.mode)
     << "\nladder.statistic=" << to_string(c.statistic) << "\nladder.tail_fraction=" << fmt17(c.tail_fraction) << "\n";
  os << "budget.samples=" << c.samples << "\nbudget.nodes=" << c.nodes << "\nbudget.max_points=" << c.max_points
     << "\nbudget.enumerate=" << c.enumerate << "\nbudget.points=" << c.points << "\n";
  os << "cover.construction=" << c.cover << "\ncover.generation=" << c.generation << "\n";
  os << "verify.eps=" << join(c.verify_eps) << "\nverify.n=" << join(c.verify_n) << "\nverify.delta=" << join(c.verify_delta)
     << "\nverify.statistical=" << c.verify_statistical << "\n";
  os << "example.eps=" << join(c.example_eps) << "\nexample.grid=" << c.example_grid
     << "\nexample.window=" << c.example_window << "\nexample.n=" << join(c.example_n)
     << "\nexample.bk_n=" << join(c.example_bk_n) << "\n";
  return os.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_form(cfg)) h = (h ^ ch) * 0x100000001b3ULL;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mdim::cli
