#include "lrbs/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "lrbs/cml.hpp"
#include "lrbs/logistic.hpp"

namespace lrbs {

namespace {

const std::pair<ExperimentKind, const char*> kKinds[] = {
    {ExperimentKind::simulate, "simulate"},
    {ExperimentKind::cml, "cml"},
    {ExperimentKind::couple, "couple"},
    {ExperimentKind::two_species, "two-species"},
    {ExperimentKind::logistic, "logistic"},
    {ExperimentKind::lemma7, "lemma7"},
    {ExperimentKind::percolation, "percolation"},
    {ExperimentKind::survival_sweep, "survival-sweep"},
    {ExperimentKind::coexistence_sweep, "coexistence-sweep"},
    {ExperimentKind::complete_convergence, "complete-convergence"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& v, int line, const std::string& key) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    fail(line, key + ": expected a number, got '" + v + "'");
  return out;
}

std::int64_t to_int(const std::string& v, int line, const std::string& key) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) fail(line, key + ": expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& v, int line, const std::string& key) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) fail(line, key + ": expected a nonnegative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(line, key + ": expected true or false");
}

std::vector<double> to_doubles(const std::string& v, int line, const std::string& key) {
  std::vector<double> out;
  for (const auto& part : split(v, ',')) out.push_back(to_double(part, line, key));
  return out;
}

std::pair<Offset, double> parse_kernel_line(const std::string& text, int line, int dim) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) fail(line, "kernel entries are written 'offset: weight'");
  const auto coords = split(trim(text.substr(0, colon)), ',');
  if (static_cast<int>(coords.size()) != dim)
    fail(line, "kernel offset needs " + std::to_string(dim) + " coordinate(s)");
  Offset o{};
  for (int i = 0; i < dim; ++i) o[i] = static_cast<int>(to_int(coords[static_cast<std::size_t>(i)], line, "offset"));
  return {o, to_double(trim(text.substr(colon + 1)), line, "weight")};
}

ModelParams build_model(double m, const KernelWeights& disp, const KernelWeights& comp, double lambda0, double kappa,
                        double hold, int dim, const Lattice& lattice, const char* which) {
  try {
    auto p = disp.empty() ? lazy_walk(dim, hold) : make_dispersal_kernel(dim, disp);
    auto lam = comp.empty() ? nearest_neighbour_competition(dim, lambda0, kappa) : make_competition_kernel(dim, comp);
    return make_model(m, std::move(p), std::move(lam), lattice);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(which) + ": " + e.what());
  }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKinds)
    if (k == kind) return name;
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
  for (const auto& [k, n] : kKinds)
    if (name == n) return k;
  return std::nullopt;
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& [k, n] : kKinds) out.emplace_back(n);
  return out;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

RunConfig parse_config(std::string_view text, std::optional<ExperimentKind> subcommand) {
  RunConfig cfg;
  std::map<std::string, std::pair<std::string, int>> kv;
  std::map<std::string, std::vector<std::pair<std::string, int>>> sections;
  static const std::vector<std::string> section_names = {"dispersal", "competition", "dispersal2",
                                                          "competition2", "cross12", "cross21"};
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail(line, "unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      if (std::find(section_names.begin(), section_names.end(), section) == section_names.end())
        fail(line, "unknown section [" + section + "]");
      if (sections.count(section)) fail(line, "duplicate section [" + section + "]");
      sections[section];
      continue;
    }
    if (!section.empty()) {
      sections[section].emplace_back(body, line);
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
    if (key.empty()) fail(line, "missing key");
    if (kv.count(key)) fail(line, "duplicate key '" + key + "'");
    kv[key] = {value, line};
  }

  // dim first: it shapes extents and kernel offsets.
  if (auto it = kv.find("dim"); it != kv.end()) {
    cfg.dim = static_cast<int>(to_int(it->second.first, it->second.second, "dim"));
    if (cfg.dim < 1 || cfg.dim > kMaxDim) fail(it->second.second, "dim must be 1.." + std::to_string(kMaxDim));
    kv.erase(it);
  }
  cfg.extent.assign(static_cast<std::size_t>(cfg.dim), 64);
  bool seed_seen = false;

  for (const auto& [key, entry] : kv) {
    const auto& [v, ln] = entry;
    if (key == "experiment") {
      cfg.kind = parse_experiment_kind(v);
      if (!cfg.kind) fail(ln, "unknown experiment '" + v + "'");
    } else if (key == "seed") {
      cfg.seed = to_uint(v, ln, key);
      seed_seen = true;
    } else if (key == "extent") {
      auto parts = split(v, ',');
      if (parts.size() == 1) parts = std::vector<std::string>(static_cast<std::size_t>(cfg.dim), parts[0]);
      if (static_cast<int>(parts.size()) != cfg.dim) fail(ln, "extent needs 1 or dim values");
      for (std::size_t i = 0; i < parts.size(); ++i) cfg.extent[i] = static_cast<int>(to_int(parts[i], ln, key));
    } else if (key == "boundary") {
      if (v == "periodic")
        cfg.boundary = Boundary::periodic;
      else if (v == "zero")
        cfg.boundary = Boundary::zero;
      else
        fail(ln, "boundary must be periodic or zero");
    } else if (key == "m") {
      cfg.m = to_double(v, ln, key);
    } else if (key == "lambda0") {
      cfg.lambda0 = to_double(v, ln, key);
    } else if (key == "kappa") {
      cfg.kappa = to_double(v, ln, key);
    } else if (key == "hold") {
      cfg.hold = to_double(v, ln, key);
    } else if (key == "m2") {
      cfg.m2 = to_double(v, ln, key);
    } else if (key == "lambda0_2") {
      cfg.lambda0_2 = to_double(v, ln, key);
    } else if (key == "kappa_2") {
      cfg.kappa_2 = to_double(v, ln, key);
    } else if (key == "cross") {
      cfg.cross = to_double(v, ln, key);
    } else if (key == "steps") {
      cfg.steps = to_int(v, ln, key);
      if (cfg.steps < 0) fail(ln, "steps must be >= 0");
    } else if (key == "replicas") {
      cfg.replicas = static_cast<int>(to_int(v, ln, key));
      if (cfg.replicas < 1) fail(ln, "replicas must be >= 1");
    } else if (key == "snapshots") {
      for (const auto& part : split(v, ',')) cfg.snapshots.push_back(to_int(part, ln, key));
    } else if (key == "early_stop") {
      cfg.early_stop = to_bool(v, ln, key);
    } else if (key == "init") {
      if (v != "mbar" && v != "single" && v != "constant" && v != "zero")
        fail(ln, "init must be mbar, single, constant or zero");
      cfg.init = v;
    } else if (key == "init_value") {
      cfg.init_value = to_double(v, ln, key);
    } else if (key == "window_radius") {
      cfg.window_radius = static_cast<int>(to_int(v, ln, key));
    } else if (key == "eps1") {
      cfg.eps1 = to_double(v, ln, key);
    } else if (key == "eps2") {
      cfg.eps2 = to_double(v, ln, key);
    } else if (key == "delta") {
      cfg.delta = to_double(v, ln, key);
    } else if (key == "K") {
      cfg.K = to_double(v, ln, key);
    } else if (key == "m_tilde") {
      cfg.m_tilde = to_double(v, ln, key);
    } else if (key == "tol") {
      cfg.tol = to_double(v, ln, key);
    } else if (key == "hold_steps") {
      cfg.hold_steps = static_cast<int>(to_int(v, ln, key));
    } else if (key == "eq36_N") {
      cfg.eq36_N = to_int(v, ln, key);
    } else if (key == "perturbation") {
      cfg.perturbation = to_double(v, ln, key);
    } else if (key == "m_values") {
      cfg.m_values = to_doubles(v, ln, key);
    } else if (key == "eps_values") {
      cfg.eps_values = to_doubles(v, ln, key);
    } else if (key == "theta") {
      cfg.theta = to_double(v, ln, key);
    } else if (key == "half_width") {
      cfg.half_width = static_cast<int>(to_int(v, ln, key));
    } else if (key == "horizon") {
      cfg.horizon = static_cast<int>(to_int(v, ln, key));
    } else if (key == "cone") {
      cfg.cone = to_double(v, ln, key);
    } else if (key == "burn_in") {
      cfg.burn_in = static_cast<int>(to_int(v, ln, key));
    } else if (key == "lambda0_values") {
      cfg.lambda0_values = to_doubles(v, ln, key);
    } else if (key == "cross_values") {
      cfg.cross_values = to_doubles(v, ln, key);
    } else if (key == "burn") {
      cfg.burn = to_int(v, ln, key);
    } else if (key == "bin_width") {
      cfg.bin_width = to_double(v, ln, key);
      if (!(cfg.bin_width > 0.0)) fail(ln, "bin_width must be positive");
    } else {
      fail(ln, "unknown key '" + key + "'");
    }
  }
  if (!seed_seen) throw ConfigError("seed required");
  if (subcommand) {
    if (cfg.kind && *cfg.kind != *subcommand)
      throw ConfigError("config is for experiment '" + to_string(*cfg.kind) + "', not '" + to_string(*subcommand) + "'");
    cfg.kind = subcommand;
  }

  auto kernel_of = [&](const char* name) {
    KernelWeights w;
    if (auto it = sections.find(name); it != sections.end()) {
      if (it->second.empty()) throw ConfigError(std::string("section [") + name + "] is empty");
      for (const auto& [txt, ln] : it->second) w.push_back(parse_kernel_line(txt, ln, cfg.dim));
    }
    return w;
  };
  cfg.dispersal_weights = kernel_of("dispersal");
  cfg.competition_weights = kernel_of("competition");
  cfg.dispersal2_weights = kernel_of("dispersal2");
  cfg.competition2_weights = kernel_of("competition2");
  cfg.cross12_weights = kernel_of("cross12");
  cfg.cross21_weights = kernel_of("cross21");

  Lattice lattice;
  try {
    lattice = Lattice(cfg.dim, cfg.extent, cfg.boundary);
  } catch (const GeometryError& e) {
    throw ConfigError(std::string("lattice: ") + e.what());
  }
  cfg.model = build_model(cfg.m, cfg.dispersal_weights, cfg.competition_weights, cfg.lambda0, cfg.kappa, cfg.hold,
                          cfg.dim, lattice, "model");
  cfg.lambda0 = cfg.model.lambda.lambda0();
  cfg.kappa = cfg.model.lambda.kappa();
  cfg.model2 = build_model(cfg.m2, cfg.dispersal2_weights, cfg.competition2_weights, cfg.lambda0_2, cfg.kappa_2,
                           cfg.hold, cfg.dim, lattice, "second type");
  cfg.lambda0_2 = cfg.model2.lambda.lambda0();
  cfg.kappa_2 = cfg.model2.lambda.kappa();

  auto& echo = cfg.echo;
  const auto c = derived_constants(cfg.model);
  echo.emplace_back("m_star", format_double(c.m_star));
  echo.emplace_back("M", format_double(c.M));
  echo.emplace_back("m_bar", format_double(c.m_bar_kappa));
  echo.emplace_back("m_bar_0", format_double(c.m_bar_0));
  if (cfg.m > 1.0) {
    if (cfg.m_tilde <= 0.0) cfg.m_tilde = default_m_tilde(cfg.m);
    echo.emplace_back("m_tilde", format_double(cfg.m_tilde));
    try {
      echo.emplace_back("n_star", std::to_string(colonization_horizon(cfg.model.p, cfg.m_tilde)));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("n*: ") + e.what());
    }
    if (cfg.eps1 < 0.0 || cfg.eps2 < 0.0) {
      const auto e = choose_epsilons(cfg.m, cfg.delta, cfg.m_tilde, cfg.model.p);
      if (cfg.eps1 < 0.0) cfg.eps1 = e.eps1;
      if (cfg.eps2 < 0.0) cfg.eps2 = e.eps2;
    }
  } else {
    if (cfg.eps1 < 0.0) cfg.eps1 = 0.1;
    if (cfg.eps2 < 0.0) cfg.eps2 = 0.1;
  }
  echo.emplace_back("eps1", format_double(cfg.eps1));
  echo.emplace_back("eps2", format_double(cfg.eps2));

  const bool two = cfg.kind == ExperimentKind::two_species || cfg.kind == ExperimentKind::coexistence_sweep;
  if (two) {
    if (!(cfg.m > 1.0 && cfg.m2 > 1.0)) throw ConfigError("two-type experiments need m > 1 and m2 > 1");
    const double gstar = coexistence_gamma_star(cfg.m, cfg.model.p, cfg.kappa / cfg.lambda0, cfg.m2, cfg.model2.p,
                                                cfg.kappa_2 / cfg.lambda0_2,
                                                std::max(cfg.model.lambda.range(), cfg.model2.lambda.range()),
                                                cfg.delta, cfg.K);
    echo.emplace_back("gamma_star", format_double(gstar));
    if (cfg.cross >= 0.0 && cfg.cross12_weights.empty() && cfg.cross21_weights.empty()) {
      const double w = cfg.cross * gstar * std::min(cfg.lambda0, cfg.lambda0_2);
      cfg.cross12_weights = {{Offset{}, w}};
      cfg.cross21_weights = {{Offset{}, w}};
    }
  }
  if (cfg.kind == ExperimentKind::lemma7 && cfg.m > 1.0) {
    const auto th = lemma7_thresholds(cfg.m, cfg.model.p, cfg.model.lambda.range(), cfg.eps1, cfg.eps2, cfg.delta,
                                      cfg.K, cfg.m_tilde);
    echo.emplace_back("lambda0_star", format_double(th.lambda0_star));
    echo.emplace_back("kappa_star", format_double(th.kappa_star));
    echo.emplace_back("box_size", std::to_string(th.box_size));
  }
  if (cfg.kind == ExperimentKind::cml && cfg.m > 1.0 && cfg.m < 3.0)
    echo.emplace_back("kappa_star", format_double(attractivity_kappa_star(cfg.m).kappa_star));
  return cfg;
}

RunConfig load_config(const std::string& path, std::optional<ExperimentKind> subcommand) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), subcommand);
}

ModelParams model_for_lambda0(const RunConfig& cfg, double lambda0) {
  KernelWeights comp = cfg.competition_weights;
  for (auto& [o, w] : comp) w *= lambda0 / cfg.lambda0;
  return build_model(cfg.m, cfg.dispersal_weights, comp, lambda0, cfg.kappa * lambda0 / cfg.lambda0, cfg.hold,
                     cfg.dim, cfg.model.lattice, "model");
}

}  // namespace lrbs
