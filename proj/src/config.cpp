#include "todalab/config.hpp"

#include <fstream>
#include <set>

namespace todalab {

namespace {

using Json = nlohmann::json;

const std::set<std::string> kCommands{"solve", "monotonicity", "order", "curvature", "fold", "limit"};

void require_object(const Json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError(path + "." + key + ": unknown key");
}

double get_number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

long long get_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return j.get<long long>();
}

std::vector<double> get_numbers(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array");
  std::vector<double> v;
  for (std::size_t k = 0; k < j.size(); ++k) v.push_back(get_number(j[k], path + "[" + std::to_string(k) + "]"));
  return v;
}

}  // namespace

RunConfig parse_config(const Json& j) {
  require_object(j, "$", {"description", "command", "coupling", "grid", "divisors", "amplitudes", "solver",
                          "experiment", "seed", "out"});
  RunConfig c;
  if (j.contains("description")) {
    if (!j["description"].is_string()) throw ConfigError("$.description: expected a string");
    c.description = j["description"].get<std::string>();
  }
  if (!j.contains("command") || !j["command"].is_string()) throw ConfigError("$.command: required string");
  c.command = j["command"].get<std::string>();
  if (!kCommands.count(c.command)) throw ConfigError("$.command: unknown command '" + c.command + "'");

  if (!j.contains("coupling")) throw ConfigError("$.coupling: required");
  const Json& cp = j["coupling"];
  require_object(cp, "$.coupling", {"type", "rank", "fold"});
  if (!cp.contains("type") || !cp["type"].is_string()) throw ConfigError("$.coupling.type: required string");
  if (!cp.contains("rank")) throw ConfigError("$.coupling.rank: required");
  try {
    c.coupling.type = parse_lie_type(cp["type"].get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("$.coupling.type: ") + e.what());
  }
  c.coupling.rank = static_cast<int>(get_int(cp["rank"], "$.coupling.rank"));
  try {
    validate_type_rank(c.coupling.type, c.coupling.rank);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("$.coupling: ") + e.what());
  }
  if (cp.contains("fold")) {
    if (!cp["fold"].is_boolean()) throw ConfigError("$.coupling.fold: expected a boolean");
    c.coupling.fold = cp["fold"].get<bool>();
  }
  if (c.command == "fold" && c.coupling.fold)
    throw ConfigError("$.coupling.fold: the fold experiment takes data on the unfolded diagram; set it to false");

  if (j.contains("grid")) {
    const Json& g = j["grid"];
    require_object(g, "$.grid", {"L", "N"});
    if (g.contains("L")) c.L = get_number(g["L"], "$.grid.L");
    if (g.contains("N")) c.N = static_cast<int>(get_int(g["N"], "$.grid.N"));
    if (!(c.L > 0)) throw ConfigError("$.grid.L: must be positive");
    if (c.N < 4 || c.N % 2 != 0) throw ConfigError("$.grid.N: must be even and at least 4");
  }

  int nodes = 0;
  try {
    nodes = affine_by_spec(c.coupling.type, c.coupling.rank, c.coupling.fold).size;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("$.coupling: ") + e.what());
  }
  c.divisors.assign(nodes, Divisor{});
  if (j.contains("divisors")) {
    const Json& ds = j["divisors"];
    if (!ds.is_array()) throw ConfigError("$.divisors: expected an array");
    std::set<int> seen;
    for (std::size_t k = 0; k < ds.size(); ++k) {
      const std::string path = "$.divisors[" + std::to_string(k) + "]";
      require_object(ds[k], path, {"node", "points"});
      if (!ds[k].contains("node")) throw ConfigError(path + ".node: required");
      const auto node = get_int(ds[k]["node"], path + ".node");
      if (node < 0 || node >= nodes) throw ConfigError(path + ".node: out of range");
      if (!seen.insert(static_cast<int>(node)).second) throw ConfigError(path + ".node: listed twice");
      const Json& pts = ds[k].contains("points") ? ds[k]["points"] : Json::array();
      if (!pts.is_array()) throw ConfigError(path + ".points: expected an array");
      for (std::size_t q = 0; q < pts.size(); ++q) {
        const std::string pp = path + ".points[" + std::to_string(q) + "]";
        require_object(pts[q], pp, {"i", "j", "m"});
        if (!pts[q].contains("i") || !pts[q].contains("j")) throw ConfigError(pp + ": needs i and j");
        GridPoint gp{static_cast<int>(get_int(pts[q]["i"], pp + ".i")), static_cast<int>(get_int(pts[q]["j"], pp + ".j"))};
        if (gp.i < 0 || gp.i >= c.N || gp.j < 0 || gp.j >= c.N) throw ConfigError(pp + ": outside the grid");
        const long long m = pts[q].contains("m") ? get_int(pts[q]["m"], pp + ".m") : 1;
        if (m <= 0) throw ConfigError(pp + ".m: multiplicity must be positive");
        c.divisors[node].points.emplace_back(gp, static_cast<int>(m));
      }
    }
  }
  if (j.contains("amplitudes")) {
    c.amplitudes = get_numbers(j["amplitudes"], "$.amplitudes");
    if (static_cast<int>(c.amplitudes.size()) != nodes)
      throw ConfigError("$.amplitudes: expected " + std::to_string(nodes) + " entries");
  }

  if (j.contains("solver")) {
    const Json& s = j["solver"];
    require_object(s, "$.solver", {"tol", "max_iter", "max_backtracks"});
    if (s.contains("tol")) c.solver.tol = get_number(s["tol"], "$.solver.tol");
    if (s.contains("max_iter")) c.solver.max_iter = static_cast<int>(get_int(s["max_iter"], "$.solver.max_iter"));
    if (s.contains("max_backtracks"))
      c.solver.max_backtracks = static_cast<int>(get_int(s["max_backtracks"], "$.solver.max_backtracks"));
    if (!(c.solver.tol > 0)) throw ConfigError("$.solver.tol: must be positive");
    if (c.solver.max_iter < 1) throw ConfigError("$.solver.max_iter: must be at least 1");
    if (c.solver.max_backtracks < 0) throw ConfigError("$.solver.max_backtracks: must be nonnegative");
  }

  if (j.contains("experiment")) {
    const Json& e = j["experiment"];
    require_object(e, "$.experiment", {"mode", "t", "t_values", "eps_values", "tau"});
    if (e.contains("mode")) {
      if (!e["mode"].is_string()) throw ConfigError("$.experiment.mode: expected a string");
      try {
        c.mode = parse_mode(e["mode"].get<std::string>());
      } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("$.experiment.mode: ") + err.what());
      }
    }
    if (e.contains("t")) c.t = get_number(e["t"], "$.experiment.t");
    if (e.contains("t_values")) c.t_values = get_numbers(e["t_values"], "$.experiment.t_values");
    if (e.contains("eps_values")) c.eps_values = get_numbers(e["eps_values"], "$.experiment.eps_values");
    if (e.contains("tau")) c.tau = get_number(e["tau"], "$.experiment.tau");
    if (!(c.t > 0)) throw ConfigError("$.experiment.t: must be positive");
    for (double t : c.t_values)
      if (!(t > 0)) throw ConfigError("$.experiment.t_values: entries must be positive");
    if (!(c.tau >= 0 && c.tau < 1)) throw ConfigError("$.experiment.tau: must lie in [0, 1)");
  }

  if (j.contains("seed")) {
    const auto s = get_int(j["seed"], "$.seed");
    if (s < 0) throw ConfigError("$.seed: must be nonnegative");
    c.seed = static_cast<unsigned long long>(s);
  }
  if (j.contains("out")) {
    if (!j["out"].is_string()) throw ConfigError("$.out: expected a string");
    c.out = j["out"].get<std::string>();
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

nlohmann::json to_json(const RunConfig& c) {
  Json divs = Json::array();
  for (std::size_t k = 0; k < c.divisors.size(); ++k) {
    if (c.divisors[k].points.empty()) continue;
    Json pts = Json::array();
    for (const auto& [p, m] : c.divisors[k].points) pts.push_back({{"i", p.i}, {"j", p.j}, {"m", m}});
    divs.push_back({{"node", k}, {"points", pts}});
  }
  Json j{{"command", c.command},
         {"coupling", {{"type", std::string(1, to_char(c.coupling.type))}, {"rank", c.coupling.rank}, {"fold", c.coupling.fold}}},
         {"grid", {{"L", c.L}, {"N", c.N}}},
         {"divisors", divs},
         {"solver", {{"tol", c.solver.tol}, {"max_iter", c.solver.max_iter}, {"max_backtracks", c.solver.max_backtracks}}},
         {"experiment",
          {{"mode", to_string(c.mode)}, {"t", c.t}, {"t_values", c.t_values}, {"eps_values", c.eps_values}, {"tau", c.tau}}},
         {"seed", c.seed}};
  if (!c.description.empty()) j["description"] = c.description;
  if (!c.amplitudes.empty()) j["amplitudes"] = c.amplitudes;
  return j;
}

ExperimentSetup make_setup(const RunConfig& c) {
  ExperimentSetup s;
  s.grid = TorusGrid(c.L, c.N);
  s.system = affine_by_spec(c.coupling.type, c.coupling.rank, c.coupling.fold);
  if (c.coupling.fold) s.unfolded = affine_by_spec(c.coupling.type, c.coupling.rank, false);
  s.divisors = c.divisors;
  s.amplitudes = c.amplitudes;
  s.solver = c.solver;
  s.tau = c.tau;
  return s;
}

}  // namespace todalab
