#include "todalab/config.hpp"
#include "todalab/experiments.hpp"
#include "todalab/folding.hpp"
#include "todalab/log.hpp"
#include "todalab/maxprin.hpp"
#include "todalab/rootsys.hpp"
#include "todalab/toda.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace todalab;

namespace {

enum Exit { ok = 0, verdict_failed = 1, usage = 2, solver_failed = 3, io_failed = 4, rejected = 5 };

const char* kExitCodes =
    "Exit codes:\n"
    "  0  success, every verdict passed\n"
    "  1  a verdict or invariant check failed\n"
    "  2  usage or config schema error\n"
    "  3  solver failure (Newton or continuation did not converge)\n"
    "  4  I/O error\n"
    "  5  input rejected by an experiment hypothesis or assembly compatibility check\n";

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

/// summary.json plus fields/<name>.tgrd and fields/<name>.csv.
void write_tree(const fs::path& dir, const json& summary, const TorusGrid& grid,
                const std::vector<std::pair<std::string, Field>>& fields) {
  std::error_code ec;
  fs::create_directories(dir / "fields", ec);
  if (ec) throw IoError("cannot create " + (dir / "fields").string() + ": " + ec.message());
  try {
    for (const auto& [name, f] : fields) {
      write_tgrd((dir / "fields" / (name + ".tgrd")).string(), grid.N(), {f});
      write_csv((dir / "fields" / (name + ".csv")).string(), grid, {name}, {f});
    }
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  write_text(dir / "summary.json", summary.dump(2) + "\n");
}

LieType lie_type_arg(const std::string& s) {
  try {
    return parse_lie_type(s);
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError("type", e.what());
  }
}

int cmd_root(const std::string& action, const std::string& type, int rank) {
  const RootSystem rs = build_root_system(lie_type_arg(type), rank);
  if (action == "info") {
    std::cout << to_json(rs).dump(2) << "\n";
    return ok;
  }
  json checks = json::array();
  bool all = true;
  for (const auto& c : check_invariants(rs)) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}});
    all = all && c.passed;
  }
  std::cout << json{{"type", type}, {"rank", rank}, {"checks", checks}, {"passed", all}}.dump(2) << "\n";
  return all ? ok : verdict_failed;
}

int cmd_fold(const std::string& type, int rank) {
  const LieType t = lie_type_arg(type);
  const AffineSystem ext = affine_by_spec(t, rank, false);
  const AffineSystem folded = affine_by_spec(t, rank, true);
  std::cout << json{{"unfolded", to_json(ext)}, {"folded", to_json(folded)}}.dump(2) << "\n";
  return ok;
}

MatrixField read_matrix_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed matrix file: ") + e.what());
  }
  auto to_matrix = [](const json& m) {
    if (!m.is_array() || m.empty()) throw ConfigError("matrix must be a nonempty array of rows");
    const auto n = static_cast<Eigen::Index>(m.size());
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!m[i].is_array() || static_cast<Eigen::Index>(m[i].size()) != n) throw ConfigError("matrix must be square");
      for (Eigen::Index k = 0; k < n; ++k) {
        if (!m[i][k].is_number()) throw ConfigError("matrix entries must be numbers");
        M(i, k) = m[i][k].get<double>();
      }
    }
    return M;
  };
  if (!j.is_object()) throw ConfigError("matrix file must hold an object with 'matrix' or 'samples'");
  for (const auto& [key, value] : j.items())
    if (key != "matrix" && key != "samples") throw ConfigError("unknown key '" + key + "' in matrix file");
  MatrixField C;
  if (j.contains("matrix") == j.contains("samples")) throw ConfigError("give exactly one of 'matrix' or 'samples'");
  if (j.contains("matrix")) {
    C = MatrixField::constant(to_matrix(j["matrix"]));
  } else {
    if (!j["samples"].is_array() || j["samples"].empty()) throw ConfigError("'samples' must be a nonempty array");
    for (const auto& s : j["samples"]) C.samples.push_back(to_matrix(s));
    C.n = static_cast<int>(C.samples.front().rows());
  }
  try {
    C.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return C;
}

Eigen::VectorXd parse_vector(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--nu expects comma-separated numbers, got '" + s + "'");
    }
  }
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

int cmd_mp_check(const std::string& matrix, const std::string& nu, const std::optional<double>& K) {
  const MatrixField C = read_matrix_field(matrix);
  const CheckVerdict coop = check_cooperative(C);
  const CheckVerdict cdd = check_cdd(C);
  const CouplingVerdict coupled = check_fully_coupled(C);
  json out{{"n", C.n},
           {"samples", C.samples.size()},
           {"cooperative", to_json(coop)},
           {"column_diagonally_dominant", to_json(cdd)},
           {"fully_coupled", to_json(coupled)}};
  bool pass = coop.ok && cdd.ok && coupled.ok;
  if (!nu.empty()) {
    const Eigen::VectorXd v = parse_vector(nu);
    if (v.size() != C.n) throw ConfigError("--nu length must match the matrix size");
    if (C.samples.size() != 1) throw ConfigError("--nu/--K need a constant matrix");
    const SubsetGraph g = build_subset_graph(C, v, K.value_or(1.0));
    out["subset_graph"] = {{"hypotheses_ok", g.hypotheses_ok},
                           {"minimal_ok", g.minimal_ok},
                           {"reachable_ok", g.reachable_ok},
                           {"smaller_subset_ok", g.smaller_subset_ok},
                           {"closed_form_deviation", g.closed_form_deviation},
                           {"vertices", g.setup.labels.size()}};
    if (!g.error.empty()) out["subset_graph"]["error"] = g.error;
    pass = pass && g.hypotheses_ok;
  } else if (K) {
    throw ConfigError("--K needs --nu");
  }
  out["pass"] = pass;
  std::cout << out.dump(2) << "\n";
  return pass ? ok : verdict_failed;
}

fs::path out_dir(const RunConfig& c, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (c.out) return *c.out;
  throw ConfigError("no output directory: pass --out or set \"out\" in the config");
}

int cmd_solve(const std::string& config, const std::string& out) {
  const RunConfig c = load_config(config);
  const fs::path dir = out_dir(c, out);
  const ExperimentSetup s = make_setup(c);
  AssembleOptions opt;
  opt.mode = c.mode;
  opt.t = c.t;
  opt.amplitudes = c.amplitudes;
  const TodaProblem p = assemble(s.grid, s.system, s.divisors, opt);
  const TodaSolution sol = newton_solve(p, std::nullopt, c.solver);
  const DerivedFields d = derived_fields(p, sol);
  json summary{{"config", to_json(c)},
               {"system", to_json(s.system)},
               {"solution",
                {{"t", sol.t},
                 {"iterations", sol.iterations},
                 {"residual_sup", sol.residual_sup},
                 {"residual_per_node", sol.residual_per_node},
                 {"pin", sol.pin},
                 {"history", sol.history}}},
               {"Q_min", *std::min_element(d.Q.begin(), d.Q.end())}};
  std::vector<std::pair<std::string, Field>> fields;
  for (int i = 0; i < p.nodes(); ++i) {
    fields.emplace_back("u_" + std::to_string(i), sol.u[i]);
    fields.emplace_back("e_" + std::to_string(i), d.e[i]);
  }
  fields.emplace_back("energy", d.energy);
  fields.emplace_back("Q", d.Q);
  write_tree(dir, summary, s.grid, fields);
  std::cout << summary["solution"].dump(2) << "\n";
  return ok;
}

int cmd_exp(const std::string& which, const std::string& config, const std::string& out) {
  const RunConfig c = load_config(config);
  const std::map<std::string, std::string> command_of{{"monotonicity", "monotonicity"}, {"order", "order"},
                                                      {"curvature", "curvature"}, {"fold", "fold"},
                                                      {"limit", "limit"}};
  if (c.command != command_of.at(which))
    throw ConfigError("config is for command '" + c.command + "', not '" + which + "'");
  const fs::path dir = out_dir(c, out);
  const ExperimentSetup s = make_setup(c);
  Verdict v;
  if (which == "monotonicity") v = monotonicity_experiment(s, c.t_values);
  else if (which == "order") v = ordering_experiment(s);
  else if (which == "curvature") v = curvature_experiment(s, c.t);
  else if (which == "fold")
    v = folding_consistency_experiment(c.coupling.type, c.coupling.rank, s.grid, c.divisors, c.amplitudes, c.t,
                                       c.solver);
  else v = limit_experiment(s, c.eps_values);
  json summary{{"config", to_json(c)}, {"verdict", to_json(v)}};
  json artifacts = json::array();
  for (const auto& f : v.fields) {
    artifacts.push_back("fields/" + f.first + ".tgrd");
    artifacts.push_back("fields/" + f.first + ".csv");
  }
  summary["verdict"]["artifacts"] = artifacts;
  write_tree(dir, summary, s.grid, v.fields);
  std::cout << json{{"name", v.name}, {"pass", v.pass}, {"margin", v.margin}}.dump() << "\n";
  return v.pass ? ok : verdict_failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"todalab: root data, folds, maximum principles and Toda solves on a periodic grid"};
  app.footer(kExitCodes);
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress warnings on stderr");
  app.fallthrough();

  std::string type, action, config, out, matrix, nu;
  int rank = 0;
  std::optional<double> K;

  auto* root = app.add_subcommand("root", "Root system data and invariant checks");
  root->add_option("action", action, "info | check")->required()->check(CLI::IsMember({"info", "check"}));
  root->add_option("type", type, "Lie type A..G")->required();
  root->add_option("rank", rank, "Rank")->required();

  auto* fold = app.add_subcommand("fold", "Unfolded and folded affine matrices, kernels and orbit map");
  fold->add_option("type", type, "Lie type A..G")->required();
  fold->add_option("rank", rank, "Rank")->required();

  auto* mp = app.add_subcommand("mp", "Maximum principle checks on matrix fields");
  auto* mp_check = mp->add_subcommand("check", "Cooperative, column dominance, coupling and subset-graph checks");
  mp->require_subcommand(1);
  mp_check->add_option("--matrix", matrix, "JSON file with 'matrix' or 'samples'")->required();
  mp_check->add_option("--nu", nu, "Comma-separated positive vector for the subset graph");
  mp_check->add_option("--K", K, "Scale of the K nu vertex (default 1)");

  auto* solve = app.add_subcommand("solve", "Solve one Toda problem from a config");
  solve->add_option("--config", config, "Config JSON")->required();
  solve->add_option("--out", out, "Output directory");

  auto* exp = app.add_subcommand("exp", "Run one experiment from a config");
  exp->add_option("kind", action, "monotonicity | order | curvature | fold | limit")
      ->required()
      ->check(CLI::IsMember({"monotonicity", "order", "curvature", "fold", "limit"}));
  exp->add_option("--config", config, "Config JSON")->required();
  exp->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }
  set_warnings_enabled(!quiet);

  try {
    if (*root) return cmd_root(action, type, rank);
    if (*fold) return cmd_fold(type, rank);
    if (*mp_check) return cmd_mp_check(matrix, nu, K);
    if (*solve) return cmd_solve(config, out);
    if (*exp) return cmd_exp(action, config, out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return usage;
  } catch (const ExperimentRejected& e) {
    std::cerr << "rejected: " << e.what() << "\n";
    return rejected;
  } catch (const AssemblyError& e) {
    std::cerr << "rejected: " << e.what() << "\n";
    return rejected;
  } catch (const NewtonFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return solver_failed;
  } catch (const SweepFailure& e) {
    std::cerr << "solver failure at t = " << e.t << ": " << e.what() << "\n";
    return solver_failed;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return io_failed;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return usage;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return io_failed;
  }
  return usage;
}
