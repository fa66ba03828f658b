#pragma once

#include "todalab/experiments.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace todalab {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CouplingSpec {
  LieType type = LieType::A;
  int rank = 1;
  bool fold = false;
};

/// Parsed run configuration. Every object level is closed: unknown keys are
/// rejected with their JSON path.
///
/// {
///   "description": "...",                      optional free text
///   "command": "solve|monotonicity|order|curvature|fold|limit",
///   "coupling": {"type": "C", "rank": 2, "fold": false},
///   "grid": {"L": 6.283185307179586, "N": 64},
///   "divisors": [{"node": 0, "points": [{"i": 0, "j": 0, "m": 1}]}],
///   "amplitudes": [0, 0, 0],                   optional, per node
///   "solver": {"tol": 1e-10, "max_iter": 50, "max_backtracks": 20},
///   "experiment": {"mode": "raw", "t": 1, "t_values": [...], "eps_values": [...], "tau": 1e-6},
///   "seed": 0,
///   "out": "dir"                               optional, --out wins
/// }
struct RunConfig {
  std::string description;
  std::string command;
  CouplingSpec coupling;
  double L = 2 * 3.14159265358979323846;
  int N = 64;
  std::vector<Divisor> divisors;  // indexed by node, sized once the coupling is known
  std::vector<double> amplitudes;
  SolverOptions solver;
  Mode mode = Mode::raw;
  double t = 1.0;
  std::vector<double> t_values{0.5, 1.0, 2.0};
  std::vector<double> eps_values{1.0, 1.0 / 16, 1.0 / 256, 1.0 / 4096, 1.0 / 65536, 1.0 / 1048576};
  double tau = 1e-6;
  unsigned long long seed = 0;
  std::optional<std::string> out;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

nlohmann::json to_json(const RunConfig& c);

/// System (folded when requested), its unfolded diagram, divisors and grid.
ExperimentSetup make_setup(const RunConfig& c);

}  // namespace todalab
