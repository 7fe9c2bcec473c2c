#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qmarkov/lindblad.hpp"
#include "qmarkov/spinsys.hpp"

namespace qmarkov {

// validation failure; `keys` lists every offending config key
struct ConfigError : Error {
  std::vector<std::string> keys;
  ConfigError(const std::string& msg, std::vector<std::string> k) : Error(msg), keys(std::move(k)) {}
};

struct IoError : Error {
  using Error::Error;
};

enum class Experiment { verify, recovery, cmi, lr, dirichlet, patching, gap };
std::string experiment_name(Experiment e);

struct ModelConfig {
  std::string kind = "tfim";  // tfim, ising, random
  int n = 2;
  double J = 1.0, g = 1.0;    // tfim / ising
  int k = 2, m = 2;           // random
  bool periodic = false;
  std::uint64_t seed = 1;
};

struct ScenarioConfig {
  std::string id;
  ModelConfig model;
  double beta = 1.0;
  std::optional<double> sigma;  // nullopt means 1/beta
  WeightKind weight = WeightKind::metropolis;
  double omega_gamma = 0.0;
  Region region;
  std::vector<double> times;
  std::optional<int> ell;
  int patch_size = 2;
  int rounds = 1;
  Experiment experiment = Experiment::verify;
  Backend backend = Backend::spectral;
  std::uint64_t seed = 7;
  std::string output;

  double sigma_value() const { return sigma ? *sigma : 1.0 / beta; }
  Weight make_weight() const;
  Hamiltonian build_model() const;
};

// collects every problem before throwing
ScenarioConfig parse_config(const nlohmann::json& j, const std::string& default_id = "scenario");
ScenarioConfig load_config(const std::filesystem::path& path);

using Cell = std::variant<double, long, std::string>;

struct ResultRecord {
  std::string scenario_id;
  std::string experiment;
  std::vector<std::pair<std::string, Cell>> columns;
  std::optional<bool> pass;  // only for PASS-type checks
};

std::vector<ResultRecord> run_scenario(const ScenarioConfig& cfg);

// scientific, 17 significant digits
std::string format_double(double v);

std::string to_csv(const std::vector<ResultRecord>& records);
nlohmann::json summary_json(const ScenarioConfig& cfg, const std::vector<ResultRecord>& records);

enum class OutputFormat { csv, json, both };
OutputFormat parse_format(const std::string& s);
// writes <prefix>.csv and/or <prefix>.json
void emit_results(const ScenarioConfig& cfg, const std::vector<ResultRecord>& records, const std::string& prefix,
                  OutputFormat fmt);

std::string build_id();

// true iff no record failed
bool all_pass(const std::vector<ResultRecord>& records);

}  // namespace qmarkov
