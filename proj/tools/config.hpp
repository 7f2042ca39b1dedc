#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lipirm/benchgen.hpp"
#include "lipirm/functional_solver.hpp"
#include "lipirm/penalty.hpp"
#include "lipirm/trainer.hpp"

namespace lipirm::cli {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A benchmark choice and its parameters, as found under "benchmark".
struct BenchmarkSpec {
  std::string kind = "two_bit";  // two_bit | confounded | regression1d
  TwoBitConfig two_bit;
  std::string preset = "setting1";
  ConfounderConfig confounded;
  Regression1DConfig regression;
  std::size_t regression_test_n = 2000;
};

struct TrainRequest {
  BenchmarkSpec benchmark;
  TrainConfig train;
  std::vector<std::string> methods{"erm_l2", "irm_l2", "rpo"};
  std::vector<std::uint64_t> seeds{0};
};

struct TheoryRequest {
  Regression1DConfig setting;
  PenaltyScheme scheme;
  bool optimal = false;        // replace eta/rho/lambda by the analytic optima
  std::size_t n_grid = 513;
  std::vector<double> lambda_sweep;  // optional risk-vs-lambda curve
};

struct OracleRequest {
  Regression1DConfig setting;
  std::size_t n_grid = 513;
  std::size_t lambda_points = 41;
  double lambda_ratio = 1.25;
  std::size_t mc_replications = 0;  // 0 skips the simulation comparison
  SolverConfig solver;
  double eta = 0.0;
  std::uint64_t seed = 0;
};

BenchmarkSpec benchmark_from_json(const nlohmann::json &j, const std::string &path);
nlohmann::json to_json(const BenchmarkSpec &b);

Regression1DConfig regression_from_json(const nlohmann::json &j, const std::string &path);
nlohmann::json to_json(const Regression1DConfig &c);

TrainRequest train_request_from_json(const nlohmann::json &j);
nlohmann::json to_json(const TrainRequest &r);
TheoryRequest theory_request_from_json(const nlohmann::json &j);
nlohmann::json to_json(const TheoryRequest &r);
OracleRequest oracle_request_from_json(const nlohmann::json &j);
nlohmann::json to_json(const OracleRequest &r);

/// "0-9", "1,4,7" or a mix.
std::vector<std::uint64_t> parse_seed_list(const std::string &text);
std::vector<std::string> parse_name_list(const std::string &text);

DatasetBundle generate(const BenchmarkSpec &b, std::uint64_t seed);

} // namespace lipirm::cli
