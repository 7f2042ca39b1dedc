#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lipirm/domain_data.hpp"
#include "lipirm/mlp.hpp"
#include "lipirm/penalty.hpp"

namespace lipirm {

enum class Method { ErmL2, ErmLip, IrmL2, IrmLip, Rpo, RpoLip, RpoPen };

std::string to_string(Method m);
Method method_from_string(const std::string &name);
bool is_rpo(Method m);

enum class GroupingMode { Bins, Label, Provided };
enum class LambdaMode { Prop1, Fixed };
enum class OptimizerKind { GradientDescent, Adam };

GroupingMode grouping_from_string(const std::string &name);
std::string to_string(GroupingMode g);

struct TrainConfig {
  std::vector<std::size_t> hidden{16, 16, 16};
  int epochs = 200;
  double learning_rate = 0.01;
  OptimizerKind optimizer = OptimizerKind::GradientDescent;
  std::size_t batch_size = 0;  // per domain; 0 is full batch
  double fd_step = 1e-3;       // relative to the per-feature scale
  bool standardize = true;
  GroupingMode grouping = GroupingMode::Provided;
  int k_per_domain = 10;
  std::size_t feature_index = 0;
  PenaltyLimits limits;
  LambdaMode lambda_mode = LambdaMode::Prop1;
  double lambda = 0.1;       // used when lambda_mode is Fixed
  double eta_uniform = 1.0;
  double l2_weight = 1e-3;   // coefficient of the squared-parameter penalty
  bool force_uniform_phase2 = false;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig &c);
/// Unknown keys are rejected.
TrainConfig train_config_from_json(const nlohmann::json &j);

/// Everything the loss needs besides the model and the data.
struct LossSpec {
  double lambda = 0.0;
  std::map<int, double> eta;   // by domain_id; absent means 0
  bool lipschitz = true;       // false: l2 penalty on parameters instead
  double l2_weight = 0.0;
  std::vector<std::vector<double>> sample_rho;  // [domain position][sample]; empty means 1
  std::vector<double> fd_steps;                 // per feature
};

struct LossTerms {
  double erm = 0.0;
  double irm = 0.0;
  double lipschitz = 0.0;
  double l2 = 0.0;
  double total = 0.0;
};

/// Empirical LipIRM loss and its parameter gradient. `batch[p]` lists the
/// sample indices of domain p to use; an empty batch span means all samples.
/// grad is resized and overwritten.
LossTerms lipirm_loss_and_grad(const MlpModel &model, const DatasetCollection &data,
                               const LossSpec &spec, std::vector<double> &grad,
                               std::span<const std::vector<std::size_t>> batch = {});

/// Affine feature map fitted on the training domains.
struct Standardizer {
  bool enabled = true;
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const DatasetCollection &data, bool enabled);
  DatasetCollection apply(const DatasetCollection &data) const;
};

/// Fits a model under a fixed loss; returns the loss trace (one value per
/// epoch, evaluated on the full training set before each epoch's updates).
std::vector<double> fit_model(MlpModel &model, const DatasetCollection &data,
                              const LossSpec &spec, const TrainConfig &config,
                              std::uint64_t batch_seed);

/// Phase 1 of the two-phase procedure: uniform penalties, auxiliary model,
/// group statistics and the optimized penalties derived from them.
struct PhaseOne {
  Grouping grouping;
  GroupStatistics stats;
  PenaltyScheme uniform;
  PenaltyScheme optimized;
  std::vector<double> loss_trace;
  std::uint64_t seed = 0;
};

PhaseOne run_phase_one(const DatasetBundle &bundle, const TrainConfig &config);

struct ExperimentRun {
  std::string method;
  std::string setting;
  std::uint64_t seed = 0;
  std::uint64_t init_seed = 0;
  std::optional<std::uint64_t> phase_one_seed;
  std::map<std::string, double> metrics;
  PenaltyScheme scheme;
  std::vector<double> loss_trace;
  double wall_seconds = 0.0;
  std::optional<GroupStatistics> group_statistics;
  MlpModel model;
};

/// Trains one method. Rpo variants reuse `phase_one` when given.
ExperimentRun train(Method method, const DatasetBundle &bundle, const TrainConfig &config,
                    const PhaseOne *phase_one = nullptr);

/// mse for regression; acc and auc for classification; on the test domains
/// pooled and on the training domains (prefixed train_).
std::map<std::string, double> evaluate(const MlpModel &model, const Standardizer &st,
                                       const DatasetBundle &bundle);

nlohmann::json to_json(const GroupStatistics &stats);
nlohmann::json to_json(const ExperimentRun &run, bool include_model = false);
ExperimentRun run_from_json(const nlohmann::json &j);

/// Rows method,seed,setting,metric,value.
void write_leaderboard_header(std::ostream &out);
void append_leaderboard(std::ostream &out, const ExperimentRun &run);

} // namespace lipirm
