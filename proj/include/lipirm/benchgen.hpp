#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lipirm/domain_data.hpp"
#include "lipirm/theory.hpp"

namespace lipirm {

// 1-D heteroskedastic regression --------------------------------------------

/// uniform, or skew(k): r(x) = (k+1)(1-x)^k.
struct DensityFamily {
  enum class Kind { Uniform, Skew } kind = Kind::Uniform;
  double k = 0.0;

  double pdf(double x) const;
  double inverse_cdf(double u) const;
};

/// sigma(x): constant a, linear a + (b-a)x, or piecewise levels on equal bins.
struct NoiseProfile {
  enum class Kind { Constant, Linear, Piecewise } kind = Kind::Constant;
  double a = 0.0;
  double b = 0.0;
  std::vector<double> levels;

  double operator()(double x) const;
};

/// f*(x) = amplitude * shape(2 pi frequency x) + offset, or a polynomial.
struct TruthSpec {
  enum class Kind { Sine, Cosine, Quadratic, Linear, Constant } kind = Kind::Sine;
  double amplitude = 1.0;
  double frequency = 1.0;
  double offset = 2.0;

  double value(double x) const;
  double first(double x) const;
  double second(double x) const;
};

struct Regression1DDomain {
  DensityFamily density;
  NoiseProfile noise;
  std::size_t n = 1000;
};

struct Regression1DConfig {
  std::vector<Regression1DDomain> domains;
  TruthSpec truth;
  int k_count = 1;
  std::uint64_t seed = 0;
};

struct Regression1DResult {
  DatasetCollection data;
  TheorySetting setting;
};

/// Samples x by inverse CDF and y = f*(x) + sigma_e(x) * N(0,1). The returned
/// setting carries the same densities, noise and truth.
Regression1DResult gen_regression_1d(const Regression1DConfig &config);
TheorySetting theory_setting(const Regression1DConfig &config);

// Confounded regression -----------------------------------------------------

struct ConfounderConfig {
  std::size_t base_dim = 5;
  std::size_t confounder_dim = 5;
  std::vector<double> train_alpha{10.0, 15.0, 20.0};
  double validation_alpha = 50.0;
  std::vector<double> test_alpha{100.0, 150.0, 200.0, 300.0};
  std::size_t n_per_domain = 1000;
  double label_noise = 0.5;
  std::uint64_t seed = 0;
};

/// x ~ N(0, I), y = beta^T x + noise, Z = W y + alpha_e V; features [x | Z].
/// beta and W are drawn once per seed and shared by all domains.
DatasetBundle gen_confounded_regression(const ConfounderConfig &config);

// Two-bit classification ------------------------------------------------------

enum class TwoBitPreset { None, Setting1, Setting7, Setting13 };

struct TwoBitConfig {
  double causal_flip = 0.25;
  std::vector<double> train_p{0.1, 0.2, 0.3};
  std::vector<double> test_p{0.7, 0.8, 0.9, 1.0};
  std::size_t n_train = 1000;
  std::size_t n_test = 1000;
  /// (group, training-domain index) pairs to corrupt.
  std::set<std::pair<int, int>> targets;
  double keep_probability = 0.1;  // beta
  double flip_probability = 0.3;  // gamma
  std::uint64_t seed = 0;

  /// Replaces targets by the preset's target set.
  void apply_preset(TwoBitPreset preset);
};

TwoBitPreset preset_from_string(const std::string &name);
std::string to_string(TwoBitPreset preset);

/// digit g uniform on 0..9, clean label 1{g >= 5} flipped with causal_flip,
/// color = label flipped with p_e. Features [g/9, color], group = g.
/// Targeted samples are retained with keep_probability and then have their
/// label flipped with flip_probability, using a separate random stream.
DatasetBundle gen_two_bit(const TwoBitConfig &config);

nlohmann::json to_json(const TwoBitConfig &config);
nlohmann::json to_json(const ConfounderConfig &config);

} // namespace lipirm
