#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lipirm/benchgen.hpp"
#include "lipirm/functional_solver.hpp"
#include "lipirm/penalty.hpp"
#include "lipirm/theory.hpp"

namespace lipirm {

double mse(std::span<const double> predictions, std::span<const double> labels);
/// Predictions are probabilities; class 1 when >= 0.5.
double accuracy(std::span<const double> predictions, std::span<const double> labels);
/// Mann-Whitney statistic with average ranks; tied pairs count 1/2.
double auc(std::span<const double> scores, std::span<const double> labels);

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double incomplete_beta(double a, double b, double x);

struct TTestResult {
  double t = 0.0;
  double dof = 0.0;
  double p = 1.0;
  std::string stars;
};

std::string significance_stars(double p);

/// Welch's unequal-variance t-test. Two-sided by default; the one-sided
/// p-value tests mean(a) > mean(b).
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b,
                         bool two_sided = true);

struct RiskEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t replications = 0;
  std::vector<double> values;
};

/// Per replication: fresh samples from the generator (seed derived from
/// `seed` and the replication index), minimize, integrate (f_hat - f*)^2.
RiskEstimate monte_carlo_risk(const Regression1DConfig &setting,
                              const PenaltyScheme &scheme, const SolverConfig &solver,
                              std::size_t replications, std::uint64_t seed, int jobs = 1);

/// Axes to sweep; an empty axis keeps the base value.
struct PenaltyGrid {
  std::vector<double> lambda;
  std::map<int, std::vector<double>> eta;
  std::map<int, std::vector<double>> rho;
};

/// count values geometrically spaced by `ratio`, centred on `center`.
std::vector<double> geometric_grid(double center, double ratio, std::size_t count);

struct GridSearchResult {
  PenaltyScheme best;
  double best_value = 0.0;
  std::vector<std::pair<PenaltyScheme, double>> table;
};

using PenaltyObjective = std::function<double(const PenaltyScheme &)>;

/// Exhaustive search over the Cartesian product of the axes. Axes are
/// visited in ascending order and only strict improvements replace the best
/// point, so ties resolve to the smaller parameter values.
GridSearchResult grid_search_penalties(const PenaltyScheme &base, const PenaltyGrid &grid,
                                       const PenaltyObjective &objective, int jobs = 1);

PenaltyObjective theorem1_objective(const TheorySetting &setting, const Grid1D &grid);
PenaltyObjective monte_carlo_objective(const Regression1DConfig &setting,
                                       const SolverConfig &solver,
                                       std::size_t replications, std::uint64_t seed);

void write_grid_csv(std::ostream &out, const GridSearchResult &result);

} // namespace lipirm
