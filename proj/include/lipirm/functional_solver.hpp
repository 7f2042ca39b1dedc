#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "lipirm/domain_data.hpp"
#include "lipirm/grid.hpp"
#include "lipirm/penalty.hpp"

namespace lipirm {

/// rho as a function of the (scalar) feature.
using RhoField = std::function<double(double)>;

/// rho(x) = scheme.rho[bin of x] for K = scheme.rho.size() equal-width bins,
/// or 1 when the scheme carries no rho.
RhoField rho_field_from_bins(const PenaltyScheme &scheme);

enum class SolverInit { Zeros, DataMean };

/// How the Lipschitz term is discretized.
///   SampleWeighted: lambda sum_e w_e sum_i rho(x_i) f'(x_i)^2, f' the slope
///                   of the cell holding x_i.
///   Integral:       lambda int rho f'^2 dx over the whole grid.
enum class LipschitzMode { SampleWeighted, Integral };

/// Per-domain means (w_e = 1/N_e) or raw sums (w_e = 1).
enum class RiskNormalization { DomainMean, RawSum };

/// Original bracket 2 f (f - y), or the transformed 2 y (f - y).
enum class IrmBracket { Original, Transformed };

struct SolverConfig {
  std::size_t n_grid = 513;
  int max_outer_iters = 200;
  int max_inner_iters = 60;  // line-search halvings per iteration
  double step_size = 1.0;
  double tolerance = 1e-12;
  SolverInit init = SolverInit::DataMean;
  LipschitzMode lipschitz = LipschitzMode::SampleWeighted;
  RiskNormalization normalization = RiskNormalization::DomainMean;
  IrmBracket bracket = IrmBracket::Original;
  double ridge = 1e-12;
  RhoField rho;  // empty: rho_field_from_bins(scheme)

  void validate() const;
};

struct SolverResult {
  GridFunction f;
  std::vector<double> loss_trace;
  int iterations = 0;
};

/// Thrown when minimize runs out of iterations; carries the last iterate.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string &what, SolverResult last)
      : std::runtime_error(what), last_(std::move(last)) {}
  const SolverResult &last() const { return last_; }

private:
  SolverResult last_;
};

double empirical_loss(const GridFunction &f, const DatasetCollection &data,
                      const PenaltyScheme &scheme, const SolverConfig &config = {});

/// Damped Newton iteration on the node values: the quadratic part and the
/// curvature of each IRM bracket form a tridiagonal matrix, the rank-one
/// outer products of the bracket gradients are added by Woodbury, and a
/// backtracking line search keeps the loss trace monotone.
SolverResult minimize(const DatasetCollection &data, const PenaltyScheme &scheme,
                      const SolverConfig &config = {});

} // namespace lipirm
