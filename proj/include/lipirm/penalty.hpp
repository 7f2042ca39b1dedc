#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "lipirm/domain_data.hpp"

namespace lipirm {

/// Clamps applied to degenerate optimal penalties. A group with zero noise
/// would otherwise get rho = 0; a noiseless domain would get eta = infinity.
struct PenaltyLimits {
  double rho_floor = 1e-6;
  double eta_cap = 1e6;
  /// Brackets below this are treated as zero.
  double bracket_epsilon = 1e-300;
};

/// Full regularization configuration: global Lipschitz scale, per-domain IRM
/// weights and per-group Lipschitz weights.
struct PenaltyScheme {
  double lambda = 1.0;
  std::map<int, double> eta;
  std::map<int, double> rho;

  double eta_of(int domain_id) const;
  double rho_of(int group) const;
  /// lambda > 0, finite values, every rho >= rho_floor, every eta >= 0.
  void validate(double rho_floor = 0.0) const;

  /// Uniform scheme: eta = 1 on every domain, rho = 1 on every group.
  static PenaltyScheme uniform(double lambda, std::span<const int> domain_ids,
                               int k_count, double eta = 1.0, double rho = 1.0);
};

/// Per-group truth values and second derivatives for the exact
/// (f-dependent) optimal penalties, indexed by group.
struct ExactPenaltyInputs {
  std::vector<double> f_value;
  std::vector<double> f_second;
};

/// (sum_e 1/N_e)^(2/5).
double optimal_lambda(std::span<const std::size_t> domain_sizes);

/// rho_k = 4^(-2/5) sum_e (sigma_{e,k}/r_{e,k})^(4/5) 1_{e,k}, floored.
std::map<int, double> optimal_rho(const GroupStatistics &stats,
                                  const PenaltyLimits &limits = {});

/// eta_e = N_e / 4^(7/5) [sum_k (sigma_{e,k}/r_{e,k})^(4/5) 1_{e,k}]^-1,
/// capped at eta_cap. N_e is read from stats.domain_sizes.
std::map<int, double> optimal_eta(const GroupStatistics &stats,
                                  const PenaltyLimits &limits = {});

/// eta_e = N_e / 4^(7/5) [sum_k sigma^(4/5) f''_k^(3/5) f_k / r^(4/5)]^-1.
/// A non-positive bracket is an error.
std::map<int, double> exact_optimal_eta(const GroupStatistics &stats,
                                        const ExactPenaltyInputs &extra,
                                        const PenaltyLimits &limits = {});

/// rho_k = sum_e sigma^(4/5) / (4^(2/5) |f''_k|^(2/5) r^(4/5)) 1_{e,k}.
std::map<int, double> exact_optimal_rho(const GroupStatistics &stats,
                                        const ExactPenaltyInputs &extra,
                                        const PenaltyLimits &limits = {});

nlohmann::json to_json(const PenaltyScheme &scheme);
PenaltyScheme scheme_from_json(const nlohmann::json &j);

} // namespace lipirm
