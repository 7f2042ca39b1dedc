#include "lipirm/penalty.hpp"

#include <cmath>
#include <string>

namespace lipirm {

double PenaltyScheme::eta_of(int domain_id) const {
  auto it = eta.find(domain_id);
  if (it == eta.end())
    throw std::out_of_range("scheme has no eta for domain " +
                            std::to_string(domain_id));
  return it->second;
}

double PenaltyScheme::rho_of(int group) const {
  auto it = rho.find(group);
  if (it == rho.end())
    throw std::out_of_range("scheme has no rho for group " + std::to_string(group));
  return it->second;
}

void PenaltyScheme::validate(double rho_floor) const {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("lambda must be positive and finite");
  for (const auto &[d, v] : eta)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("eta must be finite and non-negative (domain " +
                                  std::to_string(d) + ")");
  for (const auto &[k, v] : rho)
    if (!(v > 0.0) || v < rho_floor || !std::isfinite(v))
      throw std::invalid_argument("rho must be finite and above the floor (group " +
                                  std::to_string(k) + ")");
}

PenaltyScheme PenaltyScheme::uniform(double lambda, std::span<const int> domain_ids,
                                     int k_count, double eta, double rho) {
  PenaltyScheme s;
  s.lambda = lambda;
  for (int d : domain_ids)
    s.eta[d] = eta;
  for (int k = 0; k < k_count; ++k)
    s.rho[k] = rho;
  return s;
}

double optimal_lambda(std::span<const std::size_t> domain_sizes) {
  if (domain_sizes.empty())
    throw std::invalid_argument("optimal_lambda: no domains");
  double s = 0.0;
  for (std::size_t n : domain_sizes) {
    if (n == 0)
      throw std::invalid_argument("optimal_lambda: empty domain");
    s += 1.0 / static_cast<double>(n);
  }
  return std::pow(s, 0.4);
}

namespace {

const double kFour25 = std::pow(4.0, 0.4); // 4^(2/5)
const double kFour75 = std::pow(4.0, 1.4); // 4^(7/5)

// (sigma / r)^(4/5) with the degenerate-density check.
double quality_term(const GroupStatistics &stats, std::size_t e, int k) {
  const double r = stats.r_hat_at(e, k);
  if (!(r > 0.0))
    throw std::invalid_argument("degenerate density");
  const double sigma = std::sqrt(std::max(stats.sigma2_at(e, k), 0.0));
  return std::pow(sigma / r, 0.8);
}

double signed_pow(double x, double p) {
  return std::copysign(std::pow(std::abs(x), p), x);
}

void check_extra(const GroupStatistics &stats, const ExactPenaltyInputs &extra) {
  const auto k = static_cast<std::size_t>(stats.k_count);
  if (extra.f_value.size() != k || extra.f_second.size() != k)
    throw std::invalid_argument("exact penalty inputs need one value per group");
  for (std::size_t i = 0; i < k; ++i)
    if (!std::isfinite(extra.f_value[i]) || !std::isfinite(extra.f_second[i]))
      throw std::invalid_argument("exact penalty inputs must be finite");
}

double finish_eta(double n_e, double bracket, const PenaltyLimits &limits) {
  if (bracket < limits.bracket_epsilon)
    return limits.eta_cap;
  return std::min(n_e / (kFour75 * bracket), limits.eta_cap);
}

} // namespace

std::map<int, double> optimal_rho(const GroupStatistics &stats,
                                  const PenaltyLimits &limits) {
  std::map<int, double> out;
  for (int k = 0; k < stats.k_count; ++k) {
    double s = 0.0;
    for (std::size_t e = 0; e < stats.domain_count(); ++e)
      if (stats.present(e, k))
        s += quality_term(stats, e, k);
    out[k] = std::max(s / kFour25, limits.rho_floor);
  }
  return out;
}

std::map<int, double> optimal_eta(const GroupStatistics &stats,
                                  const PenaltyLimits &limits) {
  std::map<int, double> out;
  for (std::size_t e = 0; e < stats.domain_count(); ++e) {
    double bracket = 0.0;
    bool any = false;
    for (int k = 0; k < stats.k_count; ++k)
      if (stats.present(e, k)) {
        any = true;
        bracket += quality_term(stats, e, k);
      }
    if (!any)
      throw std::invalid_argument("domain has no groups");
    out[stats.domain_ids[e]] =
        finish_eta(static_cast<double>(stats.domain_sizes[e]), bracket, limits);
  }
  return out;
}

std::map<int, double> exact_optimal_eta(const GroupStatistics &stats,
                                        const ExactPenaltyInputs &extra,
                                        const PenaltyLimits &limits) {
  check_extra(stats, extra);
  std::map<int, double> out;
  for (std::size_t e = 0; e < stats.domain_count(); ++e) {
    double bracket = 0.0;
    bool any = false;
    for (int k = 0; k < stats.k_count; ++k) {
      if (!stats.present(e, k))
        continue;
      any = true;
      const auto ku = static_cast<std::size_t>(k);
      bracket += quality_term(stats, e, k) *
                 signed_pow(extra.f_second[ku], 0.6) * extra.f_value[ku];
    }
    if (!any)
      throw std::invalid_argument("domain has no groups");
    if (!(bracket > 0.0))
      throw std::invalid_argument("exact form requires positive bracket");
    out[stats.domain_ids[e]] =
        std::min(static_cast<double>(stats.domain_sizes[e]) / (kFour75 * bracket),
                 limits.eta_cap);
  }
  return out;
}

std::map<int, double> exact_optimal_rho(const GroupStatistics &stats,
                                        const ExactPenaltyInputs &extra,
                                        const PenaltyLimits &limits) {
  check_extra(stats, extra);
  std::map<int, double> out;
  for (int k = 0; k < stats.k_count; ++k) {
    const double curvature =
        std::pow(std::abs(extra.f_second[static_cast<std::size_t>(k)]), 0.4);
    if (!(curvature > 0.0))
      throw std::invalid_argument("exact rho requires a non-zero second derivative");
    double s = 0.0;
    for (std::size_t e = 0; e < stats.domain_count(); ++e)
      if (stats.present(e, k))
        s += quality_term(stats, e, k);
    out[k] = std::max(s / (kFour25 * curvature), limits.rho_floor);
  }
  return out;
}

nlohmann::json to_json(const PenaltyScheme &scheme) {
  nlohmann::json j;
  j["lambda"] = scheme.lambda;
  j["eta"] = nlohmann::json::object();
  for (const auto &[d, v] : scheme.eta)
    j["eta"][std::to_string(d)] = v;
  j["rho"] = nlohmann::json::object();
  for (const auto &[k, v] : scheme.rho)
    j["rho"][std::to_string(k)] = v;
  return j;
}

PenaltyScheme scheme_from_json(const nlohmann::json &j) {
  PenaltyScheme s;
  s.lambda = j.at("lambda").get<double>();
  for (const auto &[key, v] : j.at("eta").items())
    s.eta[std::stoi(key)] = v.get<double>();
  for (const auto &[key, v] : j.at("rho").items())
    s.rho[std::stoi(key)] = v.get<double>();
  return s;
}

} // namespace lipirm
