#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include <json.hpp>

#include "lipirm/domain_data.hpp"
#include "lipirm/grid.hpp"
#include "lipirm/penalty.hpp"

namespace lipirm {

using Fn1D = std::function<double(double)>;

/// One domain of an analytic 1-D setting.
struct TheoryDomain {
  int domain_id = 0;
  std::size_t n_samples = 1;
  Fn1D density;             // r_e, integrates to 1 on [0,1]
  Fn1D sigma;               // noise standard deviation sigma_e(x)
  Fn1D empirical_density;   // r_hat_e; empty means "same as density"

  double r_hat(double x) const {
    return empirical_density ? empirical_density(x) : density(x);
  }
};

/// Analytic ground truth shared by the theory and the simulations.
///
/// Groups are the k_count equal-width bins of [0,1]; group k of every domain
/// covers the same interval, so scheme.rho maps to a piecewise-constant
/// rho(x). A supplied rho_override replaces that map.
struct TheorySetting {
  std::vector<TheoryDomain> domains;
  Fn1D f_star;
  Fn1D f_prime;   // optional, finite differences otherwise
  Fn1D f_second;  // optional, finite differences otherwise
  int k_count = 1;
  Fn1D rho_override;

  void validate() const;
  int bin_of(double x) const;
  std::vector<std::size_t> domain_sizes() const;
  std::vector<int> domain_ids() const;

  double first_derivative(double x) const;
  double second_derivative(double x) const;

  std::vector<double> rho_nodes(const PenaltyScheme &scheme, const Grid1D &grid) const;
  /// (rho f*')' on the nodes. The piecewise-constant map contributes rho f*''
  /// only; interface jumps are not represented.
  std::vector<double> flux_derivative(const PenaltyScheme &scheme,
                                      const Grid1D &grid) const;
  /// r = sum_e r_e on the nodes.
  std::vector<double> total_density(const Grid1D &grid) const;
  std::vector<double> r_hat_nodes(std::size_t e, const Grid1D &grid) const;

  /// Bin means of r_hat_e and sigma_e^2, one row per domain.
  GroupStatistics group_statistics(const Grid1D &grid) const;
  /// Bin means of f* and f*''.
  ExactPenaltyInputs exact_inputs(const Grid1D &grid) const;
};

/// A_e = [4 eta_e^2 int r_hat_e^3 / r^2 f*^2 dt]^-1.
double compute_ae(double eta_e, std::span<const double> r_hat_e,
                  std::span<const double> r, std::span<const double> f_star,
                  const Grid1D &grid);

struct TheoryReport {
  std::map<int, double> a_e;
  std::vector<double> bias2;
  std::vector<double> variance;
  double risk = 0.0;
  double bias_integral = 0.0;
  double variance_integral = 0.0;
  Grid1D grid;
};

TheoryReport theorem1_risk(const TheorySetting &setting, const PenaltyScheme &scheme,
                           const Grid1D &grid);

/// Minimizer over lambda of lambda^2 B + lambda^(-1/2) V, with B and V the
/// bias and variance integrals at lambda = 1 for the given eta and rho.
double companion_optimal_lambda(const TheorySetting &setting,
                                const PenaltyScheme &scheme, const Grid1D &grid);

/// eta_e = (N_e/4) |int (rho f*')' f* / r_hat_e dx|^-1, capped.
std::map<int, double> continuous_optimal_eta(const TheorySetting &setting,
                                             const PenaltyScheme &scheme,
                                             const Grid1D &grid,
                                             const PenaltyLimits &limits = {});

// Homogeneous solutions and the Green's function of
//   (rho G')' - (r/lambda) G = delta(x - t),  G'(0) = G'(1) = 0.

struct WkbPair {
  std::vector<double> log_f1;  // -phi(x)
  std::vector<double> log_f2;  // +phi(x)
  std::vector<double> f1;
  std::vector<double> f2;
};

/// phi(x) = lambda^(-1/2) int_0^x sqrt(r/rho). Values are exponentiated only
/// when |phi| stays below log_bound.
WkbPair wkb_homogeneous(double lambda, std::span<const double> r,
                        std::span<const double> rho, const Grid1D &grid,
                        double log_bound = 700.0);

enum class GreensMethod { Wkb, Discrete };

struct GreensFunction {
  GreensMethod method = GreensMethod::Discrete;
  double lambda = 0.0;
  std::vector<double> r;
  std::vector<double> rho;
  Grid1D grid;
  std::vector<double> table;  // row-major, table[i*n + j] = G(x_i, t_j)

  double at(std::size_t i, std::size_t j) const { return table[i * grid.n + j]; }
};

/// The discrete method applies the flux-form stencil with ghost-node Neumann
/// rows; the impulse at node j is 1/(m_j h) with m_j the trapezoid weight.
GreensFunction greens_function(double lambda, std::span<const double> r,
                               std::span<const double> rho, const Grid1D &grid,
                               GreensMethod method);

/// Rows of the discrete operator (rho u')' - (r/lambda) u applied to u.
std::vector<double> apply_bvp_operator(double lambda, std::span<const double> r,
                                       std::span<const double> rho,
                                       const Grid1D &grid, std::span<const double> u);

/// Relative sup-norm of operator * column - impulse, worst column.
double greens_operator_defect(const GreensFunction &g);

/// Per-domain node tables derived from samples, or supplied directly.
struct EmpiricalNodes {
  std::vector<std::vector<double>> density;  // r_hat_e
  std::vector<std::vector<double>> noise;    // epsilon_e = y_bar - f*
};

/// Linear-interpolation node measures: mass m_j = sum_i phi_j(x_i)/N_e,
/// density m_j/(h w_j), noise = phi-weighted mean of y minus f*(x_j).
EmpiricalNodes empirical_nodes(const DatasetCollection &data,
                               const TheorySetting &setting, const Grid1D &grid);

/// f* + (lambda/r)(rho f*')' - (1/lambda) sum_e int r_hat_e G [eps_e - eta_e A_e y_e] dt.
GridFunction asymptotic_solution(const TheorySetting &setting,
                                 const PenaltyScheme &scheme,
                                 const EmpiricalNodes &nodes,
                                 const GreensFunction &g);

/// Same, with r_hat_e taken from the setting and eps_e supplied.
GridFunction asymptotic_solution(const TheorySetting &setting,
                                 const PenaltyScheme &scheme,
                                 const std::vector<std::vector<double>> &noise,
                                 const GreensFunction &g);

/// Solves -lambda (rho f')' + r f = H with f'(0) = f'(1) = 0.
GridFunction solve_bvp(double lambda, std::span<const double> r,
                       std::span<const double> rho, std::span<const double> h_rhs,
                       const Grid1D &grid);

/// Trapezoid L2 norm of -lambda (rho f')' + r f - H. The two end rows are the
/// ghost-node rows that encode the zero-derivative conditions.
double bvp_residual(const GridFunction &f, const TheorySetting &setting,
                    const PenaltyScheme &scheme, std::span<const double> h_rhs);

/// sup_k | sum_e mean_e 1{x_i <= x_k}[f(x_i) - y_i(1 - eta_e A_e)] - lambda rho(x_k) f'(x_k) |
/// with A_e = 4 mean_e f (y - f) and f' by central differences.
double lemma1_residual(const GridFunction &f, const DatasetCollection &data,
                       const PenaltyScheme &scheme, std::span<const double> rho);

nlohmann::json to_json(const TheoryReport &report);
void write_report_csv(std::ostream &out, const TheoryReport &report);

} // namespace lipirm
