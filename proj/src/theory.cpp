#include "lipirm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lipirm/numerics.hpp"

namespace lipirm {

namespace {

constexpr double kFdStep = 1e-3;
constexpr int kBinSamples = 256;

double five_point_first(const Fn1D &f, double x) {
  const double h = kFdStep;
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}

double five_point_second(const Fn1D &f, double x) {
  const double h = kFdStep;
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
         (12 * h * h);
}

std::vector<double> tabulate(const Fn1D &f, const Grid1D &grid) {
  std::vector<double> v(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i)
    v[i] = f(grid.points[i]);
  return v;
}

// Midpoint-rule mean of f over bin k of K.
double bin_mean(const Fn1D &f, int k, int K) {
  const double a = static_cast<double>(k) / K;
  const double w = 1.0 / K;
  std::vector<double> vals(kBinSamples);
  for (int s = 0; s < kBinSamples; ++s)
    vals[static_cast<std::size_t>(s)] = f(a + w * (s + 0.5) / kBinSamples);
  return pairwise_sum(vals) / kBinSamples;
}

// Rows of (rho u')' - (r/lambda) u as a tridiagonal matrix.
struct Stencil {
  std::vector<double> lower, diag, upper;
};

Stencil build_stencil(double lambda, std::span<const double> r,
                      std::span<const double> rho, const Grid1D &grid) {
  const std::size_t n = grid.n;
  if (r.size() != n || rho.size() != n)
    throw std::invalid_argument("operator coefficients do not match the grid");
  if (!(lambda > 0.0))
    throw std::invalid_argument("lambda must be positive");
  const double h2 = grid.h * grid.h;
  Stencil s{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
            std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double face = 0.5 * (rho[i] + rho[i + 1]) / h2;
    // The ghost-node rows see the face flux twice.
    const double left_scale = (i == 0) ? 2.0 : 1.0;
    const double right_scale = (i + 2 == n) ? 2.0 : 1.0;
    s.upper[i] += left_scale * face;
    s.diag[i] -= left_scale * face;
    s.lower[i + 1] += right_scale * face;
    s.diag[i + 1] -= right_scale * face;
  }
  for (std::size_t i = 0; i < n; ++i)
    s.diag[i] -= r[i] / lambda;
  return s;
}

double eta_times_ae(double eta, std::span<const double> r_hat_e,
                    std::span<const double> r, std::span<const double> f_star,
                    const Grid1D &grid, double *ae_out) {
  // eta = 0 means the IRM term is absent.
  if (eta == 0.0)
    return 0.0;
  const double ae = compute_ae(eta, r_hat_e, r, f_star, grid);
  if (ae_out)
    *ae_out = ae;
  return eta * ae;
}

} // namespace

// TheorySetting ---------------------------------------------------------------

void TheorySetting::validate() const {
  if (domains.empty())
    throw std::invalid_argument("theory setting has no domains");
  if (!f_star)
    throw std::invalid_argument("theory setting has no truth function");
  if (k_count < 1)
    throw std::invalid_argument("theory setting needs k_count >= 1");
  for (const auto &d : domains) {
    if (!d.density || !d.sigma)
      throw std::invalid_argument("domain " + std::to_string(d.domain_id) +
                                  " lacks a density or noise profile");
    if (d.n_samples == 0)
      throw std::invalid_argument("domain " + std::to_string(d.domain_id) +
                                  " has no samples");
  }
}

int TheorySetting::bin_of(double x) const {
  const int k = static_cast<int>(std::floor(x * k_count));
  return std::clamp(k, 0, k_count - 1);
}

std::vector<std::size_t> TheorySetting::domain_sizes() const {
  std::vector<std::size_t> out;
  for (const auto &d : domains)
    out.push_back(d.n_samples);
  return out;
}

std::vector<int> TheorySetting::domain_ids() const {
  std::vector<int> out;
  for (const auto &d : domains)
    out.push_back(d.domain_id);
  return out;
}

double TheorySetting::first_derivative(double x) const {
  return f_prime ? f_prime(x) : five_point_first(f_star, x);
}

double TheorySetting::second_derivative(double x) const {
  return f_second ? f_second(x) : five_point_second(f_star, x);
}

std::vector<double> TheorySetting::rho_nodes(const PenaltyScheme &scheme,
                                             const Grid1D &grid) const {
  if (rho_override)
    return tabulate(rho_override, grid);
  std::vector<double> v(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i)
    v[i] = scheme.rho_of(bin_of(grid.points[i]));
  return v;
}

std::vector<double> TheorySetting::flux_derivative(const PenaltyScheme &scheme,
                                                   const Grid1D &grid) const {
  const auto rho = rho_nodes(scheme, grid);
  std::vector<double> v(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double x = grid.points[i];
    v[i] = rho[i] * second_derivative(x);
    if (rho_override)
      v[i] += five_point_first(rho_override, x) * first_derivative(x);
  }
  return v;
}

std::vector<double> TheorySetting::total_density(const Grid1D &grid) const {
  std::vector<double> r(grid.n, 0.0);
  for (const auto &d : domains)
    for (std::size_t i = 0; i < grid.n; ++i)
      r[i] += d.density(grid.points[i]);
  return r;
}

std::vector<double> TheorySetting::r_hat_nodes(std::size_t e, const Grid1D &grid) const {
  const auto &d = domains.at(e);
  std::vector<double> v(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i)
    v[i] = d.r_hat(grid.points[i]);
  return v;
}

GroupStatistics TheorySetting::group_statistics(const Grid1D &) const {
  validate();
  const std::size_t E = domains.size();
  const auto K = static_cast<std::size_t>(k_count);
  std::vector<double> r_hat(E * K), sigma2(E * K);
  for (std::size_t e = 0; e < E; ++e) {
    const auto &d = domains[e];
    const Fn1D rh = [&d](double x) { return d.r_hat(x); };
    const Fn1D s2 = [&d](double x) { return d.sigma(x) * d.sigma(x); };
    for (int k = 0; k < k_count; ++k) {
      r_hat[e * K + static_cast<std::size_t>(k)] = bin_mean(rh, k, k_count);
      sigma2[e * K + static_cast<std::size_t>(k)] = bin_mean(s2, k, k_count);
    }
  }
  return GroupStatistics::from_tables(domain_ids(), domain_sizes(), k_count,
                                      std::move(r_hat), std::move(sigma2));
}

ExactPenaltyInputs TheorySetting::exact_inputs(const Grid1D &) const {
  validate();
  ExactPenaltyInputs in;
  const Fn1D f2 = [this](double x) { return second_derivative(x); };
  for (int k = 0; k < k_count; ++k) {
    in.f_value.push_back(bin_mean(f_star, k, k_count));
    in.f_second.push_back(bin_mean(f2, k, k_count));
  }
  return in;
}

// closed-form risk --------------------------------------------------------------

double compute_ae(double eta_e, std::span<const double> r_hat_e,
                  std::span<const double> r, std::span<const double> f_star,
                  const Grid1D &grid) {
  if (!(eta_e > 0.0))
    throw std::invalid_argument("A_e requires a positive eta");
  std::vector<double> integrand(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    if (!(r[i] > 0.0))
      throw std::invalid_argument("total density must be positive");
    integrand[i] = r_hat_e[i] * r_hat_e[i] * r_hat_e[i] / (r[i] * r[i]) *
                   f_star[i] * f_star[i];
  }
  const double integral = trapezoid(integrand, grid.h);
  if (!(integral > 0.0) || !std::isfinite(integral))
    throw std::invalid_argument("degenerate A_e");
  return 1.0 / (4.0 * eta_e * eta_e * integral);
}

TheoryReport theorem1_risk(const TheorySetting &setting, const PenaltyScheme &scheme,
                           const Grid1D &grid) {
  setting.validate();
  scheme.validate();
  const std::size_t n = grid.n;
  const auto r = setting.total_density(grid);
  const auto rho = setting.rho_nodes(scheme, grid);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(r[i] > 0.0))
      throw std::invalid_argument("total density vanishes at x = " +
                                  std::to_string(grid.points[i]));
    if (!(rho[i] > 0.0))
      throw std::invalid_argument("rho vanishes at x = " + std::to_string(grid.points[i]));
  }
  const auto flux = setting.flux_derivative(scheme, grid);
  const auto fs = tabulate(setting.f_star, grid);

  TheoryReport rep;
  rep.grid = grid;
  std::vector<double> bias(n);
  for (std::size_t i = 0; i < n; ++i)
    bias[i] = flux[i] / r[i];
  rep.variance.assign(n, 0.0);
  const double inv_sqrt_lambda = 1.0 / std::sqrt(scheme.lambda);

  for (std::size_t e = 0; e < setting.domains.size(); ++e) {
    const auto &dom = setting.domains[e];
    const auto rh = setting.r_hat_nodes(e, grid);
    double ae = 0.0;
    const double coef =
        eta_times_ae(scheme.eta_of(dom.domain_id), rh, r, fs, grid, &ae);
    if (coef > 0.0)
      rep.a_e[dom.domain_id] = ae;
    const double n_e = static_cast<double>(dom.n_samples);
    for (std::size_t i = 0; i < n; ++i) {
      bias[i] -= rh[i] * fs[i] * coef / r[i];
      const double s = dom.sigma(grid.points[i]);
      rep.variance[i] += inv_sqrt_lambda * rh[i] * s * s /
                         (n_e * r[i] * std::sqrt(r[i] * rho[i]));
    }
  }

  rep.bias2.resize(n);
  std::vector<double> total(n);
  for (std::size_t i = 0; i < n; ++i) {
    rep.bias2[i] = scheme.lambda * scheme.lambda * bias[i] * bias[i];
    total[i] = rep.bias2[i] + rep.variance[i];
  }
  rep.bias_integral = trapezoid(rep.bias2, grid.h);
  rep.variance_integral = trapezoid(rep.variance, grid.h);
  rep.risk = trapezoid(total, grid.h);
  return rep;
}

double companion_optimal_lambda(const TheorySetting &setting,
                                const PenaltyScheme &scheme, const Grid1D &grid) {
  PenaltyScheme unit = scheme;
  unit.lambda = 1.0;
  const auto rep = theorem1_risk(setting, unit, grid);
  if (!(rep.bias_integral > 0.0))
    throw std::invalid_argument("bias vanishes; the optimal lambda is unbounded");
  return std::pow(rep.variance_integral / (4.0 * rep.bias_integral), 0.4);
}

std::map<int, double> continuous_optimal_eta(const TheorySetting &setting,
                                             const PenaltyScheme &scheme,
                                             const Grid1D &grid,
                                             const PenaltyLimits &limits) {
  setting.validate();
  const auto flux = setting.flux_derivative(scheme, grid);
  const auto fs = tabulate(setting.f_star, grid);
  std::map<int, double> out;
  for (std::size_t e = 0; e < setting.domains.size(); ++e) {
    const auto rh = setting.r_hat_nodes(e, grid);
    std::vector<double> integrand(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
      if (!(rh[i] > 0.0))
        throw std::invalid_argument("degenerate density");
      integrand[i] = flux[i] * fs[i] / rh[i];
    }
    const double bracket = std::abs(trapezoid(integrand, grid.h));
    const double n_e = static_cast<double>(setting.domains[e].n_samples);
    out[setting.domains[e].domain_id] =
        bracket < limits.bracket_epsilon ? limits.eta_cap
                                         : std::min(n_e / (4.0 * bracket), limits.eta_cap);
  }
  return out;
}

// Green's function ------------------------------------------------------------

WkbPair wkb_homogeneous(double lambda, std::span<const double> r,
                        std::span<const double> rho, const Grid1D &grid,
                        double log_bound) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("lambda must be positive");
  std::vector<double> speed(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    if (!(r[i] > 0.0) || !(rho[i] > 0.0))
      throw std::invalid_argument("r and rho must be positive");
    speed[i] = std::sqrt(r[i] / rho[i]);
  }
  auto phi = cumulative_trapezoid(speed, grid.h);
  const double scale = 1.0 / std::sqrt(lambda);
  WkbPair out;
  out.log_f1.resize(grid.n);
  out.log_f2.resize(grid.n);
  out.f1.resize(grid.n);
  out.f2.resize(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double p = phi[i] * scale;
    if (p > log_bound)
      throw NumericalError("WKB phase exceeds the log bound");
    out.log_f1[i] = -p;
    out.log_f2[i] = p;
    out.f1[i] = std::exp(-p);
    out.f2[i] = std::exp(p);
  }
  return out;
}

GreensFunction greens_function(double lambda, std::span<const double> r,
                               std::span<const double> rho, const Grid1D &grid,
                               GreensMethod method) {
  const std::size_t n = grid.n;
  GreensFunction g;
  g.method = method;
  g.lambda = lambda;
  g.r.assign(r.begin(), r.end());
  g.rho.assign(rho.begin(), rho.end());
  g.grid = grid;
  g.table.assign(n * n, 0.0);

  if (method == GreensMethod::Wkb) {
    // Neumann-matched combination of exp(-phi) and exp(phi), in log space.
    const double big = std::numeric_limits<double>::max();
    const auto w = wkb_homogeneous(lambda, r, rho, grid, big);
    const auto &phi = w.log_f2;
    const double Phi = phi.back();
    const double denom = -std::expm1(-2.0 * Phi);
    const double sl = std::sqrt(lambda);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double a = std::min(phi[i], phi[j]);
        const double b = std::max(phi[i], phi[j]);
        const double pre = -sl / (2.0 * std::sqrt(r[j] * rho[j]));
        g.table[i * n + j] = pre * std::exp(a - b) * (1.0 + std::exp(-2.0 * a)) *
                             (1.0 + std::exp(2.0 * b - 2.0 * Phi)) / denom;
      }
    return g;
  }

  const Stencil s = build_stencil(lambda, r, rho, grid);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(rhs.begin(), rhs.end(), 0.0);
    rhs[j] = 1.0 / (grid.mass(j) * grid.h);
    const auto col = solve_tridiagonal(s.lower, s.diag, s.upper, rhs);
    for (std::size_t i = 0; i < n; ++i)
      g.table[i * n + j] = col[i];
  }
  return g;
}

std::vector<double> apply_bvp_operator(double lambda, std::span<const double> r,
                                       std::span<const double> rho,
                                       const Grid1D &grid, std::span<const double> u) {
  const Stencil s = build_stencil(lambda, r, rho, grid);
  return tridiagonal_apply(s.lower, s.diag, s.upper, u);
}

double greens_operator_defect(const GreensFunction &g) {
  const std::size_t n = g.grid.n;
  const Stencil s = build_stencil(g.lambda, g.r, g.rho, g.grid);
  double worst = 0.0;
  std::vector<double> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i)
      col[i] = g.at(i, j);
    auto out = tridiagonal_apply(s.lower, s.diag, s.upper, col);
    const double impulse = 1.0 / (g.grid.mass(j) * g.grid.h);
    out[j] -= impulse;
    double m = 0.0;
    for (double v : out)
      m = std::max(m, std::abs(v));
    worst = std::max(worst, m / impulse);
  }
  return worst;
}

// Asymptotic solution -----------------------------------------------------------

EmpiricalNodes empirical_nodes(const DatasetCollection &data,
                               const TheorySetting &setting, const Grid1D &grid) {
  if (data.size() != setting.domains.size())
    throw std::invalid_argument("data and setting disagree on the number of domains");
  EmpiricalNodes out;
  const auto fs = tabulate(setting.f_star, grid);
  for (const auto &d : data) {
    d.validate();
    std::vector<double> mass(grid.n, 0.0), ysum(grid.n, 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
      double t = 0.0;
      const std::size_t j = grid.cell_of(d.row(i)[0], t);
      mass[j] += 1.0 - t;
      mass[j + 1] += t;
      ysum[j] += (1.0 - t) * d.labels[i];
      ysum[j + 1] += t * d.labels[i];
    }
    const double n_e = static_cast<double>(d.size());
    std::vector<double> dens(grid.n), noise(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) {
      dens[j] = mass[j] / n_e / (grid.h * grid.mass(j));
      noise[j] = mass[j] > 0.0 ? ysum[j] / mass[j] - fs[j] : 0.0;
    }
    out.density.push_back(std::move(dens));
    out.noise.push_back(std::move(noise));
  }
  return out;
}

GridFunction asymptotic_solution(const TheorySetting &setting,
                                 const PenaltyScheme &scheme,
                                 const EmpiricalNodes &nodes,
                                 const GreensFunction &g) {
  setting.validate();
  const Grid1D &grid = g.grid;
  const std::size_t n = grid.n;
  if (nodes.density.size() != setting.domains.size() ||
      nodes.noise.size() != setting.domains.size())
    throw std::invalid_argument("node tables do not match the domains");
  const auto &r = g.r;
  const auto flux = setting.flux_derivative(scheme, grid);
  const auto fs = tabulate(setting.f_star, grid);

  std::vector<double> source(n, 0.0);
  for (std::size_t e = 0; e < setting.domains.size(); ++e) {
    const auto &rh = nodes.density[e];
    const auto &eps = nodes.noise[e];
    if (rh.size() != n || eps.size() != n)
      throw std::invalid_argument("node table size mismatch");
    const double coef =
        eta_times_ae(scheme.eta_of(setting.domains[e].domain_id), rh, r, fs, grid, nullptr);
    for (std::size_t j = 0; j < n; ++j)
      source[j] += rh[j] * (eps[j] - coef * (fs[j] + eps[j]));
  }
  for (std::size_t j = 0; j < n; ++j)
    source[j] *= grid.mass(j) * grid.h;

  std::vector<double> out(n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      row[j] = g.at(i, j) * source[j];
    out[i] = fs[i] + scheme.lambda * flux[i] / r[i] - pairwise_sum(row) / g.lambda;
  }
  return GridFunction(grid, std::move(out));
}

GridFunction asymptotic_solution(const TheorySetting &setting,
                                 const PenaltyScheme &scheme,
                                 const std::vector<std::vector<double>> &noise,
                                 const GreensFunction &g) {
  EmpiricalNodes nodes;
  for (std::size_t e = 0; e < setting.domains.size(); ++e)
    nodes.density.push_back(setting.r_hat_nodes(e, g.grid));
  nodes.noise = noise;
  return asymptotic_solution(setting, scheme, nodes, g);
}

// BVP and stationarity residuals --------------------------------------------------

GridFunction solve_bvp(double lambda, std::span<const double> r,
                       std::span<const double> rho, std::span<const double> h_rhs,
                       const Grid1D &grid) {
  const Stencil s = build_stencil(lambda, r, rho, grid);
  std::vector<double> rhs(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i)
    rhs[i] = -h_rhs[i] / lambda;
  return GridFunction(grid, solve_tridiagonal(s.lower, s.diag, s.upper, rhs));
}

double bvp_residual(const GridFunction &f, const TheorySetting &setting,
                    const PenaltyScheme &scheme, std::span<const double> h_rhs) {
  const Grid1D &grid = f.grid;
  const auto r = setting.total_density(grid);
  const auto rho = setting.rho_nodes(scheme, grid);
  auto res = apply_bvp_operator(scheme.lambda, r, rho, grid, f.values);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double v = -scheme.lambda * res[i] - h_rhs[i];
    res[i] = v * v;
  }
  return std::sqrt(trapezoid(res, grid.h));
}

double lemma1_residual(const GridFunction &f, const DatasetCollection &data,
                       const PenaltyScheme &scheme, std::span<const double> rho) {
  const Grid1D &grid = f.grid;
  if (rho.size() != grid.n)
    throw std::invalid_argument("rho table does not match the grid");
  std::vector<std::pair<double, double>> terms;
  for (const auto &d : data) {
    d.validate();
    const double n_e = static_cast<double>(d.size());
    std::vector<double> fx(d.size()), inner(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      fx[i] = f(d.row(i)[0]);
      inner[i] = fx[i] * (d.labels[i] - fx[i]);
    }
    const double ae = 4.0 * pairwise_sum(inner) / n_e;
    const double keep = 1.0 - scheme.eta_of(d.domain_id) * ae;
    for (std::size_t i = 0; i < d.size(); ++i)
      terms.emplace_back(d.row(i)[0], (fx[i] - d.labels[i] * keep) / n_e);
  }
  std::sort(terms.begin(), terms.end());
  const auto fp = f.derivative();
  double worst = 0.0, running = 0.0;
  std::size_t next = 0;
  for (std::size_t k = 0; k < grid.n; ++k) {
    while (next < terms.size() && terms[next].first <= grid.points[k])
      running += terms[next++].second;
    worst = std::max(worst, std::abs(running - scheme.lambda * rho[k] * fp[k]));
  }
  return worst;
}

// Export ------------------------------------------------------------------------

nlohmann::json to_json(const TheoryReport &report) {
  nlohmann::json j;
  j["risk"] = report.risk;
  j["bias_integral"] = report.bias_integral;
  j["variance_integral"] = report.variance_integral;
  j["n_grid"] = report.grid.n;
  j["a_e"] = nlohmann::json::object();
  for (const auto &[d, v] : report.a_e)
    j["a_e"][std::to_string(d)] = v;
  return j;
}

void write_report_csv(std::ostream &out, const TheoryReport &report) {
  out << "x,bias2,variance\n";
  out.precision(17);
  for (std::size_t i = 0; i < report.grid.n; ++i)
    out << report.grid.points[i] << ',' << report.bias2[i] << ','
        << report.variance[i] << '\n';
}

} // namespace lipirm
