#include "lipirm/functional_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lipirm/numerics.hpp"

namespace lipirm {

RhoField rho_field_from_bins(const PenaltyScheme &scheme) {
  if (scheme.rho.empty())
    return [](double) { return 1.0; };
  std::vector<double> values;
  for (int k = 0; k < static_cast<int>(scheme.rho.size()); ++k)
    values.push_back(scheme.rho_of(k));
  return [values](double x) {
    const int K = static_cast<int>(values.size());
    const int k = std::clamp(static_cast<int>(std::floor(x * K)), 0, K - 1);
    return values[static_cast<std::size_t>(k)];
  };
}

void SolverConfig::validate() const {
  if (n_grid < 3)
    throw std::invalid_argument("n_grid must be at least 3");
  if (max_outer_iters < 1 || max_inner_iters < 1)
    throw std::invalid_argument("iteration counts must be positive");
  if (!(tolerance > 0.0) || !(step_size > 0.0))
    throw std::invalid_argument("tolerance and step size must be positive");
}

namespace {

struct Sample {
  std::size_t cell;
  double theta;
  double y;
};

struct DomainBlock {
  double weight;  // w_e
  double eta;
  std::vector<Sample> samples;
};

// Everything about the data that does not depend on f.
struct Problem {
  Grid1D grid;
  double lambda;
  IrmBracket bracket;
  std::vector<DomainBlock> domains;
  std::vector<double> cell_weight;  // Lipschitz weight W_c of sum W_c slope_c^2
};

Problem prepare(const DatasetCollection &data, const PenaltyScheme &scheme,
                const SolverConfig &config) {
  config.validate();
  scheme.validate();
  if (data.empty())
    throw std::invalid_argument("no training domains");
  Problem p{Grid1D(config.n_grid), scheme.lambda, config.bracket, {}, {}};
  const RhoField rho = config.rho ? config.rho : rho_field_from_bins(scheme);
  const std::size_t cells = p.grid.n - 1;
  p.cell_weight.assign(cells, 0.0);
  for (const auto &d : data) {
    d.validate();
    DomainBlock b;
    b.weight = config.normalization == RiskNormalization::DomainMean
                   ? 1.0 / static_cast<double>(d.size())
                   : 1.0;
    b.eta = scheme.eta_of(d.domain_id);
    b.samples.reserve(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double x = d.row(i)[0];
      if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("feature outside [0,1] in domain " +
                                std::to_string(d.domain_id));
      double t = 0.0;
      const std::size_t c = p.grid.cell_of(x, t);
      b.samples.push_back({c, t, d.labels[i]});
      if (config.lipschitz == LipschitzMode::SampleWeighted)
        p.cell_weight[c] += b.weight * rho(x);
    }
    p.domains.push_back(std::move(b));
  }
  if (config.lipschitz == LipschitzMode::Integral)
    for (std::size_t c = 0; c < cells; ++c)
      p.cell_weight[c] = rho((static_cast<double>(c) + 0.5) * p.grid.h) * p.grid.h;
  return p;
}

double value_at(const std::vector<double> &f, const Sample &s) {
  return (1.0 - s.theta) * f[s.cell] + s.theta * f[s.cell + 1];
}

// IRM bracket B_e for the current f.
double bracket_value(const Problem &p, const DomainBlock &b, const std::vector<double> &f) {
  std::vector<double> terms(b.samples.size());
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    const double fi = value_at(f, b.samples[i]);
    const double yi = b.samples[i].y;
    terms[i] = p.bracket == IrmBracket::Original ? 2.0 * fi * (fi - yi)
                                                 : 2.0 * yi * (fi - yi);
  }
  return b.weight * pairwise_sum(terms);
}

double loss(const Problem &p, const std::vector<double> &f) {
  std::vector<double> parts;
  for (const auto &b : p.domains) {
    std::vector<double> sq(b.samples.size());
    for (std::size_t i = 0; i < b.samples.size(); ++i) {
      const double r = value_at(f, b.samples[i]) - b.samples[i].y;
      sq[i] = r * r;
    }
    parts.push_back(b.weight * pairwise_sum(sq));
    if (b.eta != 0.0) {
      const double B = bracket_value(p, b, f);
      parts.push_back(b.eta * B * B);
    }
  }
  std::vector<double> lip(p.cell_weight.size());
  for (std::size_t c = 0; c < lip.size(); ++c) {
    const double s = (f[c + 1] - f[c]) / p.grid.h;
    lip[c] = p.cell_weight[c] * s * s;
  }
  parts.push_back(p.lambda * pairwise_sum(lip));
  return pairwise_sum(parts);
}

// Gradient, plus the Newton model: tridiagonal T and rank-one vectors U.
struct Model {
  std::vector<double> grad;
  std::vector<double> lower, diag, upper;
  std::vector<std::vector<double>> rank_one;
};

Model newton_model(const Problem &p, const std::vector<double> &f, double ridge) {
  const std::size_t n = p.grid.n;
  Model m{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
          std::vector<double>(n, ridge), std::vector<double>(n, 0.0), {}};
  for (const auto &b : p.domains) {
    const bool irm = b.eta != 0.0;
    const double B = irm ? bracket_value(p, b, f) : 0.0;
    double curvature = 1.0;
    if (irm && p.bracket == IrmBracket::Original)
      curvature = std::max(1.0 + 4.0 * b.eta * B, 1e-3);
    std::vector<double> gB(irm ? n : 0, 0.0);
    for (const auto &s : b.samples) {
      const double fi = value_at(f, s);
      const double a0 = 1.0 - s.theta, a1 = s.theta;
      const double g = 2.0 * b.weight * (fi - s.y);
      m.grad[s.cell] += g * a0;
      m.grad[s.cell + 1] += g * a1;
      const double w = 2.0 * b.weight * curvature;
      m.diag[s.cell] += w * a0 * a0;
      m.diag[s.cell + 1] += w * a1 * a1;
      m.upper[s.cell] += w * a0 * a1;
      m.lower[s.cell + 1] += w * a0 * a1;
      if (irm) {
        const double dB = p.bracket == IrmBracket::Original
                              ? 2.0 * b.weight * (2.0 * fi - s.y)
                              : 2.0 * b.weight * s.y;
        gB[s.cell] += dB * a0;
        gB[s.cell + 1] += dB * a1;
      }
    }
    if (irm) {
      const double scale = std::sqrt(2.0 * b.eta);
      for (std::size_t j = 0; j < n; ++j) {
        m.grad[j] += 2.0 * b.eta * B * gB[j];
        gB[j] *= scale;
      }
      m.rank_one.push_back(std::move(gB));
    }
  }
  const double inv_h2 = 1.0 / (p.grid.h * p.grid.h);
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double k = 2.0 * p.lambda * p.cell_weight[c] * inv_h2;
    const double s = (f[c + 1] - f[c]);
    m.grad[c] -= k * s;
    m.grad[c + 1] += k * s;
    m.diag[c] += k;
    m.diag[c + 1] += k;
    m.upper[c] -= k;
    m.lower[c + 1] -= k;
  }
  return m;
}

// (T + U U^T)^-1 v by Woodbury.
std::vector<double> apply_inverse(const Model &m, const std::vector<double> &v) {
  auto tv = solve_tridiagonal(m.lower, m.diag, m.upper, v);
  const std::size_t E = m.rank_one.size();
  if (E == 0)
    return tv;
  std::vector<std::vector<double>> tu;
  for (const auto &u : m.rank_one)
    tu.push_back(solve_tridiagonal(m.lower, m.diag, m.upper, u));
  std::vector<double> cap(E * E), rhs(E);
  for (std::size_t a = 0; a < E; ++a) {
    std::vector<double> prod(v.size());
    for (std::size_t j = 0; j < v.size(); ++j)
      prod[j] = m.rank_one[a][j] * tv[j];
    rhs[a] = pairwise_sum(prod);
    for (std::size_t b = 0; b < E; ++b) {
      for (std::size_t j = 0; j < v.size(); ++j)
        prod[j] = m.rank_one[a][j] * tu[b][j];
      cap[a * E + b] = (a == b ? 1.0 : 0.0) + pairwise_sum(prod);
    }
  }
  const auto y = solve_dense(std::move(cap), std::move(rhs));
  for (std::size_t b = 0; b < E; ++b)
    for (std::size_t j = 0; j < tv.size(); ++j)
      tv[j] -= tu[b][j] * y[b];
  return tv;
}

double pooled_mean(const DatasetCollection &data) {
  std::vector<double> ys;
  for (const auto &d : data)
    ys.insert(ys.end(), d.labels.begin(), d.labels.end());
  return pairwise_sum(ys) / static_cast<double>(ys.size());
}

} // namespace

double empirical_loss(const GridFunction &f, const DatasetCollection &data,
                      const PenaltyScheme &scheme, const SolverConfig &config) {
  SolverConfig c = config;
  c.n_grid = f.grid.n;
  const Problem p = prepare(data, scheme, c);
  const double L = loss(p, f.values);
  if (!std::isfinite(L))
    throw NumericalError("empirical loss is not finite");
  return L;
}

SolverResult minimize(const DatasetCollection &data, const PenaltyScheme &scheme,
                      const SolverConfig &config) {
  const Problem p = prepare(data, scheme, config);
  const std::size_t n = p.grid.n;
  std::vector<double> f(n, config.init == SolverInit::DataMean ? pooled_mean(data) : 0.0);

  SolverResult res;
  double L = loss(p, f);
  res.loss_trace.push_back(L);
  for (int it = 1; it <= config.max_outer_iters; ++it) {
    const Model m = newton_model(p, f, config.ridge);
    auto d = apply_inverse(m, m.grad);
    std::vector<double> slope_terms(n);
    for (std::size_t j = 0; j < n; ++j) {
      d[j] = -d[j];
      slope_terms[j] = m.grad[j] * d[j];
    }
    const double slope = pairwise_sum(slope_terms);
    double t = config.step_size;
    std::vector<double> trial(n);
    double L_new = L;
    bool accepted = false;
    if (slope < 0.0) {
      for (int ls = 0; ls < config.max_inner_iters; ++ls, t *= 0.5) {
        for (std::size_t j = 0; j < n; ++j)
          trial[j] = f[j] + t * d[j];
        L_new = loss(p, trial);
        if (std::isfinite(L_new) && L_new <= L + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
      }
    }
    res.iterations = it;
    if (!accepted) {
      // No descent left at working precision.
      res.f = GridFunction(p.grid, f);
      return res;
    }
    f.swap(trial);
    const double change = std::abs(L - L_new);
    L = L_new;
    res.loss_trace.push_back(L);
    if (change <= config.tolerance * std::max(std::abs(L), 1e-300)) {
      res.f = GridFunction(p.grid, f);
      return res;
    }
  }
  res.f = GridFunction(p.grid, f);
  throw SolverError("functional solver did not converge in " +
                        std::to_string(config.max_outer_iters) + " iterations",
                    std::move(res));
}

} // namespace lipirm
