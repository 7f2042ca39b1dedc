#include "lipirm/eval_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "lipirm/numerics.hpp"

namespace lipirm {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("predictions and labels differ in length");
  if (a.empty())
    throw std::invalid_argument("no predictions");
}

double mean_of(std::span<const double> v) {
  return pairwise_sum(v) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double m) {
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    sq[i] = (v[i] - m) * (v[i] - m);
  return pairwise_sum(sq) / static_cast<double>(v.size() - 1);
}

} // namespace

double mse(std::span<const double> predictions, std::span<const double> labels) {
  check_lengths(predictions, labels);
  std::vector<double> sq(predictions.size());
  for (std::size_t i = 0; i < sq.size(); ++i)
    sq[i] = (predictions[i] - labels[i]) * (predictions[i] - labels[i]);
  return mean_of(sq);
}

double accuracy(std::span<const double> predictions, std::span<const double> labels) {
  check_lengths(predictions, labels);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    hit += ((predictions[i] >= 0.5) == (labels[i] >= 0.5)) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(predictions.size());
}

double auc(std::span<const double> scores, std::span<const double> labels) {
  check_lengths(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]])
      ++j;
    // Ranks i+1..j share their average.
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] >= 0.5) {
        rank_sum += avg;
        ++positives;
      }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0)
    throw std::invalid_argument("auc needs both classes");
  const double np = static_cast<double>(positives);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(negatives));
}

// Continued fraction for I_x(a,b), modified Lentz.
static double beta_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny)
    d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny)
      d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny)
      d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny)
      c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps)
      return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("incomplete beta needs positive parameters");
  if (x <= 0.0)
    return 0.0;
  if (x >= 1.0)
    return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * beta_fraction(a, b, x) / a;
  return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

std::string significance_stars(double p) {
  if (p < 0.01)
    return "***";
  if (p < 0.05)
    return "**";
  if (p < 0.1)
    return "*";
  return "";
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b,
                         bool two_sided) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("welch_t_test needs at least two samples per side");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = sample_variance(a, ma) / na;
  const double vb = sample_variance(b, mb) / nb;
  TTestResult r;
  const double se2 = va + vb;
  if (se2 == 0.0) {
    r.dof = na + nb - 2.0;
    if (ma == mb) {
      r.t = 0.0;
      r.p = two_sided ? 1.0 : 0.5;
    } else {
      r.t = ma > mb ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
      r.p = two_sided ? 0.0 : (ma > mb ? 0.0 : 1.0);
    }
    r.stars = significance_stars(r.p);
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  const double tail2 = incomplete_beta(0.5 * r.dof, 0.5, r.dof / (r.dof + r.t * r.t));
  if (two_sided)
    r.p = tail2;
  else
    r.p = r.t > 0.0 ? 0.5 * tail2 : 1.0 - 0.5 * tail2;
  r.p = std::clamp(r.p, 0.0, 1.0);
  r.stars = significance_stars(r.p);
  return r;
}

RiskEstimate monte_carlo_risk(const Regression1DConfig &setting,
                              const PenaltyScheme &scheme, const SolverConfig &solver,
                              std::size_t replications, std::uint64_t seed, int jobs) {
  if (replications < 2)
    throw std::invalid_argument("monte_carlo_risk needs at least two replications");
  RiskEstimate est;
  est.replications = replications;
  est.values.assign(replications, 0.0);
  parallel_for(replications, jobs, [&](std::size_t r) {
    try {
      Regression1DConfig cfg = setting;
      cfg.seed = derive_seed(seed, "mc", r);
      const auto gen = gen_regression_1d(cfg);
      const auto fit = minimize(gen.data, scheme, solver);
      const Grid1D &g = fit.f.grid;
      std::vector<double> sq(g.n);
      for (std::size_t i = 0; i < g.n; ++i) {
        const double d = fit.f.values[i] - cfg.truth.value(g.points[i]);
        sq[i] = d * d;
      }
      est.values[r] = trapezoid(sq, g.h);
    } catch (const std::exception &e) {
      throw std::runtime_error("replication " + std::to_string(r) + ": " + e.what());
    }
  });
  est.mean = mean_of(est.values);
  est.standard_error =
      std::sqrt(sample_variance(est.values, est.mean) / static_cast<double>(replications));
  return est;
}

std::vector<double> geometric_grid(double center, double ratio, std::size_t count) {
  if (count == 0 || !(center > 0.0) || !(ratio > 0.0))
    throw std::invalid_argument("geometric_grid needs a positive center, ratio and count");
  std::vector<double> out(count);
  const double mid = 0.5 * static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = center * std::pow(ratio, static_cast<double>(i) - mid);
  return out;
}

GridSearchResult grid_search_penalties(const PenaltyScheme &base, const PenaltyGrid &grid,
                                       const PenaltyObjective &objective, int jobs) {
  // Axes in a fixed order: lambda, then eta by domain, then rho by group.
  struct Axis {
    int kind;  // 0 lambda, 1 eta, 2 rho
    int key;
    std::vector<double> values;
  };
  std::vector<Axis> axes;
  if (!grid.lambda.empty())
    axes.push_back({0, 0, grid.lambda});
  for (const auto &[k, v] : grid.eta)
    if (!v.empty())
      axes.push_back({1, k, v});
  for (const auto &[k, v] : grid.rho)
    if (!v.empty())
      axes.push_back({2, k, v});
  for (auto &a : axes)
    std::sort(a.values.begin(), a.values.end());

  std::size_t total = 1;
  for (const auto &a : axes)
    total *= a.values.size();

  GridSearchResult res;
  res.table.resize(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    PenaltyScheme s = base;
    std::size_t rem = idx;
    for (std::size_t ai = axes.size(); ai-- > 0;) {
      const auto &a = axes[ai];
      const double v = a.values[rem % a.values.size()];
      rem /= a.values.size();
      if (a.kind == 0)
        s.lambda = v;
      else if (a.kind == 1)
        s.eta[a.key] = v;
      else
        s.rho[a.key] = v;
    }
    res.table[idx].first = std::move(s);
  }
  parallel_for(total, jobs,
               [&](std::size_t i) { res.table[i].second = objective(res.table[i].first); });
  std::size_t best = 0;
  for (std::size_t i = 1; i < total; ++i)
    if (res.table[i].second < res.table[best].second)
      best = i;
  res.best = res.table[best].first;
  res.best_value = res.table[best].second;
  return res;
}

PenaltyObjective theorem1_objective(const TheorySetting &setting, const Grid1D &grid) {
  return [setting, grid](const PenaltyScheme &s) { return theorem1_risk(setting, s, grid).risk; };
}

PenaltyObjective monte_carlo_objective(const Regression1DConfig &setting,
                                       const SolverConfig &solver,
                                       std::size_t replications, std::uint64_t seed) {
  return [=](const PenaltyScheme &s) {
    return monte_carlo_risk(setting, s, solver, replications, seed).mean;
  };
}

void write_grid_csv(std::ostream &out, const GridSearchResult &result) {
  out << "lambda,eta,rho,value\n";
  out.precision(17);
  auto join = [](const std::map<int, double> &m) {
    std::string s;
    for (const auto &[k, v] : m) {
      if (!s.empty())
        s += ';';
      s += std::to_string(k) + ':' + std::to_string(v);
    }
    return s;
  };
  for (const auto &[s, v] : result.table)
    out << s.lambda << ",\"" << join(s.eta) << "\",\"" << join(s.rho) << "\"," << v << '\n';
}

} // namespace lipirm
