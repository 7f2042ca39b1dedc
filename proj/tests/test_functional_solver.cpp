#include <doctest.h>

#include <cmath>

#include "lipirm/benchgen.hpp"
#include "lipirm/functional_solver.hpp"
#include "lipirm/numerics.hpp"

using namespace lipirm;

namespace {

DatasetCollection two_domains(std::uint64_t seed) {
  Regression1DConfig c;
  c.domains.push_back({DensityFamily{}, {NoiseProfile::Kind::Constant, 0.1, 0.0, {}}, 300});
  c.domains.push_back({DensityFamily{DensityFamily::Kind::Skew, 1.0}, {NoiseProfile::Kind::Constant, 0.3, 0.0, {}}, 200});
  c.seed = seed;
  return gen_regression_1d(c).data;
}

PenaltyScheme scheme(double lambda, double eta) {
  PenaltyScheme s;
  s.lambda = lambda;
  s.eta = {{0, eta}, {1, eta}};
  s.rho = {{0, 1.0}, {1, 2.0}};
  return s;
}

} // namespace

double pooled_mean(const DatasetCollection &data) {
  double mean = 0.0;
  for (const auto &d : data)
    for (double y : d.labels)
      mean += y / static_cast<double>(d.size()) / static_cast<double>(data.size());
  return mean;
}

TEST_CASE("large lambda flattens the solution to the pooled mean") {
  PenaltyScheme s;
  s.lambda = 1e4;
  s.eta = {{0, 0.0}, {1, 0.0}};
  s.rho = {{0, 1.0}};
  SolverConfig c;
  c.n_grid = 129;

  SUBCASE("sample-weighted on dense data") {
    Regression1DConfig g;
    g.domains.push_back({DensityFamily{}, {NoiseProfile::Kind::Constant, 0.05, 0.0, {}}, 2000});
    g.seed = 1;
    const auto data = gen_regression_1d(g).data;
    const auto r = minimize(data, s, c);
    for (double v : r.f.values)
      CHECK(std::abs(v - pooled_mean(data)) < 1e-2);
  }
  SUBCASE("integral mode on sparse data") {
    // The sample-weighted term does not see cells without samples, so only
    // the integral form is flat here.
    const auto data = two_domains(1);
    c.lipschitz = LipschitzMode::Integral;
    const auto r = minimize(data, s, c);
    for (double v : r.f.values)
      CHECK(std::abs(v - pooled_mean(data)) < 1e-2);
  }
}

TEST_CASE("empirical loss hand examples") {
  const Grid1D g(5);
  DomainDataset d;
  d.dim = 1;
  const double x0[1] = {0.25}, x1[1] = {0.75};
  d.add(x0, 0.0);
  d.add(x1, 2.0);
  PenaltyScheme s;
  s.lambda = 1e-9;
  s.eta = {{0, 1.0}};
  s.rho = {{0, 1.0}};
  // f = 1: ERM 1, bracket mean 2(1)(1-0)/2 + 2(1)(1-2)/2 = 0
  CHECK(empirical_loss(GridFunction(g, std::vector<double>(5, 1.0)), {d}, s) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // interpolating line, no IRM: only the Lipschitz term remains
  s.eta[0] = 0.0;
  s.lambda = 0.5;
  const GridFunction line(g, {-1.0, 0.0, 1.0, 2.0, 3.0});
  CHECK(empirical_loss(line, {d}, s) == doctest::Approx(0.5 * 16.0).epsilon(1e-12));
  // constant f with y = c: zero for any lambda
  DomainDataset flat = d;
  flat.labels = {1.0, 1.0};
  s.eta[0] = 1.0;
  CHECK(empirical_loss(GridFunction(g, std::vector<double>(5, 1.0)), {flat}, s) == 0.0);
}

TEST_CASE("minimize beats the zero and pooled-mean functions") {
  const auto data = two_domains(6);
  const auto s = scheme(0.01, 1.0);
  SolverConfig c;
  c.n_grid = 65;
  const auto r = minimize(data, s, c);
  const double best = empirical_loss(r.f, data, s, c);
  const Grid1D g(65);
  CHECK(best <= empirical_loss(GridFunction(g, std::vector<double>(65, 0.0)), data, s, c));
  CHECK(best <= empirical_loss(GridFunction(g, std::vector<double>(65, pooled_mean(data))), data, s, c));
  // determinism
  const auto again = minimize(data, s, c);
  CHECK(again.f.values == r.f.values);
}

TEST_CASE("loss trace is monotone and the result is a local minimum") {
  const auto data = two_domains(2);
  for (auto mode : {LipschitzMode::SampleWeighted, LipschitzMode::Integral}) {
    SolverConfig c;
    c.n_grid = 65;
    c.lipschitz = mode;
    const auto s = scheme(0.01, 0.5);
    const auto r = minimize(data, s, c);
    for (std::size_t i = 1; i < r.loss_trace.size(); ++i)
      CHECK(r.loss_trace[i] <= r.loss_trace[i - 1] + 1e-15);
    const double base = empirical_loss(r.f, data, s, c);
    Rng rng = make_rng(3, "tests.solver");
    for (int trial = 0; trial < 20; ++trial) {
      GridFunction p = r.f;
      for (auto &v : p.values)
        v += 1e-4 * standard_normal(rng);
      CHECK(empirical_loss(p, data, s, c) >= base - 1e-12);
    }
  }
}

TEST_CASE("raw-sum normalization and transformed bracket run and differ") {
  const auto data = two_domains(3);
  const auto s = scheme(0.02, 1.0);
  SolverConfig a;
  a.n_grid = 65;
  SolverConfig b = a;
  b.normalization = RiskNormalization::RawSum;
  SolverConfig t = a;
  t.bracket = IrmBracket::Transformed;
  const auto fa = minimize(data, s, a).f;
  const auto fb = minimize(data, s, b).f;
  const auto ft = minimize(data, s, t).f;
  double dab = 0.0, dat = 0.0;
  for (std::size_t i = 0; i < fa.values.size(); ++i) {
    dab = std::max(dab, std::abs(fa.values[i] - fb.values[i]));
    dat = std::max(dat, std::abs(fa.values[i] - ft.values[i]));
  }
  CHECK(dab > 1e-6);
  CHECK(dat > 1e-6);
}

TEST_CASE("exhausted iterations raise SolverError with the last iterate") {
  const auto data = two_domains(4);
  SolverConfig c;
  c.n_grid = 33;
  c.max_outer_iters = 1;
  try {
    minimize(data, scheme(0.01, 5.0), c);
    FAIL("expected SolverError");
  } catch (const SolverError &e) {
    CHECK(e.last().f.values.size() == 33);
    CHECK(e.last().iterations == 1);
  }
}

TEST_CASE("rho field from bins") {
  PenaltyScheme s;
  s.rho = {{0, 1.0}, {1, 2.0}, {2, 3.0}, {3, 4.0}};
  const auto rho = rho_field_from_bins(s);
  CHECK(rho(0.1) == 1.0);
  CHECK(rho(0.3) == 2.0);
  CHECK(rho(0.99) == 4.0);
  CHECK(rho(1.0) == 4.0);
  CHECK(rho_field_from_bins(PenaltyScheme{})(0.5) == 1.0);
}

TEST_CASE("invalid solver input") {
  const auto data = two_domains(5);
  SolverConfig c;
  c.n_grid = 2;
  CHECK_THROWS_AS(minimize(data, scheme(0.1, 0.0), c), std::invalid_argument);
  c.n_grid = 33;
  CHECK_THROWS(minimize(data, scheme(-1.0, 0.0), c));
  auto outside = data;
  outside[0].features[0] = 1.5;
  CHECK_THROWS(minimize(outside, scheme(0.1, 0.0), c));
}
