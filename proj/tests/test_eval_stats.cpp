#include <doctest.h>

#include <cmath>

#include "lipirm/eval_stats.hpp"

using namespace lipirm;

namespace {

Regression1DConfig sine(std::size_t n, double noise = 0.1) {
  Regression1DConfig c;
  c.domains.push_back({DensityFamily{}, NoiseProfile{NoiseProfile::Kind::Constant, noise, 0.0, {}}, n});
  return c;
}

PenaltyScheme plain(double lambda) {
  PenaltyScheme p;
  p.lambda = lambda;
  p.eta[0] = 0.0;
  p.rho[0] = 1.0;
  return p;
}

SolverConfig coarse() {
  SolverConfig s;
  s.n_grid = 129;
  s.lipschitz = LipschitzMode::Integral;
  return s;
}

} // namespace

TEST_CASE("point metrics") {
  const std::vector<double> p{0.1, 0.4, 0.35, 0.8}, y{0, 0, 1, 1};
  CHECK(auc(p, y) == doctest::Approx(0.75));
  CHECK(accuracy(p, y) == doctest::Approx(0.75));
  CHECK(mse(std::vector<double>{1, 2}, std::vector<double>{0, 4}) == doctest::Approx(2.5));
  const std::vector<double> tied{0.5, 0.5, 0.5, 0.9};
  CHECK(auc(tied, y) == doctest::Approx(0.75));
  CHECK_THROWS(auc(p, std::vector<double>{1, 1, 1, 1}));
  CHECK_THROWS(mse(p, std::span<const double>(y).subspan(0, 3)));
}

TEST_CASE("incomplete beta") {
  CHECK(incomplete_beta(2.5, 0.5, 0.3) == doctest::Approx(0.018927124071945658).epsilon(1e-12));
  CHECK(incomplete_beta(10, 3, 0.9) == doctest::Approx(0.889130022255).epsilon(1e-10));
  CHECK(incomplete_beta(1, 1, 0.37) == doctest::Approx(0.37));
  CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
  CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
  CHECK_THROWS(incomplete_beta(-1, 1, 0.5));
}

TEST_CASE("Welch t-test") {
  const std::vector<double> a{1, 2, 3}, b{2, 4, 6};
  const auto r = welch_t_test(a, b);
  CHECK(r.t == doctest::Approx(-1.5491933384829668).epsilon(1e-13));
  CHECK(r.dof == doctest::Approx(2.9411764705882346).epsilon(1e-13));
  CHECK(r.p == doctest::Approx(0.2208808404940958).epsilon(1e-10));
  CHECK(welch_t_test(a, b, false).p == doctest::Approx(0.8895595797529521).epsilon(1e-10));
  CHECK(r.stars.empty());
  CHECK_THROWS(welch_t_test(std::vector<double>{1}, b));
}

TEST_CASE("significance stars") {
  CHECK(significance_stars(0.2) == "");
  CHECK(significance_stars(0.09) == "*");
  CHECK(significance_stars(0.04) == "**");
  CHECK(significance_stars(0.009) == "***");
}

TEST_CASE("geometric grid") {
  const auto g = geometric_grid(2.0, 2.0, 5);
  REQUIRE(g.size() == 5);
  CHECK(g[0] == doctest::Approx(0.5));
  CHECK(g[2] == doctest::Approx(2.0));
  CHECK(g[4] == doctest::Approx(8.0));
  CHECK(geometric_grid(3.0, 1.5, 1) == std::vector<double>{3.0});
  CHECK_THROWS(geometric_grid(0.0, 2.0, 3));
}

TEST_CASE("grid search evaluates every point and breaks ties low") {
  PenaltyGrid grid;
  grid.lambda = {1.0, 2.0, 3.0};
  grid.eta[0] = {0.5, 1.0};
  const auto r = grid_search_penalties(plain(1.0), grid,
                                       [](const PenaltyScheme &s) { return std::abs(s.lambda - 2.5); });
  CHECK(r.table.size() == 6);
  CHECK(r.best.lambda == 2.0);
  CHECK(r.best.eta.at(0) == 0.5);
  CHECK(r.best_value == doctest::Approx(0.5));

  const auto gen = gen_regression_1d(sine(100));
  const Grid1D g(129);
  PenaltyGrid lam;
  lam.lambda = geometric_grid(0.01, 2.0, 3);
  const auto res = grid_search_penalties(plain(0.01), lam, theorem1_objective(gen.setting, g));
  for (const auto &[s, v] : res.table)
    CHECK(v == theorem1_risk(gen.setting, s, g).risk);
}

TEST_CASE("Monte Carlo risk") {
  const auto small = monte_carlo_risk(sine(500), plain(0.01), coarse(), 8, 1);
  const auto large = monte_carlo_risk(sine(500), plain(0.01), coarse(), 32, 1);
  CHECK(small.values.size() == 8);
  CHECK(large.standard_error / small.standard_error == doctest::Approx(0.5).epsilon(0.3));
  // variance-dominated: small lambda, loud noise
  const auto more = monte_carlo_risk(sine(2000, 1.0), plain(1e-3), coarse(), 16, 2);
  const auto less = monte_carlo_risk(sine(8000, 1.0), plain(1e-3), coarse(), 16, 2);
  CHECK(less.mean < 0.8 * more.mean);
  CHECK(monte_carlo_risk(sine(500), plain(0.01), coarse(), 8, 1).values == small.values);
  CHECK_THROWS(monte_carlo_risk(sine(500), plain(0.01), coarse(), 1, 1));
}
