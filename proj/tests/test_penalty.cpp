#include <doctest.h>

#include <cmath>

#include "lipirm/penalty.hpp"

using namespace lipirm;

TEST_CASE("optimal lambda") {
  const std::vector<std::size_t> a{32, 32}, b{2000, 2000, 2000};
  CHECK(optimal_lambda(a) == doctest::Approx(0.329876977693223564).epsilon(1e-14));
  CHECK(optimal_lambda(b) == doctest::Approx(0.0742055696951029419).epsilon(1e-14));
  CHECK_THROWS_AS(optimal_lambda(std::vector<std::size_t>{}), std::invalid_argument);
}

TEST_CASE("optimal rho") {
  // sigma equal to r_hat in every group
  auto st = GroupStatistics::from_tables({0}, {100}, 3, {0.2, 0.3, 0.5}, {0.04, 0.09, 0.25});
  for (const auto &[k, v] : optimal_rho(st))
    CHECK(v == doctest::Approx(0.574349177498517503).epsilon(1e-14));
  // equal r_hat, sigma ratio 4
  auto st2 = GroupStatistics::from_tables({0}, {100}, 2, {0.5, 0.5}, {0.01, 0.16});
  const auto rho = optimal_rho(st2);
  CHECK(rho.at(1) / rho.at(0) == doctest::Approx(3.03143313302079616).epsilon(1e-14));
}

TEST_CASE("optimal eta") {
  auto st = GroupStatistics::from_tables({0}, {100}, 1, {1.0}, {1.0});
  CHECK(optimal_eta(st).at(0) == doctest::Approx(14.3587294374629376).epsilon(1e-14));
  // a noiseless domain hits the cap
  auto quiet = GroupStatistics::from_tables({0}, {100}, 1, {1.0}, {0.0});
  PenaltyLimits lim;
  lim.eta_cap = 123.0;
  CHECK(optimal_eta(quiet, lim).at(0) == 123.0);
  CHECK(optimal_rho(quiet, lim).at(0) == lim.rho_floor);
}

TEST_CASE("exact forms") {
  auto st = GroupStatistics::from_tables({0}, {100}, 1, {1.0}, {1.0});
  ExactPenaltyInputs in{{2.0}, {3.0}};
  CHECK(exact_optimal_eta(st, in).at(0) == doctest::Approx(3.71375512076250699).epsilon(1e-14));
  auto st2 = GroupStatistics::from_tables({0}, {100}, 1, {0.5}, {0.01});
  ExactPenaltyInputs in2{{1.0}, {2.0}};
  CHECK(exact_optimal_rho(st2, in2).at(0) == doctest::Approx(0.120112443398143123).epsilon(1e-14));
  ExactPenaltyInputs neg{{2.0}, {-3.0}};
  CHECK_THROWS_WITH(exact_optimal_eta(st, neg), "exact form requires positive bracket");
  ExactPenaltyInputs flat{{1.0}, {0.0}};
  CHECK_THROWS_AS(exact_optimal_rho(st, flat), std::invalid_argument);
}

TEST_CASE("tractable forms are the exact forms at f = f'' = 1") {
  auto st = GroupStatistics::from_tables({3, 5}, {40, 90}, 2, {0.3, 0.7, 0.6, 0.4},
                                         {0.2, 0.05, 0.1, 0.3});
  ExactPenaltyInputs ones{{1.0, 1.0}, {1.0, 1.0}};
  const auto a = optimal_eta(st), b = exact_optimal_eta(st, ones);
  for (const auto &[k, v] : a)
    CHECK(b.at(k) == doctest::Approx(v).epsilon(1e-13));
  const auto c = optimal_rho(st), d = exact_optimal_rho(st, ones);
  for (const auto &[k, v] : c)
    CHECK(d.at(k) == doctest::Approx(v).epsilon(1e-13));
}

TEST_CASE("scheme validation and JSON round trip") {
  const std::vector<int> ids{0, 2};
  auto s = PenaltyScheme::uniform(0.5, ids, 3);
  CHECK(s.eta_of(2) == 1.0);
  CHECK(s.rho_of(1) == 1.0);
  CHECK_THROWS_AS(s.eta_of(1), std::out_of_range);
  s.eta[2] = 4.25;
  s.rho[1] = 0.125;
  const auto back = scheme_from_json(to_json(s));
  CHECK(back.lambda == s.lambda);
  CHECK(back.eta == s.eta);
  CHECK(back.rho == s.rho);
  s.lambda = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.lambda = 1.0;
  s.eta[0] = -0.1;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("penalty monotonicity") {
  // more noise in a group raises its rho and lowers its domain's eta
  auto lo = GroupStatistics::from_tables({0}, {100}, 2, {0.5, 0.5}, {0.01, 0.01});
  auto hi = GroupStatistics::from_tables({0}, {100}, 2, {0.5, 0.5}, {0.01, 0.09});
  CHECK(optimal_rho(hi).at(1) > optimal_rho(lo).at(1));
  CHECK(optimal_eta(hi).at(0) < optimal_eta(lo).at(0));
  // a sparser group gets a larger rho
  auto sparse = GroupStatistics::from_tables({0}, {100}, 2, {0.9, 0.1}, {0.01, 0.01});
  CHECK(optimal_rho(sparse).at(1) > optimal_rho(sparse).at(0));
}
