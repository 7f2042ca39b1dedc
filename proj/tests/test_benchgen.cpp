#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lipirm/benchgen.hpp"

using namespace lipirm;

namespace {

Regression1DConfig one_domain(DensityFamily density, double noise, std::size_t n) {
  Regression1DConfig c;
  c.domains.push_back({density, NoiseProfile{NoiseProfile::Kind::Constant, noise, 0.0, {}}, n});
  return c;
}

std::vector<double> xs(const DomainDataset &d) {
  std::vector<double> v(d.features.begin(), d.features.end());
  std::sort(v.begin(), v.end());
  return v;
}

double cov(const DomainDataset &d, std::size_t col) {
  double mz = 0.0, my = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    mz += d.row(i)[col];
    my += d.labels[i];
  }
  mz /= d.size();
  my /= d.size();
  double c = 0.0, vz = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    c += (d.row(i)[col] - mz) * (d.labels[i] - my);
    vz += (d.row(i)[col] - mz) * (d.row(i)[col] - mz);
    vy += (d.labels[i] - my) * (d.labels[i] - my);
  }
  return c / std::sqrt(vz * vy);
}

std::size_t count_group(const DomainDataset &d, int g) {
  return static_cast<std::size_t>(std::count(d.groups.begin(), d.groups.end(), g));
}

} // namespace

TEST_CASE("density families") {
  DensityFamily skew{DensityFamily::Kind::Skew, 3.0};
  CHECK(skew.pdf(0.0) == doctest::Approx(4.0));
  CHECK(skew.pdf(1.0) == doctest::Approx(0.0));
  for (double u : {0.1, 0.5, 0.9})
    CHECK(1.0 - std::pow(1.0 - skew.inverse_cdf(u), 4.0) == doctest::Approx(u));

  const auto uni = gen_regression_1d(one_domain({}, 0.1, 2000)).data[0];
  const auto v = xs(uni);
  double ks = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    ks = std::max({ks, std::abs(v[i] - double(i) / v.size()), std::abs(v[i] - double(i + 1) / v.size())});
  CHECK(ks < 0.05);

  const auto sk = gen_regression_1d(one_domain(skew, 0.1, 4000)).data[0];
  double m = 0.0;
  for (double x : sk.features)
    m += x;
  m /= sk.size();
  // E x = 1/5, E x^2 = 1/15
  const double se = std::sqrt((1.0 / 15.0 - 1.0 / 25.0) / sk.size());
  CHECK(std::abs(m - 0.2) < 3.0 * se);
}

TEST_CASE("noise profiles and truths") {
  NoiseProfile lin{NoiseProfile::Kind::Linear, 0.1, 0.5, {}};
  CHECK(lin(0.5) == doctest::Approx(0.3));
  NoiseProfile pw{NoiseProfile::Kind::Piecewise, 0, 0, {1.0, 2.0, 3.0}};
  CHECK(pw(0.1) == 1.0);
  CHECK(pw(0.5) == 2.0);
  CHECK(pw(1.0) == 3.0);
  TruthSpec t;
  t.kind = TruthSpec::Kind::Cosine;
  t.amplitude = 2.0;
  t.frequency = 0.5;
  t.offset = 1.0;
  CHECK(t.value(0.0) == doctest::Approx(3.0));
  CHECK(t.value(1.0) == doctest::Approx(-1.0));
  CHECK(t.second(0.0) == doctest::Approx(-2.0 * std::numbers::pi * std::numbers::pi));
  CHECK(t.first(0.5) == doctest::Approx(-2.0 * std::numbers::pi));
}

TEST_CASE("noise-free regression reproduces the truth") {
  auto c = one_domain({}, 0.0, 300);
  c.truth.kind = TruthSpec::Kind::Sine;
  const auto d = gen_regression_1d(c).data[0];
  for (std::size_t i = 0; i < d.size(); ++i)
    CHECK(d.labels[i] == c.truth.value(d.row(i)[0]));
  CHECK_THROWS_AS(gen_regression_1d(Regression1DConfig{}), std::invalid_argument);
  c.domains[0].n = 0;
  CHECK_THROWS_AS(gen_regression_1d(c), std::invalid_argument);
}

TEST_CASE("confounded regression") {
  ConfounderConfig c;
  c.train_alpha = {0.0};
  c.n_per_domain = 50;
  c.seed = 3;
  const auto zero = gen_confounded_regression(c);
  // with alpha = 0 every confounder is an exact multiple of y
  const auto &d = zero.train[0];
  for (std::size_t j = c.base_dim; j < d.dim; ++j) {
    const double w = d.row(0)[j] / d.labels[0];
    for (std::size_t i = 0; i < d.size(); ++i)
      CHECK(d.row(i)[j] == doctest::Approx(w * d.labels[i]));
  }

  ConfounderConfig full;
  full.seed = 3;
  const auto b = gen_confounded_regression(full);
  CHECK(b.train.size() == 3);
  CHECK(b.validation.size() == 1);
  CHECK(b.test.size() == 4);
  CHECK(b.test.back().domain_id == 7);
  const double train_corr = std::abs(cov(b.train[0], full.base_dim));
  const double test_corr = std::abs(cov(b.test.back(), full.base_dim));
  CHECK(test_corr / train_corr < 0.5);

  // least squares on one confounder column; the shift error follows from
  // y ~ (1 - c w) y - c alpha v
  ConfounderConfig one = full;
  one.train_alpha = {0.0};
  const double w = gen_confounded_regression(one).train[0].row(0)[full.base_dim] /
                   gen_confounded_regression(one).train[0].labels[0];
  const auto &tr = b.train[0];
  double szz = 0.0, szy = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    szz += tr.row(i)[full.base_dim] * tr.row(i)[full.base_dim];
    szy += tr.row(i)[full.base_dim] * tr.labels[i];
  }
  const double coef = szy / szz;
  const auto &te = b.test.back();
  double err = 0.0, vy = 0.0;
  for (std::size_t i = 0; i < te.size(); ++i) {
    err += std::pow(te.labels[i] - coef * te.row(i)[full.base_dim], 2);
    vy += te.labels[i] * te.labels[i];
  }
  err /= te.size();
  vy /= te.size();
  const double alpha = full.test_alpha.back();
  CHECK(err == doctest::Approx((1 - coef * w) * (1 - coef * w) * vy + coef * coef * alpha * alpha).epsilon(0.15));
}

TEST_CASE("two-bit generator") {
  TwoBitConfig plain;
  plain.seed = 9;
  const auto base = gen_two_bit(plain);
  CHECK(base.train.size() == 3);
  CHECK(base.test.size() == 4);
  CHECK(base.train[0].groups.size() == base.train[0].size());

  SUBCASE("inert corruption keeps the clean draw") {
    auto c = plain;
    c.apply_preset(TwoBitPreset::Setting13);
    c.keep_probability = 1.0;
    c.flip_probability = 0.0;
    const auto b = gen_two_bit(c);
    for (std::size_t e = 0; e < 3; ++e) {
      CHECK(b.train[e].features == base.train[e].features);
      CHECK(b.train[e].labels == base.train[e].labels);
    }
  }

  SUBCASE("setting1 thins groups 0-2 of the last domain") {
    auto c = plain;
    c.n_train = 5000;
    c.apply_preset(TwoBitPreset::Setting1);
    const auto b = gen_two_bit(c);
    const auto &bad = b.train[2];
    for (int g : {0, 1, 2})
      CHECK(count_group(bad, g) < 0.02 * 5000);
    CHECK(count_group(bad, 3) > 0.08 * 5000);
    CHECK(b.train[0].size() == 5000);
  }

  SUBCASE("presets") {
    TwoBitConfig c;
    c.apply_preset(TwoBitPreset::Setting7);
    CHECK(c.targets == std::set<std::pair<int, int>>{{0, 0}, {0, 1}, {0, 2}});
    c.apply_preset(TwoBitPreset::Setting13);
    CHECK(c.targets.size() == 5);
    CHECK(preset_from_string(to_string(TwoBitPreset::Setting13)) == TwoBitPreset::Setting13);
    CHECK_THROWS(preset_from_string("setting2"));
  }

  SUBCASE("errors") {
    auto c = plain;
    c.n_train = 3;
    c.targets = {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}, {6, 0}, {7, 0}, {8, 0}, {9, 0}};
    c.keep_probability = 0.0;
    CHECK_THROWS_WITH(gen_two_bit(c), "corruption emptied domain 0");
    c.targets = {{0, 5}};
    CHECK_THROWS(gen_two_bit(c));
    auto p = plain;
    p.causal_flip = 1.5;
    CHECK_THROWS(gen_two_bit(p));
  }

  SUBCASE("determinism") {
    const auto again = gen_two_bit(plain);
    CHECK(again.test[3].labels == base.test[3].labels);
    auto other = plain;
    other.seed = 10;
    CHECK(gen_two_bit(other).train[0].labels != base.train[0].labels);
  }
}
