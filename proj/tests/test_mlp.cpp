#include <doctest.h>

#include <cmath>

#include "lipirm/mlp.hpp"

using namespace lipirm;

TEST_CASE("parameter layout") {
  const std::vector<std::size_t> sizes{3, 5, 2, 1};
  CHECK(MlpModel::param_count(sizes) == 3 * 5 + 5 + 5 * 2 + 2 + 2 + 1);
  Rng rng = make_rng(0, "tests.mlp");
  const auto m = MlpModel::create(sizes, LabelKind::Regression, rng);
  CHECK(m.weight_offset(0) == 0);
  CHECK(m.weight_offset(1) == 20);
  CHECK(m.weight_offset(2) == 32);
  // biases start at zero
  for (std::size_t k = 15; k < 20; ++k)
    CHECK(m.params[k] == 0.0);
  CHECK_THROWS_AS(MlpModel::create({3}, LabelKind::Regression, rng), std::invalid_argument);
}

TEST_CASE("forward pass of a hand-built network") {
  MlpModel m;
  m.layer_sizes = {2, 2, 1};
  // hidden: relu(x0 - x1), relu(x0 + x1 - 1); output 2 h0 - h1 + 0.5
  m.params = {1, -1, 1, 1, 0, -1, 2, -1, 0.5};
  const double a[2] = {3.0, 1.0};
  CHECK(forward(m, a) == doctest::Approx(2 * 2 - 3 + 0.5));
  const double b[2] = {0.0, 0.5};
  CHECK(forward(m, b) == doctest::Approx(0.5));
  m.kind = LabelKind::Classification;
  CHECK(predict(m, b) == doctest::Approx(1.0 / (1.0 + std::exp(-0.5))));
  const double bad[3] = {1, 2, 3};
  CHECK_THROWS_AS(forward(m, bad), std::invalid_argument);
}

TEST_CASE("backward matches finite differences of the output") {
  Rng rng = make_rng(1, "tests.mlp.grad");
  auto m = MlpModel::create({3, 6, 4, 1}, LabelKind::Regression, rng);
  for (auto &p : m.params)
    p += 0.1 * standard_normal(rng);
  const double x[3] = {0.3, -1.2, 0.7};
  ForwardCache cache;
  forward(m, x, cache);
  std::vector<double> g(m.params.size(), 0.0);
  backward(m, cache, 1.0, g);
  for (std::size_t k = 0; k < m.params.size(); ++k) {
    auto p = m;
    p.params[k] += 1e-6;
    const double up = forward(p, x);
    p.params[k] -= 2e-6;
    const double dn = forward(p, x);
    CHECK(g[k] == doctest::Approx((up - dn) / 2e-6).epsilon(1e-5).scale(1.0));
  }
  // accumulation
  backward(m, cache, 2.0, g);
  std::vector<double> g3(m.params.size(), 0.0);
  backward(m, cache, 3.0, g3);
  for (std::size_t k = 0; k < g.size(); ++k)
    CHECK(g[k] == doctest::Approx(g3[k]));
}

TEST_CASE("JSON round trip") {
  Rng rng = make_rng(2, "tests.mlp.json");
  const auto m = MlpModel::create({2, 3, 1}, LabelKind::Classification, rng);
  const auto back = model_from_json(to_json(m));
  CHECK(back.layer_sizes == m.layer_sizes);
  CHECK(back.params == m.params);
  CHECK(back.kind == m.kind);
  auto j = to_json(m);
  j["params"].erase(0);
  CHECK_THROWS_AS(model_from_json(j), std::invalid_argument);
}
