#include <doctest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lipirm/grid.hpp"
#include "lipirm/numerics.hpp"

using namespace lipirm;

TEST_CASE("tridiagonal solve agrees with dense elimination") {
  Rng rng = make_rng(5, "tests.tridiag");
  const std::size_t n = 17;
  std::vector<double> lo(n), di(n), up(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = standard_normal(rng);
    up[i] = standard_normal(rng);
    di[i] = 4.0 + uniform01(rng);
    rhs[i] = standard_normal(rng);
  }
  std::vector<double> dense(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    dense[i * n + i] = di[i];
    if (i > 0)
      dense[i * n + i - 1] = lo[i];
    if (i + 1 < n)
      dense[i * n + i + 1] = up[i];
  }
  const auto a = solve_tridiagonal(lo, di, up, rhs);
  const auto b = solve_dense(dense, rhs);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
  const auto back = tridiagonal_apply(lo, di, up, a);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(back[i] == doctest::Approx(rhs[i]).epsilon(1e-12));
}

TEST_CASE("singular tridiagonal system is reported") {
  const std::vector<double> lo{0, 1}, di{0, 1}, up{1, 0}, rhs{1, 1};
  CHECK_THROWS_AS(solve_tridiagonal(lo, di, up, rhs), NumericalError);
}

TEST_CASE("quadrature") {
  const Grid1D g(11);
  std::vector<double> lin(g.n), sq(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    lin[i] = 3.0 * g.points[i] + 1.0;
    sq[i] = g.points[i] * g.points[i];
  }
  CHECK(trapezoid(lin, g.h) == doctest::Approx(2.5).epsilon(1e-14));
  // trapezoid error for x^2 is h^2/6
  CHECK(trapezoid(sq, g.h) == doctest::Approx(1.0 / 3.0 + g.h * g.h / 6.0).epsilon(1e-14));
  const auto c = cumulative_trapezoid(lin, g.h);
  CHECK(c.front() == 0.0);
  CHECK(c.back() == doctest::Approx(2.5));
}

TEST_CASE("pairwise sum is exact on representable data") {
  std::vector<double> v(1000, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("seed derivation separates stages and indices") {
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
  CHECK(derive_seed(1, "a", 1, 0) != derive_seed(1, "a", 0, 1));
}

TEST_CASE("parallel_for visits every index once and rethrows the first failure") {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits)
    CHECK(h == 1);
  try {
    parallel_for(50, 3, [](std::size_t i) {
      if (i == 7 || i == 30)
        throw std::runtime_error("index " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const std::runtime_error &e) {
    CHECK(std::string(e.what()) == "index 7");
  }
}

TEST_CASE("grid cells and piecewise-linear evaluation") {
  const Grid1D g(5);
  double theta = 0.0;
  CHECK(g.cell_of(0.3, theta) == 1);
  CHECK(theta == doctest::Approx(0.2));
  CHECK(g.cell_of(1.0, theta) == 3);
  CHECK(theta == doctest::Approx(1.0));
  CHECK_THROWS_AS(g.cell_of(1.5, theta), std::domain_error);
  GridFunction f(g, {0, 1, 4, 9, 16});
  CHECK(f(0.375) == doctest::Approx(2.5));
  const auto d = f.derivative();
  CHECK(d[2] == doctest::Approx(16.0));
  CHECK(d[0] == doctest::Approx(4.0));
}
