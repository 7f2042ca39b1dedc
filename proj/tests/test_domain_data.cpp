#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lipirm/domain_data.hpp"
#include "lipirm/numerics.hpp"

using namespace lipirm;

namespace {

DatasetCollection uniform_domains(int domains, int n, std::uint64_t seed) {
  DatasetCollection out;
  for (int e = 0; e < domains; ++e) {
    Rng rng = make_rng(seed, "tests.uniform", static_cast<std::uint64_t>(e));
    DomainDataset d;
    d.domain_id = e;
    d.dim = 1;
    for (int i = 0; i < n; ++i) {
      const double x[1] = {uniform01(rng)};
      d.add(x, 2.0 * x[0]);
    }
    out.push_back(d);
  }
  return out;
}

} // namespace

TEST_CASE("equal-width bins match an independent histogram") {
  const auto data = uniform_domains(2, 100, 3);
  const auto g = group_by_bins(data, 0, 10, std::make_pair(0.0, 1.0));
  const auto st = estimate_density(data, g);
  CHECK(g.k_count <= 20);
  double total = 0.0;
  for (std::size_t e = 0; e < 2; ++e) {
    int hist[10] = {};
    for (std::size_t i = 0; i < data[e].size(); ++i)
      ++hist[std::min(9, static_cast<int>(data[e].row(i)[0] * 10))];
    for (int b = 0, k = 0; b < 10; ++b) {
      if (hist[b] == 0)
        continue;
      // group ids are dense in bin order within a domain
      while (k < g.k_count && g.group_domain[static_cast<std::size_t>(k)] != static_cast<int>(e))
        ++k;
      CHECK(st.r_hat_at(e, k) == doctest::Approx(hist[b] / 100.0));
      total += st.r_hat_at(e, k);
      ++k;
    }
  }
  CHECK(total == doctest::Approx(2.0));
}

TEST_CASE("group counts sum to domain sizes and the indicator marks present groups") {
  const auto data = uniform_domains(3, 57, 9);
  const auto g = group_by_bins(data, 0, 4);
  const auto st = estimate_density(data, g);
  for (std::size_t e = 0; e < 3; ++e) {
    std::size_t c = 0;
    for (int k = 0; k < g.k_count; ++k) {
      c += st.count_at(e, k);
      CHECK(st.present(e, k) == (st.count_at(e, k) > 0));
    }
    CHECK(c == 57);
  }
}

TEST_CASE("noise variance of a perfect predictor is zero; of the zero predictor is E[y^2]") {
  const auto data = uniform_domains(1, 200, 1);
  const auto g = group_by_bins(data, 0, 1);
  auto st = estimate_density(data, g);
  estimate_noise_variance(data, g, [](std::span<const double> x) { return 2.0 * x[0]; }, st);
  CHECK(st.sigma2_at(0, 0) == doctest::Approx(0.0));
  estimate_noise_variance(data, g, [](std::span<const double>) { return 0.0; }, st);
  double m = 0.0;
  for (double y : data[0].labels)
    m += y * y / 200.0;
  CHECK(st.sigma2_at(0, 0) == doctest::Approx(m));
}

TEST_CASE("label and provided groupings") {
  DomainDataset d;
  d.domain_id = 4;
  d.dim = 1;
  d.kind = LabelKind::Classification;
  for (int i = 0; i < 6; ++i) {
    const double x[1] = {double(i)};
    d.add(x, i % 2, i / 2);
  }
  const auto byl = group_by_label({d});
  CHECK(byl.k_count == 2);
  const auto byp = group_by_provided({d});
  CHECK(byp.k_count == 3);
  CHECK(byp.group_of(0, 5) == 2);
  DomainDataset r = d;
  r.labels[0] = 0.5;
  CHECK_THROWS_AS(group_by_label({r}), std::invalid_argument);
}

TEST_CASE("csv round trip keeps domains, labels and groups") {
  DomainDataset a;
  a.domain_id = 0;
  a.dim = 2;
  const double x0[2] = {0.25, -1.5}, x1[2] = {3.0, 4.0};
  a.add(x0, 1.0, 7);
  a.add(x1, 0.0, 8);
  DomainDataset b = a;
  b.domain_id = 1;
  std::stringstream s;
  write_csv(s, {a, b});
  const auto back = read_csv(s, LabelKind::Classification);
  REQUIRE(back.size() == 2);
  CHECK(back[1].domain_id == 1);
  CHECK(back[0].features == a.features);
  CHECK(back[0].groups == a.groups);
  CHECK(back[0].labels == a.labels);
}

TEST_CASE("malformed input is rejected") {
  std::stringstream bad("x0,y\n1,2\n");
  CHECK_THROWS_AS(read_csv(bad, LabelKind::Regression), std::invalid_argument);
  DomainDataset d;
  d.dim = 2;
  const double x[1] = {1.0};
  CHECK_THROWS_AS(d.add(x, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  CHECK_THROWS_AS(group_by_bins(uniform_domains(1, 5, 0), 3, 2), std::invalid_argument);
}
