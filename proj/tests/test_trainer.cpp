#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lipirm/benchgen.hpp"
#include "lipirm/trainer.hpp"

using namespace lipirm;

namespace {

DatasetBundle small_two_bit(std::uint64_t seed) {
  TwoBitConfig c;
  c.n_train = 200;
  c.n_test = 200;
  c.seed = seed;
  c.apply_preset(TwoBitPreset::Setting1);
  return gen_two_bit(c);
}

TrainConfig quick(std::uint64_t seed) {
  TrainConfig c;
  c.hidden = {8};
  c.epochs = 30;
  c.optimizer = OptimizerKind::Adam;
  c.seed = seed;
  return c;
}

double gradient_error(const LossSpec &spec, const DatasetCollection &data, const MlpModel &model) {
  std::vector<double> g, scratch;
  lipirm_loss_and_grad(model, data, spec, g);
  double worst = 0.0;
  for (std::size_t k = 0; k < model.params.size(); ++k) {
    MlpModel m = model;
    m.params[k] += 1e-6;
    const double up = lipirm_loss_and_grad(m, data, spec, scratch).total;
    m.params[k] -= 2e-6;
    const double dn = lipirm_loss_and_grad(m, data, spec, scratch).total;
    const double fd = (up - dn) / 2e-6;
    worst = std::max(worst, std::abs(fd - g[k]) / std::max({std::abs(fd), std::abs(g[k]), 1e-6}));
  }
  return worst;
}

} // namespace

TEST_CASE("method names round trip") {
  for (auto m : {Method::ErmL2, Method::ErmLip, Method::IrmL2, Method::IrmLip, Method::Rpo,
                 Method::RpoLip, Method::RpoPen})
    CHECK(method_from_string(to_string(m)) == m);
  CHECK_THROWS(method_from_string("dann"));
  CHECK(is_rpo(Method::RpoPen));
  CHECK_FALSE(is_rpo(Method::IrmLip));
}

TEST_CASE("training config rejects unknown keys and bad values") {
  const auto c = train_config_from_json({{"epochs", 5}, {"optimizer", "adam"}, {"hidden", {4, 4}}});
  CHECK(c.epochs == 5);
  CHECK(c.optimizer == OptimizerKind::Adam);
  CHECK_THROWS_WITH(train_config_from_json({{"epoch", 5}}), "unknown training key 'epoch'");
  CHECK_THROWS(train_config_from_json({{"learning_rate", -1.0}}));
  CHECK_THROWS(train_config_from_json({{"optimizer", "sgd"}}));
  const auto back = train_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("loss terms on a hand-checked case") {
  MlpModel m;
  m.layer_sizes = {1, 1};
  m.params = {2.0, 0.5};  // f = 2x + 0.5
  DomainDataset d;
  d.dim = 1;
  const double x0[1] = {0.0}, x1[1] = {1.0};
  d.add(x0, 1.0);
  d.add(x1, 2.0);
  LossSpec spec;
  spec.lambda = 0.1;
  spec.eta = {{0, 3.0}};
  spec.fd_steps = {1e-3};
  std::vector<double> g;
  const auto t = lipirm_loss_and_grad(m, {d}, spec, g);
  // residuals -0.5, 0.5: erm 0.25; q = mean 2 f r = (2*0.5*-0.5 + 2*2.5*0.5)/2 = 1
  CHECK(t.erm == doctest::Approx(0.25));
  CHECK(t.irm == doctest::Approx(3.0));
  CHECK(t.lipschitz == doctest::Approx(0.1 * 4.0));
  CHECK(t.total == doctest::Approx(0.25 + 3.0 + 0.4));
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng = make_rng(7, "tests.trainer.grad");
  DatasetCollection data;
  for (int e = 0; e < 2; ++e) {
    DomainDataset d;
    d.domain_id = e;
    d.dim = 2;
    d.kind = LabelKind::Classification;
    for (int i = 0; i < 6; ++i) {
      const double x[2] = {standard_normal(rng), standard_normal(rng)};
      d.add(x, bernoulli(rng, 0.5) ? 1.0 : 0.0);
    }
    data.push_back(d);
  }
  // a linear model has no kinks
  auto m = MlpModel::create({2, 1}, LabelKind::Classification, rng);
  LossSpec spec;
  spec.lambda = 0.2;
  spec.eta = {{0, 1.5}, {1, 0.5}};
  spec.fd_steps = {1e-3, 1e-3};
  spec.sample_rho = {std::vector<double>(6, 2.0), std::vector<double>(6, 0.5)};
  CHECK(gradient_error(spec, data, m) < 1e-6);
  spec.lipschitz = false;
  spec.l2_weight = 0.3;
  CHECK(gradient_error(spec, data, m) < 1e-6);
}

TEST_CASE("minibatches cover the requested indices only") {
  const auto b = small_two_bit(1);
  Rng rng = make_rng(0, "tests.trainer.batch");
  auto m = MlpModel::create({2, 4, 1}, LabelKind::Classification, rng);
  LossSpec spec;
  spec.eta = {{0, 1.0}, {1, 1.0}, {2, 1.0}};
  std::vector<std::vector<std::size_t>> batch(b.train.size());
  DatasetCollection sub = b.train;
  for (std::size_t p = 0; p < b.train.size(); ++p) {
    batch[p] = {0, 3, 5};
    DomainDataset d;
    d.domain_id = b.train[p].domain_id;
    d.dim = 2;
    d.kind = LabelKind::Classification;
    for (std::size_t i : batch[p])
      d.add(b.train[p].row(i), b.train[p].labels[i]);
    sub[p] = d;
  }
  std::vector<double> g1, g2;
  const auto a = lipirm_loss_and_grad(m, b.train, spec, g1, batch);
  const auto c = lipirm_loss_and_grad(m, sub, spec, g2);
  CHECK(a.total == doctest::Approx(c.total));
  for (std::size_t k = 0; k < g1.size(); ++k)
    CHECK(g1[k] == doctest::Approx(g2[k]));
}

TEST_CASE("standardizer") {
  const auto b = small_two_bit(2);
  const auto st = Standardizer::fit(b.train, true);
  const auto z = st.apply(b.train);
  double mean = 0.0, sq = 0.0, n = 0.0;
  for (const auto &d : z)
    for (std::size_t i = 0; i < d.size(); ++i) {
      mean += d.row(i)[0];
      sq += d.row(i)[0] * d.row(i)[0];
      n += 1.0;
    }
  CHECK(mean / n == doctest::Approx(0.0).scale(1.0));
  CHECK(sq / n == doctest::Approx(1.0));
  const auto off = Standardizer::fit(b.train, false);
  CHECK(off.apply(b.train)[0].features == b.train[0].features);
}

TEST_CASE("phase one produces penalties for every domain and group") {
  const auto b = small_two_bit(3);
  const auto p = run_phase_one(b, quick(3));
  CHECK(p.optimized.eta.size() == 3);
  CHECK(static_cast<int>(p.optimized.rho.size()) == p.grouping.k_count);
  CHECK(p.optimized.lambda == doctest::Approx(optimal_lambda(p.stats.domain_sizes)));
  CHECK(p.loss_trace.size() == 30);
  CHECK(p.seed == derive_seed(3, "aux"));
}

TEST_CASE("training is deterministic and ablations keep the uniform half") {
  const auto b = small_two_bit(4);
  const auto cfg = quick(4);
  const auto p = run_phase_one(b, cfg);
  const auto r1 = train(Method::Rpo, b, cfg, &p);
  const auto r2 = train(Method::Rpo, b, cfg);
  CHECK(r1.metrics == r2.metrics);
  CHECK(r1.model.params == r2.model.params);
  const auto lip = train(Method::RpoLip, b, cfg, &p);
  CHECK(lip.scheme.eta == p.uniform.eta);
  CHECK(lip.scheme.rho == p.optimized.rho);
  const auto pen = train(Method::RpoPen, b, cfg, &p);
  CHECK(pen.scheme.rho == p.uniform.rho);
  CHECK(pen.scheme.eta == p.optimized.eta);
  auto forced = cfg;
  forced.force_uniform_phase2 = true;
  const auto f = train(Method::Rpo, b, forced, &p);
  const auto irm = train(Method::IrmLip, b, forced);
  CHECK(f.metrics == irm.metrics);
  CHECK(r1.metrics.count("acc"));
  CHECK(r1.metrics.count("train_auc"));
}

TEST_CASE("run records and leaderboard rows") {
  const auto b = small_two_bit(5);
  auto run = train(Method::ErmL2, b, quick(5));
  run.setting = "setting1";
  const auto back = run_from_json(to_json(run));
  CHECK(back.metrics == run.metrics);
  CHECK(back.method == "erm_l2");
  std::ostringstream s;
  write_leaderboard_header(s);
  append_leaderboard(s, run);
  std::string line;
  std::istringstream in(s.str());
  int rows = -1;
  while (std::getline(in, line))
    ++rows;
  CHECK(rows == static_cast<int>(run.metrics.size()));
  CHECK(s.str().find("erm_l2,5,setting1,acc,") != std::string::npos);
}
