#include "lipirm/benchgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lipirm/numerics.hpp"

namespace lipirm {

double DensityFamily::pdf(double x) const {
  if (x < 0.0 || x > 1.0)
    return 0.0;
  if (kind == Kind::Uniform)
    return 1.0;
  return (k + 1.0) * std::pow(1.0 - x, k);
}

double DensityFamily::inverse_cdf(double u) const {
  if (kind == Kind::Uniform)
    return u;
  // CDF = 1 - (1-x)^(k+1)
  return 1.0 - std::pow(1.0 - u, 1.0 / (k + 1.0));
}

double NoiseProfile::operator()(double x) const {
  switch (kind) {
  case Kind::Constant:
    return a;
  case Kind::Linear:
    return a + (b - a) * x;
  case Kind::Piecewise: {
    if (levels.empty())
      throw std::invalid_argument("piecewise noise needs levels");
    const int K = static_cast<int>(levels.size());
    const int k = std::clamp(static_cast<int>(std::floor(x * K)), 0, K - 1);
    return levels[static_cast<std::size_t>(k)];
  }
  }
  return a;
}

double TruthSpec::value(double x) const {
  const double w = 2.0 * std::numbers::pi * frequency;
  switch (kind) {
  case Kind::Sine:
    return amplitude * std::sin(w * x) + offset;
  case Kind::Cosine:
    return amplitude * std::cos(w * x) + offset;
  case Kind::Quadratic:
    return amplitude * x * x + offset;
  case Kind::Linear:
    return amplitude * x + offset;
  case Kind::Constant:
    return offset;
  }
  return offset;
}

double TruthSpec::first(double x) const {
  const double w = 2.0 * std::numbers::pi * frequency;
  switch (kind) {
  case Kind::Sine:
    return amplitude * w * std::cos(w * x);
  case Kind::Cosine:
    return -amplitude * w * std::sin(w * x);
  case Kind::Quadratic:
    return 2.0 * amplitude * x;
  case Kind::Linear:
    return amplitude;
  case Kind::Constant:
    return 0.0;
  }
  return 0.0;
}

double TruthSpec::second(double x) const {
  const double w = 2.0 * std::numbers::pi * frequency;
  switch (kind) {
  case Kind::Sine:
    return -amplitude * w * w * std::sin(w * x);
  case Kind::Cosine:
    return -amplitude * w * w * std::cos(w * x);
  case Kind::Quadratic:
    return 2.0 * amplitude;
  case Kind::Linear:
  case Kind::Constant:
    return 0.0;
  }
  return 0.0;
}

TheorySetting theory_setting(const Regression1DConfig &config) {
  TheorySetting s;
  const TruthSpec truth = config.truth;
  s.f_star = [truth](double x) { return truth.value(x); };
  s.f_prime = [truth](double x) { return truth.first(x); };
  s.f_second = [truth](double x) { return truth.second(x); };
  s.k_count = config.k_count;
  for (std::size_t e = 0; e < config.domains.size(); ++e) {
    const auto dom = config.domains[e];
    TheoryDomain td;
    td.domain_id = static_cast<int>(e);
    td.n_samples = dom.n;
    td.density = [dom](double x) { return dom.density.pdf(x); };
    td.sigma = [dom](double x) { return dom.noise(x); };
    s.domains.push_back(std::move(td));
  }
  return s;
}

Regression1DResult gen_regression_1d(const Regression1DConfig &config) {
  if (config.domains.empty())
    throw std::invalid_argument("regression benchmark needs at least one domain");
  Regression1DResult out;
  out.setting = theory_setting(config);
  for (std::size_t e = 0; e < config.domains.size(); ++e) {
    const auto &dom = config.domains[e];
    if (dom.n == 0)
      throw std::invalid_argument("empty domain");
    Rng xr = make_rng(config.seed, "reg1d.x", e);
    Rng nr = make_rng(config.seed, "reg1d.noise", e);
    DomainDataset d;
    d.domain_id = static_cast<int>(e);
    d.dim = 1;
    d.kind = LabelKind::Regression;
    d.features.reserve(dom.n);
    d.labels.reserve(dom.n);
    for (std::size_t i = 0; i < dom.n; ++i) {
      const double x = std::clamp(dom.density.inverse_cdf(uniform01(xr)), 0.0, 1.0);
      const double y = config.truth.value(x) + dom.noise(x) * standard_normal(nr);
      const double row[1] = {x};
      d.add(row, y);
    }
    out.data.push_back(std::move(d));
  }
  return out;
}

DatasetBundle gen_confounded_regression(const ConfounderConfig &c) {
  if (c.train_alpha.empty())
    throw std::invalid_argument("confounded regression needs training domains");
  for (double a : c.train_alpha)
    if (a < 0.0)
      throw std::invalid_argument("alpha must be non-negative");
  Rng shared = make_rng(c.seed, "confound.shared");
  std::vector<double> beta(c.base_dim), w(c.confounder_dim);
  for (auto &b : beta)
    b = standard_normal(shared);
  for (auto &v : w)
    v = standard_normal(shared);

  const std::size_t dim = c.base_dim + c.confounder_dim;
  auto make = [&](double alpha, int id, std::string_view stage) {
    Rng rng = make_rng(c.seed, stage, static_cast<std::uint64_t>(id));
    DomainDataset d;
    d.domain_id = id;
    d.dim = dim;
    d.kind = LabelKind::Regression;
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < c.n_per_domain; ++i) {
      double y = 0.0;
      for (std::size_t j = 0; j < c.base_dim; ++j) {
        row[j] = standard_normal(rng);
        y += beta[j] * row[j];
      }
      y += c.label_noise * standard_normal(rng);
      for (std::size_t j = 0; j < c.confounder_dim; ++j)
        row[c.base_dim + j] = w[j] * y + alpha * standard_normal(rng);
      d.add(row, y);
    }
    return d;
  };

  DatasetBundle b;
  b.name = "confounded";
  b.kind = LabelKind::Regression;
  int id = 0;
  for (double a : c.train_alpha)
    b.train.push_back(make(a, id++, "confound.train"));
  b.validation.push_back(make(c.validation_alpha, id++, "confound.validation"));
  for (double a : c.test_alpha)
    b.test.push_back(make(a, id++, "confound.test"));
  return b;
}

void TwoBitConfig::apply_preset(TwoBitPreset preset) {
  targets.clear();
  const int train_domains = static_cast<int>(train_p.size());
  const bool bad_domain = preset == TwoBitPreset::Setting1 || preset == TwoBitPreset::Setting13;
  const bool bad_group = preset == TwoBitPreset::Setting7 || preset == TwoBitPreset::Setting13;
  if (bad_domain) {
    if (train_domains < 3)
      throw std::invalid_argument("the bad-domain preset needs three training domains");
    for (int g : {0, 1, 2})
      targets.insert({g, 2});
  }
  if (bad_group)
    for (int e = 0; e < train_domains; ++e)
      targets.insert({0, e});
}

TwoBitPreset preset_from_string(const std::string &name) {
  if (name == "setting1")
    return TwoBitPreset::Setting1;
  if (name == "setting7")
    return TwoBitPreset::Setting7;
  if (name == "setting13")
    return TwoBitPreset::Setting13;
  if (name == "none" || name.empty())
    return TwoBitPreset::None;
  throw std::invalid_argument("unknown preset '" + name + "'");
}

std::string to_string(TwoBitPreset preset) {
  switch (preset) {
  case TwoBitPreset::Setting1:
    return "setting1";
  case TwoBitPreset::Setting7:
    return "setting7";
  case TwoBitPreset::Setting13:
    return "setting13";
  case TwoBitPreset::None:
    break;
  }
  return "none";
}

namespace {

void check_probability(double p, const char *what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument(std::string(what) + " must lie in [0,1]");
}

DomainDataset two_bit_domain(const TwoBitConfig &c, int id, double p, std::size_t n,
                             const std::set<int> &targeted_groups) {
  Rng base = make_rng(c.seed, "twobit.base", static_cast<std::uint64_t>(id));
  Rng corrupt = make_rng(c.seed, "twobit.corrupt", static_cast<std::uint64_t>(id));
  std::uniform_int_distribution<int> digit(0, 9);
  DomainDataset d;
  d.domain_id = id;
  d.dim = 2;
  d.kind = LabelKind::Classification;
  for (std::size_t i = 0; i < n; ++i) {
    const int g = digit(base);
    int y = g >= 5 ? 1 : 0;
    if (bernoulli(base, c.causal_flip))
      y = 1 - y;
    int color = y;
    if (bernoulli(base, p))
      color = 1 - color;
    if (targeted_groups.count(g)) {
      const bool keep = bernoulli(corrupt, c.keep_probability);
      const bool flip = bernoulli(corrupt, c.flip_probability);
      if (!keep)
        continue;
      if (flip)
        y = 1 - y;
    }
    const double row[2] = {static_cast<double>(g) / 9.0, static_cast<double>(color)};
    d.add(row, static_cast<double>(y), g);
  }
  if (d.size() == 0)
    throw std::invalid_argument("corruption emptied domain " + std::to_string(id));
  return d;
}

} // namespace

DatasetBundle gen_two_bit(const TwoBitConfig &c) {
  check_probability(c.causal_flip, "causal_flip");
  check_probability(c.keep_probability, "keep_probability");
  check_probability(c.flip_probability, "flip_probability");
  for (double p : c.train_p)
    check_probability(p, "train_p");
  for (double p : c.test_p)
    check_probability(p, "test_p");
  if (c.train_p.empty())
    throw std::invalid_argument("two-bit benchmark needs training domains");
  for (const auto &[g, e] : c.targets)
    if (g < 0 || g > 9 || e < 0 || e >= static_cast<int>(c.train_p.size()))
      throw std::invalid_argument("corruption target out of range");

  DatasetBundle b;
  b.name = "two_bit";
  b.kind = LabelKind::Classification;
  int id = 0;
  for (std::size_t e = 0; e < c.train_p.size(); ++e, ++id) {
    std::set<int> groups;
    for (const auto &[g, te] : c.targets)
      if (te == static_cast<int>(e))
        groups.insert(g);
    b.train.push_back(two_bit_domain(c, id, c.train_p[e], c.n_train, groups));
  }
  for (double p : c.test_p)
    b.test.push_back(two_bit_domain(c, id++, p, c.n_test, {}));
  return b;
}

nlohmann::json to_json(const TwoBitConfig &c) {
  nlohmann::json t = nlohmann::json::array();
  for (const auto &[g, e] : c.targets)
    t.push_back({g, e});
  return {{"causal_flip", c.causal_flip}, {"train_p", c.train_p},
          {"test_p", c.test_p},           {"n_train", c.n_train},
          {"n_test", c.n_test},           {"targets", t},
          {"keep_probability", c.keep_probability},
          {"flip_probability", c.flip_probability},
          {"seed", c.seed}};
}

nlohmann::json to_json(const ConfounderConfig &c) {
  return {{"base_dim", c.base_dim},         {"confounder_dim", c.confounder_dim},
          {"train_alpha", c.train_alpha},   {"validation_alpha", c.validation_alpha},
          {"test_alpha", c.test_alpha},     {"n_per_domain", c.n_per_domain},
          {"label_noise", c.label_noise},   {"seed", c.seed}};
}

} // namespace lipirm
