#include "lipirm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include "lipirm/eval_stats.hpp"
#include "lipirm/numerics.hpp"

namespace lipirm {

namespace {

const std::vector<std::pair<Method, std::string>> kMethodNames = {
    {Method::ErmL2, "erm_l2"},   {Method::ErmLip, "erm_lip"}, {Method::IrmL2, "irm_l2"},
    {Method::IrmLip, "irm_lip"}, {Method::Rpo, "rpo"},        {Method::RpoLip, "rpo_lip"},
    {Method::RpoPen, "rpo_pen"}};

double sigmoid(double f) {
  if (f >= 0.0)
    return 1.0 / (1.0 + std::exp(-f));
  const double e = std::exp(f);
  return e / (1.0 + e);
}

double softplus(double f) { return std::max(f, 0.0) + std::log1p(std::exp(-std::abs(f))); }

struct PointLoss {
  double loss, dloss, q, dq;
};

// Loss, its derivative in f, the IRM inner product q = d/dw loss(w f, y) at
// w = 1 and dq/df.
PointLoss point_loss(LabelKind kind, double f, double y) {
  if (kind == LabelKind::Classification) {
    const double s = sigmoid(f);
    return {softplus(f) - y * f, s - y, (s - y) * f, s * (1.0 - s) * f + s - y};
  }
  const double r = f - y;
  return {r * r, 2.0 * r, 2.0 * f * r, 4.0 * f - 2.0 * y};
}

void check_finite(double v, const char *term) {
  if (!std::isfinite(v))
    throw NumericalError(std::string("non-finite ") + term + " term");
}

double lambda_for(const TrainConfig &config, const DatasetCollection &train) {
  if (config.lambda_mode == LambdaMode::Fixed)
    return config.lambda;
  std::vector<std::size_t> sizes;
  for (const auto &d : train)
    sizes.push_back(d.size());
  return optimal_lambda(sizes);
}

Grouping make_grouping(const DatasetCollection &train, const TrainConfig &config) {
  switch (config.grouping) {
  case GroupingMode::Bins:
    return group_by_bins(train, config.feature_index, config.k_per_domain);
  case GroupingMode::Label:
    return group_by_label(train);
  case GroupingMode::Provided:
    return group_by_provided(train);
  }
  throw std::invalid_argument("unknown grouping mode");
}

std::vector<std::vector<double>> sample_rho(const Grouping &grouping,
                                            const PenaltyScheme &scheme) {
  std::vector<std::vector<double>> out(grouping.assignment.size());
  for (std::size_t p = 0; p < out.size(); ++p)
    for (int k : grouping.assignment[p])
      out[p].push_back(scheme.rho_of(k));
  return out;
}

std::vector<std::size_t> layer_sizes(std::size_t d, const TrainConfig &c) {
  std::vector<std::size_t> s{d};
  s.insert(s.end(), c.hidden.begin(), c.hidden.end());
  s.push_back(1);
  return s;
}

std::vector<double> fd_steps(const TrainConfig &c, const Standardizer &st) {
  std::vector<double> h(st.scale.size());
  // Standardized features have unit scale.
  for (std::size_t j = 0; j < h.size(); ++j)
    h[j] = c.fd_step * (c.standardize ? 1.0 : st.scale[j]);
  return h;
}

std::map<int, double> uniform_eta(const DatasetCollection &train, double value) {
  std::map<int, double> m;
  for (const auto &d : train)
    m[d.domain_id] = value;
  return m;
}

} // namespace

std::string to_string(Method m) {
  for (const auto &[k, v] : kMethodNames)
    if (k == m)
      return v;
  return "unknown";
}

Method method_from_string(const std::string &name) {
  for (const auto &[k, v] : kMethodNames)
    if (v == name)
      return k;
  throw std::invalid_argument("unknown method '" + name + "'");
}

bool is_rpo(Method m) {
  return m == Method::Rpo || m == Method::RpoLip || m == Method::RpoPen;
}

GroupingMode grouping_from_string(const std::string &name) {
  if (name == "bins")
    return GroupingMode::Bins;
  if (name == "label")
    return GroupingMode::Label;
  if (name == "provided")
    return GroupingMode::Provided;
  throw std::invalid_argument("unknown grouping mode '" + name + "'");
}

std::string to_string(GroupingMode g) {
  switch (g) {
  case GroupingMode::Bins:
    return "bins";
  case GroupingMode::Label:
    return "label";
  case GroupingMode::Provided:
    return "provided";
  }
  return "provided";
}

void TrainConfig::validate() const {
  if (epochs < 1)
    throw std::invalid_argument("epochs must be at least 1");
  if (!(learning_rate > 0.0))
    throw std::invalid_argument("learning_rate must be positive");
  if (!(fd_step > 0.0))
    throw std::invalid_argument("fd_step must be positive");
  if (k_per_domain < 1)
    throw std::invalid_argument("k_per_domain must be at least 1");
  if (lambda_mode == LambdaMode::Fixed && !(lambda > 0.0))
    throw std::invalid_argument("fixed lambda must be positive");
  if (eta_uniform < 0.0 || l2_weight < 0.0)
    throw std::invalid_argument("penalty weights must be non-negative");
  for (std::size_t h : hidden)
    if (h == 0)
      throw std::invalid_argument("hidden layer sizes must be positive");
}

nlohmann::json to_json(const TrainConfig &c) {
  return {{"hidden", c.hidden},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"optimizer", c.optimizer == OptimizerKind::Adam ? "adam" : "gd"},
          {"batch_size", c.batch_size},
          {"fd_step", c.fd_step},
          {"standardize", c.standardize},
          {"grouping", to_string(c.grouping)},
          {"k_per_domain", c.k_per_domain},
          {"feature_index", c.feature_index},
          {"rho_floor", c.limits.rho_floor},
          {"eta_cap", c.limits.eta_cap},
          {"lambda_mode", c.lambda_mode == LambdaMode::Prop1 ? "prop1" : "fixed"},
          {"lambda", c.lambda},
          {"eta_uniform", c.eta_uniform},
          {"l2_weight", c.l2_weight},
          {"force_uniform_phase2", c.force_uniform_phase2},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const nlohmann::json &j) {
  static const std::set<std::string> known = {
      "hidden",   "epochs",     "learning_rate", "optimizer",    "batch_size",
      "fd_step",  "standardize", "grouping",     "k_per_domain", "feature_index",
      "rho_floor", "eta_cap",   "lambda_mode",   "lambda",       "eta_uniform",
      "l2_weight", "force_uniform_phase2", "seed"};
  if (!j.is_object())
    throw std::invalid_argument("training config must be an object");
  for (const auto &[k, v] : j.items())
    if (!known.count(k))
      throw std::invalid_argument("unknown training key '" + k + "'");
  TrainConfig c;
  if (j.contains("hidden"))
    c.hidden = j["hidden"].get<std::vector<std::size_t>>();
  if (j.contains("epochs"))
    c.epochs = j["epochs"].get<int>();
  if (j.contains("learning_rate"))
    c.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("optimizer")) {
    const auto o = j["optimizer"].get<std::string>();
    if (o == "adam")
      c.optimizer = OptimizerKind::Adam;
    else if (o == "gd")
      c.optimizer = OptimizerKind::GradientDescent;
    else
      throw std::invalid_argument("optimizer must be 'gd' or 'adam'");
  }
  if (j.contains("batch_size"))
    c.batch_size = j["batch_size"].get<std::size_t>();
  if (j.contains("fd_step"))
    c.fd_step = j["fd_step"].get<double>();
  if (j.contains("standardize"))
    c.standardize = j["standardize"].get<bool>();
  if (j.contains("grouping"))
    c.grouping = grouping_from_string(j["grouping"].get<std::string>());
  if (j.contains("k_per_domain"))
    c.k_per_domain = j["k_per_domain"].get<int>();
  if (j.contains("feature_index"))
    c.feature_index = j["feature_index"].get<std::size_t>();
  if (j.contains("rho_floor"))
    c.limits.rho_floor = j["rho_floor"].get<double>();
  if (j.contains("eta_cap"))
    c.limits.eta_cap = j["eta_cap"].get<double>();
  if (j.contains("lambda_mode")) {
    const auto m = j["lambda_mode"].get<std::string>();
    if (m == "prop1")
      c.lambda_mode = LambdaMode::Prop1;
    else if (m == "fixed")
      c.lambda_mode = LambdaMode::Fixed;
    else
      throw std::invalid_argument("lambda_mode must be 'prop1' or 'fixed'");
  }
  if (j.contains("lambda"))
    c.lambda = j["lambda"].get<double>();
  if (j.contains("eta_uniform"))
    c.eta_uniform = j["eta_uniform"].get<double>();
  if (j.contains("l2_weight"))
    c.l2_weight = j["l2_weight"].get<double>();
  if (j.contains("force_uniform_phase2"))
    c.force_uniform_phase2 = j["force_uniform_phase2"].get<bool>();
  if (j.contains("seed"))
    c.seed = j["seed"].get<std::uint64_t>();
  c.validate();
  return c;
}

// Loss ------------------------------------------------------------------------

LossTerms lipirm_loss_and_grad(const MlpModel &model, const DatasetCollection &data,
                               const LossSpec &spec, std::vector<double> &grad,
                               std::span<const std::vector<std::size_t>> batch) {
  grad.assign(model.params.size(), 0.0);
  if (!batch.empty() && batch.size() != data.size())
    throw std::invalid_argument("batch does not list every domain");
  const std::size_t d = model.input_dim();
  if (spec.lipschitz && spec.lambda > 0.0 && spec.fd_steps.size() != d)
    throw std::invalid_argument("finite-difference steps do not match the input dimension");

  thread_local std::vector<ForwardCache> caches;
  ForwardCache plus, minus;
  std::vector<double> xp(d), xm(d);
  LossTerms t;
  std::vector<double> erm_parts, irm_parts, lip_parts;

  for (std::size_t p = 0; p < data.size(); ++p) {
    const auto &dom = data[p];
    std::vector<std::size_t> all;
    if (batch.empty()) {
      all.resize(dom.size());
      std::iota(all.begin(), all.end(), 0);
    }
    const std::vector<std::size_t> &idx = batch.empty() ? all : batch[p];
    const std::size_t n = idx.size();
    if (n == 0)
      continue;
    const double inv_n = 1.0 / static_cast<double>(n);
    auto it = spec.eta.find(dom.domain_id);
    const double eta = it == spec.eta.end() ? 0.0 : it->second;

    if (caches.size() < n)
      caches.resize(n);
    std::vector<PointLoss> pl(n);
    std::vector<double> losses(n), qs(n);
    for (std::size_t s = 0; s < n; ++s) {
      const double f = forward(model, dom.row(idx[s]), caches[s]);
      pl[s] = point_loss(model.kind, f, dom.labels[idx[s]]);
      losses[s] = pl[s].loss;
      qs[s] = pl[s].q;
    }
    const double erm = pairwise_sum(losses) * inv_n;
    const double q = pairwise_sum(qs) * inv_n;
    erm_parts.push_back(erm);
    irm_parts.push_back(eta * q * q);

    std::vector<double> lip(spec.lipschitz && spec.lambda > 0.0 ? n : 0, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double dldf = (pl[s].dloss + 2.0 * eta * q * pl[s].dq) * inv_n;
      backward(model, caches[s], dldf, grad);
      if (lip.empty())
        continue;
      const double rho = spec.sample_rho.empty() ? 1.0 : spec.sample_rho[p][idx[s]];
      const auto x = dom.row(idx[s]);
      double norm2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double h = spec.fd_steps[j];
        std::copy(x.begin(), x.end(), xp.begin());
        std::copy(x.begin(), x.end(), xm.begin());
        xp[j] += h;
        xm[j] -= h;
        const double g = (forward(model, xp, plus) - forward(model, xm, minus)) / (2.0 * h);
        norm2 += g * g;
        const double coef = spec.lambda * rho * inv_n * 2.0 * g / (2.0 * h);
        backward(model, plus, coef, grad);
        backward(model, minus, -coef, grad);
      }
      lip[s] = rho * norm2;
    }
    if (!lip.empty())
      lip_parts.push_back(spec.lambda * pairwise_sum(lip) * inv_n);
  }

  t.erm = pairwise_sum(erm_parts);
  t.irm = pairwise_sum(irm_parts);
  t.lipschitz = pairwise_sum(lip_parts);
  if (!spec.lipschitz && spec.l2_weight > 0.0) {
    std::vector<double> sq(model.params.size());
    for (std::size_t k = 0; k < sq.size(); ++k) {
      sq[k] = model.params[k] * model.params[k];
      grad[k] += 2.0 * spec.l2_weight * model.params[k];
    }
    t.l2 = spec.l2_weight * pairwise_sum(sq);
  }
  check_finite(t.erm, "ERM");
  check_finite(t.irm, "IRM");
  check_finite(t.lipschitz, "Lipschitz");
  check_finite(t.l2, "l2");
  t.total = t.erm + t.irm + t.lipschitz + t.l2;
  return t;
}

// Standardization ---------------------------------------------------------------

Standardizer Standardizer::fit(const DatasetCollection &data, bool enabled) {
  if (data.empty())
    throw std::invalid_argument("no training domains");
  const std::size_t d = data.front().dim;
  Standardizer s;
  s.enabled = enabled;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  std::vector<std::vector<double>> cols(d);
  for (const auto &dom : data)
    for (std::size_t i = 0; i < dom.size(); ++i)
      for (std::size_t j = 0; j < d; ++j)
        cols[j].push_back(dom.row(i)[j]);
  for (std::size_t j = 0; j < d; ++j) {
    const double n = static_cast<double>(cols[j].size());
    const double m = pairwise_sum(cols[j]) / n;
    std::vector<double> sq(cols[j].size());
    for (std::size_t i = 0; i < sq.size(); ++i)
      sq[i] = (cols[j][i] - m) * (cols[j][i] - m);
    const double sd = std::sqrt(pairwise_sum(sq) / n);
    s.mean[j] = m;
    s.scale[j] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

DatasetCollection Standardizer::apply(const DatasetCollection &data) const {
  DatasetCollection out = data;
  if (!enabled)
    return out;
  for (auto &dom : out) {
    if (dom.dim != mean.size())
      throw std::invalid_argument("feature dimension differs from the training domains");
    for (std::size_t i = 0; i < dom.size(); ++i)
      for (std::size_t j = 0; j < dom.dim; ++j) {
        double &v = dom.features[i * dom.dim + j];
        v = (v - mean[j]) / scale[j];
      }
  }
  return out;
}

// Training loop -------------------------------------------------------------------

std::vector<double> fit_model(MlpModel &model, const DatasetCollection &data,
                              const LossSpec &spec, const TrainConfig &config,
                              std::uint64_t batch_seed) {
  config.validate();
  const std::size_t P = model.params.size();
  std::vector<double> grad, m1(P, 0.0), m2(P, 0.0);
  std::vector<double> trace;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  long step = 0;

  auto update = [&](const std::vector<double> &g) {
    ++step;
    if (config.optimizer == OptimizerKind::GradientDescent) {
      for (std::size_t k = 0; k < P; ++k)
        model.params[k] -= config.learning_rate * g[k];
      return;
    }
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
    for (std::size_t k = 0; k < P; ++k) {
      m1[k] = b1 * m1[k] + (1.0 - b1) * g[k];
      m2[k] = b2 * m2[k] + (1.0 - b2) * g[k] * g[k];
      model.params[k] -= config.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + eps);
    }
  };

  if (config.batch_size == 0) {
    for (int e = 0; e < config.epochs; ++e) {
      trace.push_back(lipirm_loss_and_grad(model, data, spec, grad).total);
      update(grad);
    }
    return trace;
  }

  Rng rng(batch_seed);
  std::size_t largest = 0;
  for (const auto &d : data)
    largest = std::max(largest, d.size());
  const std::size_t steps = (largest + config.batch_size - 1) / config.batch_size;
  std::vector<std::vector<std::size_t>> perm(data.size()), batch(data.size());
  for (int e = 0; e < config.epochs; ++e) {
    for (std::size_t p = 0; p < data.size(); ++p) {
      perm[p].resize(data[p].size());
      std::iota(perm[p].begin(), perm[p].end(), 0);
      std::shuffle(perm[p].begin(), perm[p].end(), rng);
    }
    std::vector<double> totals;
    for (std::size_t s = 0; s < steps; ++s) {
      for (std::size_t p = 0; p < data.size(); ++p) {
        const std::size_t n = perm[p].size();
        const std::size_t take = std::min(config.batch_size, n);
        batch[p].resize(take);
        for (std::size_t t = 0; t < take; ++t)
          batch[p][t] = perm[p][(s * config.batch_size + t) % n];
      }
      totals.push_back(lipirm_loss_and_grad(model, data, spec, grad, batch).total);
      update(grad);
    }
    trace.push_back(pairwise_sum(totals) / static_cast<double>(totals.size()));
  }
  return trace;
}

// Phase one and methods -------------------------------------------------------------

PhaseOne run_phase_one(const DatasetBundle &bundle, const TrainConfig &config) {
  config.validate();
  const Standardizer st = Standardizer::fit(bundle.train, config.standardize);
  const DatasetCollection train = st.apply(bundle.train);
  PhaseOne out;
  out.seed = derive_seed(config.seed, "aux");
  try {
    out.grouping = make_grouping(bundle.train, config);
  } catch (const std::exception &e) {
    throw std::runtime_error(std::string("phase 1 grouping: ") + e.what());
  }
  out.uniform.lambda = lambda_for(config, train);
  out.uniform.eta = uniform_eta(train, config.eta_uniform);
  for (int k = 0; k < out.grouping.k_count; ++k)
    out.uniform.rho[k] = 1.0;

  Rng init = Rng(out.seed);
  MlpModel aux = MlpModel::create(layer_sizes(train.front().dim, config), bundle.kind, init);
  LossSpec spec;
  spec.lambda = out.uniform.lambda;
  spec.eta = out.uniform.eta;
  spec.sample_rho = sample_rho(out.grouping, out.uniform);
  spec.fd_steps = fd_steps(config, st);
  try {
    out.loss_trace = fit_model(aux, train, spec, config, derive_seed(config.seed, "aux.batches"));
  } catch (const std::exception &e) {
    throw std::runtime_error(std::string("phase 1 training: ") + e.what());
  }

  try {
    out.stats = estimate_density(train, out.grouping);
    estimate_noise_variance(train, out.grouping,
                            [&aux](std::span<const double> x) { return predict(aux, x); },
                            out.stats);
    out.optimized.lambda = out.uniform.lambda;
    if (config.lambda_mode == LambdaMode::Prop1)
      out.optimized.lambda = optimal_lambda(out.stats.domain_sizes);
    out.optimized.rho = optimal_rho(out.stats, config.limits);
    out.optimized.eta = optimal_eta(out.stats, config.limits);
  } catch (const std::exception &e) {
    throw std::runtime_error(std::string("phase 1 statistics: ") + e.what());
  }
  return out;
}

std::map<std::string, double> evaluate(const MlpModel &model, const Standardizer &st,
                                       const DatasetBundle &bundle) {
  std::map<std::string, double> out;
  auto score = [&](const DatasetCollection &raw, const std::string &prefix) {
    if (raw.empty())
      return;
    const auto data = st.apply(raw);
    std::vector<double> pred, lab;
    for (const auto &d : data)
      for (std::size_t i = 0; i < d.size(); ++i) {
        pred.push_back(predict(model, d.row(i)));
        lab.push_back(d.labels[i]);
      }
    if (model.kind == LabelKind::Regression) {
      out[prefix + "mse"] = mse(pred, lab);
      return;
    }
    out[prefix + "acc"] = accuracy(pred, lab);
    const bool both = std::any_of(lab.begin(), lab.end(), [](double y) { return y >= 0.5; }) &&
                      std::any_of(lab.begin(), lab.end(), [](double y) { return y < 0.5; });
    if (both)
      out[prefix + "auc"] = auc(pred, lab);
  };
  score(bundle.test, "");
  score(bundle.train, "train_");
  return out;
}

ExperimentRun train(Method method, const DatasetBundle &bundle, const TrainConfig &config,
                    const PhaseOne *phase_one) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  if (bundle.train.empty())
    throw std::invalid_argument("no training domains");
  const Standardizer st = Standardizer::fit(bundle.train, config.standardize);
  const DatasetCollection train_data = st.apply(bundle.train);

  ExperimentRun run;
  run.method = to_string(method);
  run.setting = bundle.name;
  run.seed = config.seed;
  run.init_seed = derive_seed(config.seed, "final");

  LossSpec spec;
  spec.fd_steps = fd_steps(config, st);
  const double lambda = lambda_for(config, train_data);
  PenaltyScheme scheme;
  scheme.lambda = lambda;

  switch (method) {
  case Method::ErmL2:
  case Method::IrmL2:
    spec.lipschitz = false;
    spec.l2_weight = config.l2_weight;
    scheme.lambda = config.l2_weight;
    if (method == Method::IrmL2)
      scheme.eta = uniform_eta(train_data, config.eta_uniform);
    else
      scheme.eta = uniform_eta(train_data, 0.0);
    break;
  case Method::ErmLip:
  case Method::IrmLip:
    scheme.eta = uniform_eta(train_data, method == Method::IrmLip ? config.eta_uniform : 0.0);
    break;
  case Method::Rpo:
  case Method::RpoLip:
  case Method::RpoPen: {
    PhaseOne local;
    if (!phase_one) {
      local = run_phase_one(bundle, config);
      phase_one = &local;
    }
    run.phase_one_seed = phase_one->seed;
    run.group_statistics = phase_one->stats;
    scheme = config.force_uniform_phase2 ? phase_one->uniform : phase_one->optimized;
    if (method == Method::RpoLip)
      scheme.eta = phase_one->uniform.eta;
    if (method == Method::RpoPen)
      scheme.rho = phase_one->uniform.rho;
    spec.sample_rho = sample_rho(phase_one->grouping, scheme);
    break;
  }
  }
  if (spec.lipschitz)
    spec.lambda = scheme.lambda;
  spec.eta = scheme.eta;
  run.scheme = scheme;

  Rng init(run.init_seed);
  run.model = MlpModel::create(layer_sizes(train_data.front().dim, config), bundle.kind, init);
  try {
    run.loss_trace = fit_model(run.model, train_data, spec, config,
                               derive_seed(config.seed, "final.batches"));
  } catch (const std::exception &e) {
    throw std::runtime_error(std::string(is_rpo(method) ? "phase 2 training: " : "training: ") +
                             e.what());
  }
  run.metrics = evaluate(run.model, st, bundle);
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

// Serialization -----------------------------------------------------------------------

nlohmann::json to_json(const GroupStatistics &s) {
  nlohmann::json j;
  j["domain_ids"] = s.domain_ids;
  j["domain_sizes"] = s.domain_sizes;
  j["k_count"] = s.k_count;
  j["r_hat"] = s.r_hat;
  j["sigma2"] = s.sigma2;
  j["counts"] = s.counts;
  return j;
}

nlohmann::json to_json(const ExperimentRun &run, bool include_model) {
  nlohmann::json j;
  j["method"] = run.method;
  j["setting"] = run.setting;
  j["seed"] = run.seed;
  j["init_seed"] = run.init_seed;
  if (run.phase_one_seed)
    j["phase_one_seed"] = *run.phase_one_seed;
  j["metrics"] = run.metrics;
  j["scheme"] = to_json(run.scheme);
  j["loss_trace"] = run.loss_trace;
  j["wall_seconds"] = run.wall_seconds;
  if (run.group_statistics)
    j["group_statistics"] = to_json(*run.group_statistics);
  if (include_model)
    j["model"] = to_json(run.model);
  return j;
}

ExperimentRun run_from_json(const nlohmann::json &j) {
  ExperimentRun r;
  r.method = j.at("method").get<std::string>();
  r.setting = j.at("setting").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.init_seed = j.value("init_seed", std::uint64_t{0});
  if (j.contains("phase_one_seed"))
    r.phase_one_seed = j["phase_one_seed"].get<std::uint64_t>();
  r.metrics = j.at("metrics").get<std::map<std::string, double>>();
  r.scheme = scheme_from_json(j.at("scheme"));
  r.loss_trace = j.value("loss_trace", std::vector<double>{});
  r.wall_seconds = j.value("wall_seconds", 0.0);
  if (j.contains("model"))
    r.model = model_from_json(j["model"]);
  return r;
}

void write_leaderboard_header(std::ostream &out) { out << "method,seed,setting,metric,value\n"; }

void append_leaderboard(std::ostream &out, const ExperimentRun &run) {
  out.precision(17);
  for (const auto &[k, v] : run.metrics)
    out << run.method << ',' << run.seed << ',' << run.setting << ',' << k << ',' << v << '\n';
}

} // namespace lipirm
