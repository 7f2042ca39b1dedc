#include "config.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace lipirm::cli {

namespace {

using nlohmann::json;

// Rejects keys outside `allowed`, naming the offending path.
void check_keys(const json &j, const std::string &path, std::initializer_list<const char *> allowed) {
  if (!j.is_object())
    throw ConfigError(path + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto &[k, v] : j.items())
    if (!ok.count(k))
      throw ConfigError(path + "/" + k + ": unknown key");
}

template <class T>
void read(const json &j, const std::string &path, const char *key, T &out) {
  if (!j.contains(key))
    return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw ConfigError(path + "/" + key + ": " + e.what());
  }
}

DensityFamily density_from_json(const json &j, const std::string &path) {
  check_keys(j, path, {"kind", "k"});
  DensityFamily d;
  std::string kind = "uniform";
  read(j, path, "kind", kind);
  if (kind == "uniform")
    d.kind = DensityFamily::Kind::Uniform;
  else if (kind == "skew")
    d.kind = DensityFamily::Kind::Skew;
  else
    throw ConfigError(path + "/kind: expected 'uniform' or 'skew'");
  read(j, path, "k", d.k);
  if (d.k < 0.0)
    throw ConfigError(path + "/k: must be non-negative");
  return d;
}

NoiseProfile noise_from_json(const json &j, const std::string &path) {
  check_keys(j, path, {"kind", "a", "b", "levels"});
  NoiseProfile n;
  std::string kind = "constant";
  read(j, path, "kind", kind);
  if (kind == "constant")
    n.kind = NoiseProfile::Kind::Constant;
  else if (kind == "linear")
    n.kind = NoiseProfile::Kind::Linear;
  else if (kind == "piecewise")
    n.kind = NoiseProfile::Kind::Piecewise;
  else
    throw ConfigError(path + "/kind: expected 'constant', 'linear' or 'piecewise'");
  read(j, path, "a", n.a);
  read(j, path, "b", n.b);
  read(j, path, "levels", n.levels);
  if (n.a < 0.0 || n.b < 0.0 ||
      std::any_of(n.levels.begin(), n.levels.end(), [](double v) { return v < 0.0; }))
    throw ConfigError(path + ": noise levels must be non-negative");
  if (n.kind == NoiseProfile::Kind::Piecewise && n.levels.empty())
    throw ConfigError(path + "/levels: piecewise noise needs levels");
  return n;
}

const char *kind_name(NoiseProfile::Kind k) {
  switch (k) {
  case NoiseProfile::Kind::Linear:
    return "linear";
  case NoiseProfile::Kind::Piecewise:
    return "piecewise";
  default:
    return "constant";
  }
}

const char *truth_name(TruthSpec::Kind k) {
  switch (k) {
  case TruthSpec::Kind::Cosine:
    return "cosine";
  case TruthSpec::Kind::Quadratic:
    return "quadratic";
  case TruthSpec::Kind::Linear:
    return "linear";
  case TruthSpec::Kind::Constant:
    return "constant";
  default:
    return "sine";
  }
}

TruthSpec truth_from_json(const json &j, const std::string &path) {
  check_keys(j, path, {"kind", "amplitude", "frequency", "offset"});
  TruthSpec t;
  std::string kind = "sine";
  read(j, path, "kind", kind);
  static const std::pair<const char *, TruthSpec::Kind> names[] = {
      {"sine", TruthSpec::Kind::Sine},         {"cosine", TruthSpec::Kind::Cosine},
      {"quadratic", TruthSpec::Kind::Quadratic}, {"linear", TruthSpec::Kind::Linear},
      {"constant", TruthSpec::Kind::Constant}};
  bool found = false;
  for (const auto &[n, k] : names)
    if (kind == n) {
      t.kind = k;
      found = true;
    }
  if (!found)
    throw ConfigError(path + "/kind: unknown truth '" + kind + "'");
  read(j, path, "amplitude", t.amplitude);
  read(j, path, "frequency", t.frequency);
  read(j, path, "offset", t.offset);
  return t;
}

PenaltyScheme scheme_at(const json &j, const std::string &path) {
  check_keys(j, path, {"lambda", "eta", "rho"});
  try {
    return scheme_from_json(j);
  } catch (const std::exception &e) {
    throw ConfigError(path + ": " + e.what());
  }
}

} // namespace

Regression1DConfig regression_from_json(const json &j, const std::string &path) {
  check_keys(j, path, {"domains", "truth", "k_count", "seed"});
  Regression1DConfig c;
  if (j.contains("domains")) {
    if (!j["domains"].is_array() || j["domains"].empty())
      throw ConfigError(path + "/domains: expected a non-empty array");
    for (std::size_t e = 0; e < j["domains"].size(); ++e) {
      const auto &d = j["domains"][e];
      const std::string p = path + "/domains/" + std::to_string(e);
      check_keys(d, p, {"density", "noise", "n"});
      Regression1DDomain dom;
      if (d.contains("density"))
        dom.density = density_from_json(d["density"], p + "/density");
      if (d.contains("noise"))
        dom.noise = noise_from_json(d["noise"], p + "/noise");
      read(d, p, "n", dom.n);
      if (dom.n == 0)
        throw ConfigError(p + "/n: must be positive");
      c.domains.push_back(dom);
    }
  } else {
    Regression1DDomain dom;
    dom.noise.a = 0.05;
    dom.n = 2000;
    c.domains.push_back(dom);
  }
  if (j.contains("truth"))
    c.truth = truth_from_json(j["truth"], path + "/truth");
  read(j, path, "k_count", c.k_count);
  if (c.k_count < 1)
    throw ConfigError(path + "/k_count: must be at least 1");
  read(j, path, "seed", c.seed);
  return c;
}

json to_json(const Regression1DConfig &c) {
  json doms = json::array();
  for (const auto &d : c.domains)
    doms.push_back(
        {{"density",
          {{"kind", d.density.kind == DensityFamily::Kind::Skew ? "skew" : "uniform"},
           {"k", d.density.k}}},
         {"noise",
          {{"kind", kind_name(d.noise.kind)}, {"a", d.noise.a}, {"b", d.noise.b}, {"levels", d.noise.levels}}},
         {"n", d.n}});
  return {{"domains", doms},
          {"truth",
           {{"kind", truth_name(c.truth.kind)},
            {"amplitude", c.truth.amplitude},
            {"frequency", c.truth.frequency},
            {"offset", c.truth.offset}}},
          {"k_count", c.k_count},
          {"seed", c.seed}};
}

BenchmarkSpec benchmark_from_json(const json &j, const std::string &path) {
  check_keys(j, path, {"kind", "preset", "params", "test_n"});
  BenchmarkSpec b;
  read(j, path, "kind", b.kind);
  read(j, path, "preset", b.preset);
  const json params = j.contains("params") ? j["params"] : json::object();
  const std::string pp = path + "/params";
  if (b.kind == "two_bit") {
    check_keys(params, pp,
               {"causal_flip", "train_p", "test_p", "n_train", "n_test", "keep_probability",
                "flip_probability", "targets"});
    auto &c = b.two_bit;
    read(params, pp, "causal_flip", c.causal_flip);
    read(params, pp, "train_p", c.train_p);
    read(params, pp, "test_p", c.test_p);
    read(params, pp, "n_train", c.n_train);
    read(params, pp, "n_test", c.n_test);
    read(params, pp, "keep_probability", c.keep_probability);
    read(params, pp, "flip_probability", c.flip_probability);
    try {
      c.apply_preset(preset_from_string(b.preset));
    } catch (const std::exception &e) {
      throw ConfigError(path + "/preset: " + e.what());
    }
    if (params.contains("targets")) {
      std::vector<std::pair<int, int>> t;
      read(params, pp, "targets", t);
      c.targets.insert(t.begin(), t.end());
    }
  } else if (b.kind == "confounded") {
    check_keys(params, pp,
               {"base_dim", "confounder_dim", "train_alpha", "validation_alpha", "test_alpha",
                "n_per_domain", "label_noise"});
    auto &c = b.confounded;
    read(params, pp, "base_dim", c.base_dim);
    read(params, pp, "confounder_dim", c.confounder_dim);
    read(params, pp, "train_alpha", c.train_alpha);
    read(params, pp, "validation_alpha", c.validation_alpha);
    read(params, pp, "test_alpha", c.test_alpha);
    read(params, pp, "n_per_domain", c.n_per_domain);
    read(params, pp, "label_noise", c.label_noise);
  } else if (b.kind == "regression1d") {
    b.regression = regression_from_json(params, pp);
    read(j, path, "test_n", b.regression_test_n);
  } else {
    throw ConfigError(path + "/kind: expected 'two_bit', 'confounded' or 'regression1d'");
  }
  return b;
}

json to_json(const BenchmarkSpec &b) {
  json j{{"kind", b.kind}};
  if (b.kind == "two_bit") {
    j["preset"] = b.preset;
    j["params"] = to_json(b.two_bit);
    j["params"].erase("seed");
  } else if (b.kind == "confounded") {
    j["params"] = to_json(b.confounded);
    j["params"].erase("seed");
  } else {
    j["params"] = to_json(b.regression);
    j["params"].erase("seed");
    j["test_n"] = b.regression_test_n;
  }
  return j;
}

DatasetBundle generate(const BenchmarkSpec &b, std::uint64_t seed) {
  if (b.kind == "two_bit") {
    auto c = b.two_bit;
    c.seed = seed;
    return gen_two_bit(c);
  }
  if (b.kind == "confounded") {
    auto c = b.confounded;
    c.seed = seed;
    return gen_confounded_regression(c);
  }
  auto c = b.regression;
  c.seed = seed;
  DatasetBundle out;
  out.name = "regression1d";
  out.kind = LabelKind::Regression;
  out.train = gen_regression_1d(c).data;
  // Held-out draw from the same domains; ids continue after the training ones.
  auto t = c;
  t.seed = derive_seed(seed, "regression1d.test");
  for (auto &d : t.domains)
    d.n = b.regression_test_n;
  auto test = gen_regression_1d(t).data;
  for (auto &d : test) {
    d.domain_id += static_cast<int>(c.domains.size());
    out.test.push_back(std::move(d));
  }
  return out;
}

TrainRequest train_request_from_json(const json &j) {
  check_keys(j, "", {"benchmark", "train", "methods", "seeds"});
  TrainRequest r;
  if (j.contains("benchmark"))
    r.benchmark = benchmark_from_json(j["benchmark"], "/benchmark");
  else
    r.benchmark.two_bit.apply_preset(preset_from_string(r.benchmark.preset));
  if (j.contains("train")) {
    try {
      r.train = train_config_from_json(j["train"]);
    } catch (const std::exception &e) {
      throw ConfigError(std::string("/train: ") + e.what());
    }
  }
  read(j, "", "methods", r.methods);
  read(j, "", "seeds", r.seeds);
  for (const auto &m : r.methods) {
    try {
      method_from_string(m);
    } catch (const std::exception &e) {
      throw ConfigError(std::string("/methods: ") + e.what());
    }
  }
  if (r.methods.empty() || r.seeds.empty())
    throw ConfigError("/methods and /seeds must be non-empty");
  return r;
}

json to_json(const TrainRequest &r) {
  json t = to_json(r.train);
  t.erase("seed");
  return {{"benchmark", to_json(r.benchmark)}, {"train", t}, {"methods", r.methods}, {"seeds", r.seeds}};
}

TheoryRequest theory_request_from_json(const json &j) {
  check_keys(j, "", {"setting", "scheme", "optimal", "n_grid", "lambda_sweep"});
  TheoryRequest r;
  r.setting = regression_from_json(j.contains("setting") ? j["setting"] : json::object(), "/setting");
  r.scheme.lambda = 0.01;
  if (j.contains("scheme"))
    r.scheme = scheme_at(j["scheme"], "/scheme");
  read(j, "", "optimal", r.optimal);
  read(j, "", "n_grid", r.n_grid);
  read(j, "", "lambda_sweep", r.lambda_sweep);
  if (r.n_grid < 3)
    throw ConfigError("/n_grid: need at least 3 nodes");
  return r;
}

json to_json(const TheoryRequest &r) {
  return {{"setting", to_json(r.setting)},
          {"scheme", lipirm::to_json(r.scheme)},
          {"optimal", r.optimal},
          {"n_grid", r.n_grid},
          {"lambda_sweep", r.lambda_sweep}};
}

OracleRequest oracle_request_from_json(const json &j) {
  check_keys(j, "", {"setting", "n_grid", "lambda_points", "lambda_ratio", "mc_replications", "eta", "seed"});
  OracleRequest r;
  r.setting = regression_from_json(j.contains("setting") ? j["setting"] : json::object(), "/setting");
  read(j, "", "n_grid", r.n_grid);
  read(j, "", "lambda_points", r.lambda_points);
  read(j, "", "lambda_ratio", r.lambda_ratio);
  read(j, "", "mc_replications", r.mc_replications);
  read(j, "", "eta", r.eta);
  read(j, "", "seed", r.seed);
  if (r.lambda_points == 0 || !(r.lambda_ratio > 1.0))
    throw ConfigError("/lambda_points, /lambda_ratio: need a positive count and a ratio above 1");
  if (r.mc_replications == 1)
    throw ConfigError("/mc_replications: use 0 or at least 2");
  r.solver.n_grid = r.n_grid;
  r.solver.lipschitz = LipschitzMode::Integral;
  return r;
}

json to_json(const OracleRequest &r) {
  return {{"setting", to_json(r.setting)},     {"n_grid", r.n_grid},
          {"lambda_points", r.lambda_points}, {"lambda_ratio", r.lambda_ratio},
          {"mc_replications", r.mc_replications}, {"eta", r.eta},
          {"seed", r.seed}};
}

std::vector<std::uint64_t> parse_seed_list(const std::string &text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty())
      continue;
    try {
      const auto dash = tok.find('-');
      if (dash == std::string::npos) {
        out.push_back(std::stoull(tok));
      } else {
        const auto lo = std::stoull(tok.substr(0, dash));
        const auto hi = std::stoull(tok.substr(dash + 1));
        if (hi < lo)
          throw ConfigError("bad seed range '" + tok + "'");
        for (auto s = lo; s <= hi; ++s)
          out.push_back(s);
      }
    } catch (const std::logic_error &) {
      throw ConfigError("bad seed list '" + text + "'");
    }
  }
  if (out.empty())
    throw ConfigError("empty seed list");
  return out;
}

std::vector<std::string> parse_name_list(const std::string &text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty())
      out.push_back(tok);
  return out;
}

} // namespace lipirm::cli
