#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "lipirm/eval_stats.hpp"
#include "lipirm/persistence.hpp"
#include "lipirm/theory.hpp"
#include "lipirm/trainer.hpp"

using nlohmann::json;
using namespace lipirm;
using namespace lipirm::cli;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::string seeds;
  std::string methods;
  std::string setting;
  int jobs = 1;
  bool force = false;
};

json load_config(const std::string &path) {
  if (path.empty())
    return json::object();
  try {
    return read_json_file(path);
  } catch (const std::exception &e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string csv_of(const DatasetCollection &data) {
  std::ostringstream s;
  write_csv(s, data);
  return s.str();
}

template <class F>
std::string render(F &&f) {
  std::ostringstream s;
  s.precision(17);
  f(s);
  return s.str();
}

// gen -------------------------------------------------------------------------

int cmd_gen(const Common &o) {
  const json raw = load_config(o.config);
  if (!raw.is_object())
    throw ConfigError("config root must be an object");
  for (const auto &[k, v] : raw.items())
    if (k != "benchmark" && k != "seed")
      throw ConfigError("/" + k + ": unknown key");
  BenchmarkSpec b;
  if (raw.contains("benchmark"))
    b = benchmark_from_json(raw["benchmark"], "/benchmark");
  else
    b.two_bit.apply_preset(preset_from_string(b.preset));
  if (!o.setting.empty()) {
    if (b.kind != "two_bit")
      throw ConfigError("--setting applies to the two_bit benchmark only");
    b.preset = o.setting;
    b.two_bit.apply_preset(preset_from_string(o.setting));
  }
  std::uint64_t seed = raw.value("seed", std::uint64_t{0});
  if (!o.seeds.empty()) {
    const auto s = parse_seed_list(o.seeds);
    if (s.size() != 1)
      throw ConfigError("gen takes a single seed");
    seed = s.front();
  }
  const auto bundle = generate(b, seed);
  RunWriter w(o.out, o.force);
  const json resolved{{"command", "gen"}, {"benchmark", to_json(b)}, {"seed", seed}};
  w.write_json("config.json", resolved);
  w.write_text("train.csv", csv_of(bundle.train));
  if (!bundle.validation.empty())
    w.write_text("validation.csv", csv_of(bundle.validation));
  if (!bundle.test.empty())
    w.write_text("test.csv", csv_of(bundle.test));
  w.commit(resolved);
  std::cout << "wrote " << o.out << "\n";
  return 0;
}

// train -----------------------------------------------------------------------

int cmd_train(const Common &o) {
  TrainRequest req = train_request_from_json(load_config(o.config));
  if (!o.seeds.empty())
    req.seeds = parse_seed_list(o.seeds);
  if (!o.methods.empty()) {
    req.methods = parse_name_list(o.methods);
    for (const auto &m : req.methods) {
      try {
        method_from_string(m);
      } catch (const std::exception &e) {
        throw ConfigError(std::string("--methods: ") + e.what());
      }
    }
  }
  if (!o.setting.empty()) {
    if (req.benchmark.kind != "two_bit")
      throw ConfigError("--setting applies to the two_bit benchmark only");
    req.benchmark.preset = o.setting;
    req.benchmark.two_bit.apply_preset(preset_from_string(o.setting));
  }
  const std::string setting_name =
      req.benchmark.kind == "two_bit" ? req.benchmark.preset : req.benchmark.kind;

  const std::size_t n_seeds = req.seeds.size();
  std::vector<DatasetBundle> bundles(n_seeds);
  std::vector<std::optional<PhaseOne>> phase(n_seeds);
  bool need_phase_one = false;
  for (const auto &m : req.methods)
    need_phase_one = need_phase_one || is_rpo(method_from_string(m));

  auto config_for = [&](std::size_t s) {
    TrainConfig c = req.train;
    c.seed = req.seeds[s];
    return c;
  };
  parallel_for(n_seeds, o.jobs, [&](std::size_t s) {
    bundles[s] = generate(req.benchmark, req.seeds[s]);
    if (need_phase_one)
      phase[s] = run_phase_one(bundles[s], config_for(s));
  });

  const std::size_t cells = n_seeds * req.methods.size();
  std::vector<ExperimentRun> runs(cells);
  parallel_for(cells, o.jobs, [&](std::size_t i) {
    const std::size_t s = i / req.methods.size();
    const Method m = method_from_string(req.methods[i % req.methods.size()]);
    runs[i] = train(m, bundles[s], config_for(s), phase[s] ? &*phase[s] : nullptr);
    runs[i].setting = setting_name;
  });

  RunWriter w(o.out, o.force);
  const json resolved = to_json(req);
  w.write_json("config.json", resolved);
  std::ostringstream board, penalties, losses;
  board.precision(17);
  penalties.precision(17);
  losses.precision(17);
  write_leaderboard_header(board);
  penalties << "method,seed,kind,key,value\n";
  losses << "method,seed,epoch,loss\n";
  for (const auto &r : runs) {
    const std::string stem = r.method + "/seed_" + std::to_string(r.seed);
    w.write_json("runs/" + stem + ".json", to_json(r));
    w.write_json("schemes/" + stem + ".json", to_json(r.scheme));
    append_leaderboard(board, r);
    penalties << r.method << ',' << r.seed << ",lambda,0," << r.scheme.lambda << '\n';
    for (const auto &[d, v] : r.scheme.eta)
      penalties << r.method << ',' << r.seed << ",eta," << d << ',' << v << '\n';
    for (const auto &[k, v] : r.scheme.rho)
      penalties << r.method << ',' << r.seed << ",rho," << k << ',' << v << '\n';
    for (std::size_t e = 0; e < r.loss_trace.size(); ++e)
      losses << r.method << ',' << r.seed << ',' << e << ',' << r.loss_trace[e] << '\n';
  }
  for (std::size_t s = 0; s < n_seeds; ++s)
    if (phase[s]) {
      json p{{"seed", req.seeds[s]},
             {"phase_one_seed", phase[s]->seed},
             {"statistics", to_json(phase[s]->stats)},
             {"group_domain", phase[s]->grouping.group_domain},
             {"uniform", to_json(phase[s]->uniform)},
             {"optimized", to_json(phase[s]->optimized)}};
      w.write_json("phase_one/seed_" + std::to_string(req.seeds[s]) + ".json", p);
    }
  w.write_text("leaderboard.csv", board.str());
  w.write_text("plots/penalties.csv", penalties.str());
  w.write_text("plots/loss_curves.csv", losses.str());
  w.commit(resolved);
  std::cout << "wrote " << runs.size() << " runs to " << o.out << "\n";
  return 0;
}

// theory ----------------------------------------------------------------------

PenaltyScheme complete_scheme(PenaltyScheme s, const TheorySetting &setting) {
  for (int id : setting.domain_ids())
    s.eta.emplace(id, 1.0);
  for (int k = 0; k < setting.k_count; ++k)
    s.rho.emplace(k, 1.0);
  return s;
}

int cmd_theory(const Common &o) {
  TheoryRequest req = theory_request_from_json(load_config(o.config));
  const TheorySetting setting = theory_setting(req.setting);
  const Grid1D grid(req.n_grid);
  PenaltyScheme scheme = complete_scheme(req.scheme, setting);
  if (req.optimal) {
    const auto stats = setting.group_statistics(grid);
    scheme.eta = optimal_eta(stats);
    scheme.rho = optimal_rho(stats);
    scheme.lambda = companion_optimal_lambda(setting, scheme, grid);
  }
  const auto rep = theorem1_risk(setting, scheme, grid);

  RunWriter w(o.out, o.force);
  const json resolved = to_json(req);
  w.write_json("config.json", resolved);
  w.write_json("scheme.json", to_json(scheme));
  w.write_json("report.json", to_json(rep));
  w.write_text("plots/risk_density.csv", render([&](std::ostream &s) { write_report_csv(s, rep); }));
  if (!req.lambda_sweep.empty()) {
    w.write_text("plots/risk_vs_lambda.csv", render([&](std::ostream &s) {
                   s << "lambda,bias,variance,risk\n";
                   for (double l : req.lambda_sweep) {
                     PenaltyScheme p = scheme;
                     p.lambda = l;
                     const auto r = theorem1_risk(setting, p, grid);
                     s << l << ',' << r.bias_integral << ',' << r.variance_integral << ',' << r.risk << '\n';
                   }
                 }));
  }
  w.commit(resolved);
  std::printf("risk %.9e (bias %.6e, variance %.6e) at lambda %.6g\n", rep.risk,
              rep.bias_integral, rep.variance_integral, scheme.lambda);
  return 0;
}

// oracle ----------------------------------------------------------------------

int cmd_oracle(const Common &o) {
  OracleRequest req = oracle_request_from_json(load_config(o.config));
  if (!o.seeds.empty())
    req.seed = parse_seed_list(o.seeds).front();
  const TheorySetting setting = theory_setting(req.setting);
  const Grid1D grid(req.n_grid);
  PenaltyScheme base = complete_scheme({}, setting);
  for (auto &[d, v] : base.eta)
    v = req.eta;

  const double star = companion_optimal_lambda(setting, base, grid);
  PenaltyGrid pg;
  pg.lambda = geometric_grid(star, req.lambda_ratio, req.lambda_points);
  const auto res = grid_search_penalties(base, pg, theorem1_objective(setting, grid), o.jobs);
  const double steps = std::abs(std::log(res.best.lambda / star)) / std::log(req.lambda_ratio);

  json verdicts = json::array();
  bool all = true;
  auto verdict = [&](const std::string &name, bool pass, json detail) {
    all = all && pass;
    verdicts.push_back({{"check", name}, {"pass", pass}, {"detail", detail}});
    std::printf("%-28s %s\n", name.c_str(), pass ? "PASS" : "FAIL");
  };
  verdict("lambda_grid_brackets_optimum", steps <= 1.0,
          {{"lambda_star", star}, {"argmin", res.best.lambda}, {"grid_steps", steps}});

  std::optional<RiskEstimate> mc;
  if (req.mc_replications > 0) {
    PenaltyScheme at = base;
    at.lambda = star;
    mc = monte_carlo_risk(req.setting, at, req.solver, req.mc_replications, req.seed, o.jobs);
    const double th = theorem1_risk(setting, at, grid).risk;
    const double rel = std::abs(mc->mean - th) / th;
    verdict("simulation_matches_theory", rel < 0.30,
            {{"monte_carlo", mc->mean}, {"standard_error", mc->standard_error}, {"theory", th},
             {"relative_gap", rel}});
  }

  RunWriter w(o.out, o.force);
  const json resolved = to_json(req);
  w.write_json("config.json", resolved);
  w.write_json("scheme.json", to_json(res.best));
  w.write_text("lambda_grid.csv", render([&](std::ostream &s) { write_grid_csv(s, res); }));
  if (mc)
    w.write_text("monte_carlo.csv", render([&](std::ostream &s) {
                   s << "replication,risk\n";
                   for (std::size_t r = 0; r < mc->values.size(); ++r)
                     s << r << ',' << mc->values[r] << '\n';
                 }));
  w.write_json("verdicts.json", verdicts);
  w.commit(resolved);
  return all ? 0 : 3;
}

// report ----------------------------------------------------------------------

struct Row {
  std::string method, setting, metric;
  double value;
};

std::vector<Row> read_leaderboard(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError(path + ": cannot open leaderboard");
  std::string line;
  std::getline(in, line);
  if (line != "method,seed,setting,metric,value")
    throw ConfigError(path + ": unexpected header '" + line + "'");
  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ','))
      f.push_back(tok);
    if (f.size() != 5)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 5 fields");
    rows.push_back({f[0], f[2], f[3], std::stod(f[4])});
  }
  return rows;
}

int cmd_report(const std::string &dir, const std::string &reference, const std::string &out) {
  const auto rows = read_leaderboard(dir + "/leaderboard.csv");
  // (setting, metric) -> method -> values
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::vector<double>>> cells;
  for (const auto &r : rows)
    if (r.metric.rfind("train_", 0) != 0)
      cells[{r.setting, r.metric}][r.method].push_back(r.value);

  std::ostringstream csv;
  csv << "setting,metric,method,n,mean,sd,t_vs_reference,p_vs_reference,stars\n";
  for (const auto &[key, by_method] : cells) {
    const auto ref = by_method.find(reference);
    std::printf("\n%s / %s (stars: Welch t-test vs %s)\n", key.first.c_str(), key.second.c_str(),
                reference.c_str());
    std::printf("  %-10s %22s\n", "method", "mean +- sd");
    for (const auto &[method, v] : by_method) {
      double m = 0.0;
      for (double x : v)
        m += x;
      m /= static_cast<double>(v.size());
      double sd = 0.0;
      for (double x : v)
        sd += (x - m) * (x - m);
      sd = v.size() > 1 ? std::sqrt(sd / static_cast<double>(v.size() - 1)) : 0.0;
      std::string stars;
      double t = NAN, p = NAN;
      if (ref != by_method.end() && method != reference && v.size() > 1 && ref->second.size() > 1) {
        const auto tt = welch_t_test(ref->second, v);
        t = tt.t;
        p = tt.p;
        stars = tt.stars;
      }
      std::printf("  %-10s %10.4f +- %-8.4f %s\n", method.c_str(), m, sd, stars.c_str());
      csv << key.first << ',' << key.second << ',' << method << ',' << v.size() << ',' << m
          << ',' << sd << ',' << t << ',' << p << ',' << stars << '\n';
    }
  }
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f)
      throw ConfigError(out + ": cannot write");
    f << csv.str();
  }
  return 0;
}

// defaults --------------------------------------------------------------------

int cmd_defaults() {
  TrainRequest t;
  t.benchmark.two_bit.apply_preset(preset_from_string(t.benchmark.preset));
  BenchmarkSpec conf;
  conf.kind = "confounded";
  BenchmarkSpec reg;
  reg.kind = "regression1d";
  reg.regression = regression_from_json(json::object(), "");
  TheoryRequest th = theory_request_from_json(json::object());
  OracleRequest orc = oracle_request_from_json(json::object());
  json d{{"train", to_json(t)},
         {"benchmarks", {to_json(t.benchmark), to_json(conf), to_json(reg)}},
         {"theory", to_json(th)},
         {"oracle", to_json(orc)}};
  std::cout << d.dump(2) << "\n";
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"lipirm: Lipschitz-regularized invariant risk minimization experiments"};
  app.require_subcommand(1);

  Common o;
  auto add_common = [&](CLI::App *c, bool training) {
    c->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
    c->add_option("--out", o.out, "run directory to create")->required();
    c->add_flag("--force", o.force, "replace an existing run directory");
    c->add_option("--seeds", o.seeds, "seed list, e.g. 0-9 or 1,3,5");
    c->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
    if (training) {
      c->add_option("--methods", o.methods, "comma-separated methods");
      c->add_option("--setting", o.setting, "two-bit preset: setting1, setting7, setting13, none");
    }
  };

  auto *gen = app.add_subcommand("gen", "generate a benchmark and write CSV files");
  add_common(gen, false);
  gen->add_option("--setting", o.setting, "two-bit preset");
  auto *tr = app.add_subcommand("train", "train methods over seeds and write a leaderboard");
  add_common(tr, true);
  auto *th = app.add_subcommand("theory", "evaluate the closed-form risk of a 1-D setting");
  add_common(th, false);
  auto *orc = app.add_subcommand("oracle", "grid-search and simulation checks of the analytic optima");
  add_common(orc, false);

  std::string report_dir, reference = "rpo", report_out;
  auto *rep = app.add_subcommand("report", "summarize a training run directory");
  rep->add_option("dir", report_dir, "run directory written by train")->required()->check(CLI::ExistingDirectory);
  rep->add_option("--reference", reference, "method the t-tests compare against");
  rep->add_option("--out", report_out, "write the summary table as CSV");

  auto *defaults = app.add_subcommand("defaults", "print every default configuration as JSON");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen)
      return cmd_gen(o);
    if (*tr)
      return cmd_train(o);
    if (*th)
      return cmd_theory(o);
    if (*orc)
      return cmd_oracle(o);
    if (*rep)
      return cmd_report(report_dir, reference, report_out);
    if (*defaults)
      return cmd_defaults();
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
