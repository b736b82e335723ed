#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "robustbf/baselines.hpp"
#include "robustbf/distributed.hpp"
#include "robustbf/harness.hpp"
#include "robustbf/maxmin.hpp"
#include "robustbf/sumrate.hpp"
#include "robustbf/worst_case.hpp"

using namespace robustbf;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string instance;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps;
  std::optional<double> snr_db;
  std::optional<double> tol;
  std::string out;
};

void add_common(CLI::App* app, Common& c, bool with_instance = true) {
  app->add_option("--config", c.config, "experiment config (JSON)");
  if (with_instance) app->add_option("--instance", c.instance, "instance file written by 'sample'");
  app->add_option("--seed", c.seed, "channel seed");
  app->add_option("--eps", c.eps, "uncertainty radius for every channel");
  app->add_option("--snr-db", c.snr_db, "per-cell power budget in dB");
  app->add_option("--tol", c.tol, "relative bisection tolerance");
  app->add_option("--out", c.out, "output path");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
}

ExperimentConfig config_of(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.seeds = {*c.seed};
  if (c.eps) cfg.radii = {*c.eps};
  if (c.snr_db) cfg.power_db = *c.snr_db;
  if (c.tol) cfg.tol = *c.tol;
  return cfg;
}

NetworkInstance instance_of(const Common& c) {
  if (!c.instance.empty()) {
    NetworkInstance inst = load_instance(c.instance);
    if (c.eps) inst = inst.with_radius(*c.eps);
    return inst;
  }
  const ExperimentConfig cfg = config_of(c);
  return sweep_instance(cfg, cfg.seeds.front(), cfg.radii.front(), 0.0);
}

json precoders_json(const PrecoderSet& p) {
  json cells = json::array();
  for (const CMatrix& x : p.cells) {
    json rows = json::array();
    for (int i = 0; i < x.rows(); ++i) {
      json row = json::array();
      for (int j = 0; j < x.cols(); ++j) row.push_back({x(i, j).real(), x(i, j).imag()});
      rows.push_back(row);
    }
    cells.push_back(rows);
  }
  return cells;
}

json design_json(const NetworkInstance& inst, const PrecoderSet& p, const std::string& algo) {
  const WorstCaseReport rep = evaluate_design(inst, p);
  json users = json::array();
  for (int m = 0; m < inst.config.cells; ++m)
    for (int k = 0; k < inst.config.users; ++k) {
      const int i = user_index(inst.config, m, k);
      users.push_back({{"cell", m + 1},
                       {"user", k + 1},
                       {"sinr_lower", rep.lower[i]},
                       {"worst_case_mse", rep.mse[i]},
                       {"certified_rate", rep.certified_rate[i]}});
    }
  json j;
  j["algo"] = algo;
  j["min_rate"] = rep.min_certified_rate();
  j["sum_rate"] = weighted_sum(rep.certified_rate, inst.weights);
  j["users"] = users;
  j["precoders"] = precoders_json(p);
  return j;
}

void report(const Common& c, const json& j) {
  std::printf("%s: min rate %.6f nats, sum rate %.6f nats\n", j["algo"].get<std::string>().c_str(),
              j["min_rate"].get<double>(), j["sum_rate"].get<double>());
  if (!c.out.empty()) spit(c.out, j.dump(2) + "\n");
}

BisectionOptions bisection(const Common& c) {
  BisectionOptions o;
  if (c.tol) o.delta = *c.tol;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case robust multi-cell precoder design"};
  app.require_subcommand(1);

  Common c;
  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "check an instance or experiment config file");
  validate_cmd->add_option("file", validate_path, "JSON file")->required();

  NetworkConfig net{2, 2, 2};
  auto* sample_cmd = app.add_subcommand("sample", "draw a random instance");
  add_common(sample_cmd, c, false);
  sample_cmd->add_option("--cells", net.cells, "M");
  sample_cmd->add_option("--users", net.users, "K");
  sample_cmd->add_option("--antennas", net.antennas, "N");

  auto* maxmin_cmd = app.add_subcommand("maxmin", "robust max-min design by bisection on the power problem");
  add_common(maxmin_cmd, c);
  auto* mse_cmd = app.add_subcommand("mse-maxmin", "robust min-max MSE design");
  add_common(mse_cmd, c);
  auto* sumrate_cmd = app.add_subcommand("sumrate", "weighted sum-rate lower bound by alternating optimization");
  add_common(sumrate_cmd, c);

  std::string mode = "dual", log_path;
  auto* dist_cmd = app.add_subcommand("distributed", "limited-cooperation max-min designs");
  add_common(dist_cmd, c);
  dist_cmd->add_option("--mode", mode, "dual | algorithm2 | greedy")
      ->check(CLI::IsMember({"dual", "algorithm2", "greedy"}));
  dist_cmd->add_option("--log", log_path, "event log (JSON lines)");

  std::string kind = "zf-maxmin";
  int grid = 0;
  auto* base_cmd = app.add_subcommand("baseline", "zero-forcing and SLINR comparators");
  add_common(base_cmd, c);
  base_cmd->add_option("--kind", kind, "zf-maxmin | zf-sumrate | slinr")
      ->check(CLI::IsMember({"zf-maxmin", "zf-sumrate", "slinr"}));
  base_cmd->add_option("--grid", grid, "SLINR power-profile grid (0 = equal split)");

  std::string summary_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "run an experiment config");
  add_common(sweep_cmd, c, false);
  sweep_cmd->add_option("--summary", summary_path, "summary JSON path");

  std::string csv_path, figure = "vs-snr", metric = "min_rate", title;
  auto* plot_cmd = app.add_subcommand("plot", "SVG figure from a sweep CSV");
  plot_cmd->add_option("--csv", csv_path, "sweep CSV")->required();
  plot_cmd->add_option("--kind", figure, "vs-snr | per-seed")->check(CLI::IsMember({"vs-snr", "per-seed"}));
  plot_cmd->add_option("--metric", metric, "min_rate | sum_rate")->check(CLI::IsMember({"min_rate", "sum_rate"}));
  plot_cmd->add_option("--title", title, "figure title");
  plot_cmd->add_option("--out", c.out, "SVG path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate_cmd) {
      const json j = json::parse(slurp(validate_path), nullptr, false);
      if (j.is_discarded()) throw InvalidArgument("not valid JSON");
      if (j.is_object() && j.contains("estimates")) {
        auto problems = validate(instance_from_json(j.dump()));
        for (const auto& p : problems) std::printf("invalid: %s\n", p.c_str());
        if (!problems.empty()) return 1;
        std::printf("instance ok\n");
      } else {
        config_from_json(j.dump());
        std::printf("config ok\n");
      }
    } else if (*sample_cmd) {
      ExperimentConfig cfg = config_of(c);
      if (c.config.empty()) cfg.network = net;
      const NetworkInstance inst = sweep_instance(cfg, cfg.seeds.front(), cfg.radii.front(), 0.0);
      spit(c.out, instance_to_json(inst));
    } else if (*maxmin_cmd) {
      const NetworkInstance inst = instance_of(c);
      const MaxMinResult r = maxmin_via_power(inst, bisection(c));
      json j = design_json(inst, r.precoders, "maxmin");
      j["sinr_target"] = r.a;
      j["bisection_steps"] = r.trace.steps.size();
      report(c, j);
    } else if (*mse_cmd) {
      const NetworkInstance inst = instance_of(c);
      const MseResult r = minmax_mse_gevp(inst, bisection(c));
      json j = design_json(inst, r.precoders, "mse-maxmin");
      j["mse_target"] = r.a * r.a;
      j["equalizers"] = r.equalizers.gains;
      report(c, j);
    } else if (*sumrate_cmd) {
      const NetworkInstance inst = instance_of(c);
      const SumRateResult r = weighted_sumrate_ao(inst);
      json j = design_json(inst, r.state.precoders, "sumrate");
      j["lower_bound"] = r.lower_bound;
      j["trace"] = r.state.trace;
      j["converged"] = r.converged;
      report(c, j);
    } else if (*dist_cmd) {
      const NetworkInstance inst = instance_of(c);
      json j;
      if (mode == "dual") {
        const MaxMinResult r = distributed_maxmin(inst, bisection(c));
        j = design_json(inst, r.precoders, "distributed");
        j["sinr_target"] = r.a;
        if (!log_path.empty()) {
          DualOptions d;
          d.record_messages = true;
          spit(log_path, dual_feasibility_check(inst, r.a, d).log.to_jsonl());
        }
      } else {
        const Algorithm2Result r =
            mode == "algorithm2" ? run_algorithm2(inst, bisection(c)) : run_algorithm2_greedy(inst, bisection(c));
        j = design_json(inst, r.precoders, mode == "algorithm2" ? "algorithm2" : "algorithm2-greedy");
        j["committed_min"] = r.committed_min;
        j["rounds"] = r.rounds;
        j["commits"] = r.commits;
        if (!log_path.empty()) spit(log_path, r.log.to_jsonl());
      }
      report(c, j);
    } else if (*base_cmd) {
      const NetworkInstance inst = instance_of(c);
      PrecoderSet p;
      if (kind == "zf-maxmin") p = zero_forcing(inst, ZfObjective::maxmin);
      else if (kind == "zf-sumrate") p = zero_forcing(inst, ZfObjective::sumrate);
      else if (grid > 0) p = slinr_profile_search(inst, grid, bisection(c)).precoders;
      else p = slinr_beamforming(inst, {}, bisection(c));
      report(c, design_json(inst, p, kind));
    } else if (*sweep_cmd) {
      ExperimentConfig cfg = config_of(c);
      if (!c.out.empty()) cfg.csv_path = c.out;
      if (!summary_path.empty()) cfg.summary_path = summary_path;
      const auto rows = run_experiment(cfg);
      write_outputs(cfg, rows);
      if (cfg.csv_path.empty()) std::cout << rows_to_csv(rows, cfg.record_time);
      int failed = 0;
      for (const auto& r : rows) failed += !r.ok();
      std::fprintf(stderr, "%zu rows, %d failed\n", rows.size(), failed);
    } else if (*plot_cmd) {
      FigureSpec spec;
      spec.kind = figure == "per-seed" ? FigureKind::per_seed : FigureKind::vs_snr;
      spec.metric = metric;
      spec.title = title;
      spit(c.out, emit_figure(slurp(csv_path), spec));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
