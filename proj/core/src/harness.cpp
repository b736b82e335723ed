#include "robustbf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "harness_internal.hpp"
#include "robustbf/baselines.hpp"
#include "robustbf/distributed.hpp"
#include "robustbf/maxmin.hpp"
#include "robustbf/sumrate.hpp"
#include "robustbf/worst_case.hpp"

namespace robustbf {

using nlohmann::json;

namespace {

const std::vector<std::pair<Algorithm, const char*>> kNames{
    {Algorithm::maxmin_power, "maxmin"},
    {Algorithm::maxmin_mse, "mse-maxmin"},
    {Algorithm::sumrate_ao, "sumrate"},
    {Algorithm::algorithm2, "algorithm2"},
    {Algorithm::algorithm2_greedy, "algorithm2-greedy"},
    {Algorithm::distributed_dual, "distributed"},
    {Algorithm::zf_maxmin, "zf-maxmin"},
    {Algorithm::zf_sumrate, "zf-sumrate"},
    {Algorithm::slinr, "slinr"},
};

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

std::string clean_message(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

}  // namespace

const char* to_string(Algorithm a) {
  for (const auto& [k, name] : kNames)
    if (k == a) return name;
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  for (const auto& [k, name] : kNames)
    if (s == name) return k;
  throw InvalidArgument("unknown algorithm '" + s + "'");
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> all = [] {
    std::vector<Algorithm> v;
    for (const auto& kn : kNames) v.push_back(kn.first);
    return v;
  }();
  return all;
}

std::vector<double> default_gamma_grid() {
  std::vector<double> g;
  for (int db = 0; db <= 40; db += 5) g.push_back(db);
  return g;
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  const NetworkConfig& n = cfg.network;
  if (n.cells < 1 || n.users < 1 || n.antennas < 1) out.push_back("network sizes must be positive");
  if (cfg.radii.empty()) out.push_back("radii must not be empty");
  for (double e : cfg.radii)
    if (!(e >= 0.0) || !std::isfinite(e)) out.push_back("radii must be finite and non-negative");
  if (cfg.gamma_db.empty()) out.push_back("gamma_db must not be empty");
  for (double g : cfg.gamma_db)
    if (!std::isfinite(g)) out.push_back("gamma_db entries must be finite");
  if (!std::isfinite(cfg.power_db)) out.push_back("power_db must be finite");
  if (cfg.seeds.empty()) out.push_back("seeds must not be empty");
  if (cfg.algorithms.empty()) out.push_back("algorithms must not be empty");
  if (cfg.weights.size() != 1 && static_cast<int>(cfg.weights.size()) != n.cells * n.users)
    out.push_back("weights needs one entry or one per user");
  for (double w : cfg.weights)
    if (!(w >= 0.0)) out.push_back("weights must be non-negative");
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) out.push_back("tol must lie in (0, 1)");
  if (cfg.slinr_grid < 0) out.push_back("slinr_grid must be non-negative");
  if (cfg.threads < 0) out.push_back("threads must be non-negative");
  return out;
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const json& v = it.value();
      if (key == "name") {
        c.name = v.get<std::string>();
      } else if (key == "network") {
        for (auto f = v.begin(); f != v.end(); ++f) {
          if (f.key() == "cells") c.network.cells = f.value().get<int>();
          else if (f.key() == "users") c.network.users = f.value().get<int>();
          else if (f.key() == "antennas") c.network.antennas = f.value().get<int>();
          else throw InvalidArgument("unknown network key '" + f.key() + "'");
        }
      } else if (key == "power_db") {
        c.power_db = v.get<double>();
      } else if (key == "radii") {
        c.radii = v.get<std::vector<double>>();
      } else if (key == "gamma_db") {
        c.gamma_db = v.is_string() && v.get<std::string>() == "default" ? default_gamma_grid()
                                                                         : v.get<std::vector<double>>();
      } else if (key == "seeds") {
        if (v.is_object()) {
          const auto start = v.value("start", std::uint64_t{0});
          const auto count = v.at("count").get<std::uint64_t>();
          c.seeds.clear();
          for (std::uint64_t s = 0; s < count; ++s) c.seeds.push_back(start + s);
        } else {
          c.seeds = v.get<std::vector<std::uint64_t>>();
        }
      } else if (key == "algorithms") {
        c.algorithms.clear();
        for (const auto& a : v) c.algorithms.push_back(algorithm_from_string(a.get<std::string>()));
      } else if (key == "weights") {
        c.weights = v.get<std::vector<double>>();
      } else if (key == "tol") {
        c.tol = v.get<double>();
      } else if (key == "slinr_grid") {
        c.slinr_grid = v.get<int>();
      } else if (key == "threads") {
        c.threads = v.get<int>();
      } else if (key == "record_time") {
        c.record_time = v.get<bool>();
      } else if (key == "csv") {
        c.csv_path = v.get<std::string>();
      } else if (key == "summary") {
        c.summary_path = v.get<std::string>();
      } else if (key == "acceptance") {
        // Criterion-specific settings read by the acceptance runner.
      } else {
        throw InvalidArgument("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
  auto problems = validate(c);
  if (!problems.empty()) throw InvalidArgument("invalid config: " + problems.front());
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["network"] = {{"cells", c.network.cells}, {"users", c.network.users}, {"antennas", c.network.antennas}};
  j["power_db"] = c.power_db;
  j["radii"] = c.radii;
  j["gamma_db"] = c.gamma_db;
  j["seeds"] = c.seeds;
  json algos = json::array();
  for (Algorithm a : c.algorithms) algos.push_back(to_string(a));
  j["algorithms"] = algos;
  j["weights"] = c.weights;
  j["tol"] = c.tol;
  j["slinr_grid"] = c.slinr_grid;
  j["threads"] = c.threads;
  j["record_time"] = c.record_time;
  if (!c.csv_path.empty()) j["csv"] = c.csv_path;
  if (!c.summary_path.empty()) j["summary"] = c.summary_path;
  return j.dump(2);
}

ExperimentConfig load_config(const std::string& path) { return config_from_json(detail::read_file(path)); }

NetworkInstance sweep_instance(const ExperimentConfig& cfg, std::uint64_t seed, double eps, double gamma_db) {
  SampleSpec spec;
  spec.radius = 0.0;
  spec.powers = {db_to_linear(cfg.power_db)};
  spec.weights = cfg.weights;
  return sample_instance(cfg.network, spec, seed).with_radius(eps).with_power_scale(db_to_linear(gamma_db));
}

ResultRow run_design(const ExperimentConfig& cfg, const NetworkInstance& inst, Algorithm algo) {
  ResultRow row;
  row.algo = algo;
  BisectionOptions bis;
  bis.delta = cfg.tol;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    PrecoderSet p;
    switch (algo) {
      case Algorithm::maxmin_power: {
        auto r = maxmin_via_power(inst, bis);
        p = r.precoders;
        row.iters = static_cast<int>(r.trace.steps.size());
        break;
      }
      case Algorithm::maxmin_mse: {
        auto r = minmax_mse_gevp(inst, bis);
        p = r.precoders;
        row.iters = static_cast<int>(r.trace.steps.size());
        break;
      }
      case Algorithm::sumrate_ao: {
        auto r = weighted_sumrate_ao(inst);
        p = r.state.precoders;
        row.iters = r.outer_iterations;
        break;
      }
      case Algorithm::algorithm2:
      case Algorithm::algorithm2_greedy: {
        auto r = algo == Algorithm::algorithm2 ? run_algorithm2(inst, bis) : run_algorithm2_greedy(inst, bis);
        p = r.precoders;
        row.iters = r.rounds;
        break;
      }
      case Algorithm::distributed_dual: {
        auto r = distributed_maxmin(inst, bis);
        p = r.precoders;
        row.iters = static_cast<int>(r.trace.steps.size());
        break;
      }
      case Algorithm::zf_maxmin:
        p = zero_forcing(inst, ZfObjective::maxmin);
        break;
      case Algorithm::zf_sumrate:
        p = zero_forcing(inst, ZfObjective::sumrate);
        break;
      case Algorithm::slinr:
        if (cfg.slinr_grid > 0) {
          p = slinr_profile_search(inst, cfg.slinr_grid, bis).precoders;
          row.iters = cfg.slinr_grid;
        } else {
          p = slinr_beamforming(inst, {}, bis);
        }
        break;
    }
    const WorstCaseReport rep = evaluate_design(inst, p);
    row.per_user_rates = rep.certified_rate;
    row.min_rate = rep.min_certified_rate();
    row.sum_rate = weighted_sum(rep.certified_rate, inst.weights);
    if (!std::isfinite(row.min_rate) || !std::isfinite(row.sum_rate)) row.error = "non-finite rate";
  } catch (const std::exception& e) {
    row.error = clean_message(e.what());
  }
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  auto problems = validate(cfg);
  if (!problems.empty()) throw InvalidArgument("invalid config: " + problems.front());
  struct Task {
    std::uint64_t seed;
    double eps, gamma;
    Algorithm algo;
  };
  std::vector<Task> tasks;
  for (auto seed : cfg.seeds)
    for (double e : cfg.radii)
      for (double g : cfg.gamma_db)
        for (Algorithm a : cfg.algorithms) tasks.push_back({seed, e, g, a});
  std::vector<ResultRow> rows(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      const Task& t = tasks[i];
      ResultRow r;
      try {
        r = run_design(cfg, sweep_instance(cfg, t.seed, t.eps, t.gamma), t.algo);
      } catch (const std::exception& e) {
        r.algo = t.algo;
        r.error = clean_message(e.what());
      }
      r.seed = t.seed;
      r.eps = t.eps;
      r.gamma_db = t.gamma;
      rows[i] = std::move(r);
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const size_t n = std::min<size_t>(tasks.size(), cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : hw);
  std::vector<std::thread> pool;
  for (size_t i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

const char* const kCsvHeader = "seed,eps,gamma_db,algo,min_rate,sum_rate,per_user_rates,wall_ms,iters";

std::string rows_to_csv(const std::vector<ResultRow>& rows, bool record_time) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    os << r.seed << ',' << format_number(r.eps) << ',' << format_number(r.gamma_db) << ',' << to_string(r.algo) << ',';
    if (r.ok()) {
      os << format_number(r.min_rate) << ',' << format_number(r.sum_rate) << ',';
      for (size_t i = 0; i < r.per_user_rates.size(); ++i) os << (i ? ";" : "") << format_number(r.per_user_rates[i]);
    } else {
      os << ",,error:" << r.error;
    }
    os << ',' << (record_time ? format_number(std::round(r.wall_ms * 1000.0) / 1000.0) : "0") << ',' << r.iters << '\n';
  }
  return os.str();
}

std::vector<ResultRow> rows_from_csv(const std::string& text) {
  const detail::CsvTable t = detail::parse_csv(text);
  for (const char* col : {"seed", "eps", "gamma_db", "algo", "min_rate", "sum_rate", "per_user_rates", "wall_ms", "iters"})
    t.column(col);
  std::vector<ResultRow> rows;
  for (size_t i = 0; i < t.rows.size(); ++i) {
    ResultRow r;
    r.seed = std::stoull(t.at(i, "seed"));
    r.eps = std::stod(t.at(i, "eps"));
    r.gamma_db = std::stod(t.at(i, "gamma_db"));
    r.algo = algorithm_from_string(t.at(i, "algo"));
    const std::string users = t.at(i, "per_user_rates");
    if (users.rfind("error:", 0) == 0) {
      r.error = users.substr(6);
    } else {
      r.min_rate = std::stod(t.at(i, "min_rate"));
      r.sum_rate = std::stod(t.at(i, "sum_rate"));
      std::istringstream is(users);
      for (std::string x; std::getline(is, x, ';');) r.per_user_rates.push_back(std::stod(x));
    }
    r.wall_ms = std::stod(t.at(i, "wall_ms"));
    r.iters = std::stoi(t.at(i, "iters"));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string summary_json(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
  const auto norm_min = detail::normalized(rows, "min_rate");
  const auto norm_sum = detail::normalized(rows, "sum_rate");
  struct Acc {
    int count = 0, failed = 0, normalized = 0;
    double min_rate = 0, sum_rate = 0, norm_min = 0, norm_sum = 0;
  };
  std::map<std::tuple<int, double, double>, Acc> groups;
  json failures = json::array();
  for (size_t i = 0; i < rows.size(); ++i) {
    const ResultRow& r = rows[i];
    Acc& a = groups[{static_cast<int>(r.algo), r.eps, r.gamma_db}];
    if (!r.ok()) {
      ++a.failed;
      failures.push_back({{"seed", r.seed}, {"eps", r.eps}, {"gamma_db", r.gamma_db}, {"algo", to_string(r.algo)},
                          {"error", r.error}});
      continue;
    }
    ++a.count;
    a.min_rate += r.min_rate;
    a.sum_rate += r.sum_rate;
    if (std::isfinite(norm_min[i]) && std::isfinite(norm_sum[i])) {
      ++a.normalized;
      a.norm_min += norm_min[i];
      a.norm_sum += norm_sum[i];
    }
  }
  json out;
  out["name"] = cfg.name;
  out["rows"] = rows.size();
  out["failures"] = failures;
  json g = json::array();
  for (const auto& [key, a] : groups) {
    json e{{"algo", to_string(static_cast<Algorithm>(std::get<0>(key)))},
           {"eps", std::get<1>(key)},
           {"gamma_db", std::get<2>(key)},
           {"count", a.count},
           {"failed", a.failed}};
    if (a.count > 0) {
      e["mean_min_rate"] = a.min_rate / a.count;
      e["mean_sum_rate"] = a.sum_rate / a.count;
    }
    if (a.normalized > 0) {
      e["mean_normalized_min_rate"] = a.norm_min / a.normalized;
      e["mean_normalized_sum_rate"] = a.norm_sum / a.normalized;
    }
    g.push_back(e);
  }
  out["groups"] = g;
  return out.dump(2);
}

void write_outputs(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows) {
  if (!cfg.csv_path.empty()) detail::write_file(cfg.csv_path, rows_to_csv(rows, cfg.record_time));
  if (!cfg.summary_path.empty()) detail::write_file(cfg.summary_path, summary_json(cfg, rows) + "\n");
}

std::vector<SaturationCurve> snr_saturation_check(const std::vector<ResultRow>& rows, double tol) {
  std::map<std::pair<int, double>, std::map<double, std::map<std::uint64_t, double>>> by;
  for (const ResultRow& r : rows)
    if (r.ok()) by[{static_cast<int>(r.algo), r.eps}][r.gamma_db][r.seed] = r.min_rate;
  std::vector<SaturationCurve> out;
  for (const auto& [key, curve] : by) {
    SaturationCurve s;
    s.algo = static_cast<Algorithm>(key.first);
    s.eps = key.second;
    const std::map<std::uint64_t, double>* prev = nullptr;
    for (const auto& [g, seeds] : curve) {
      double mean = 0.0;
      for (const auto& [seed, v] : seeds) {
        mean += v;
        if (prev) {
          auto it = prev->find(seed);
          if (it != prev->end() && v < it->second - tol) ++s.violations;
        }
      }
      s.gamma_db.push_back(g);
      s.mean_min_rate.push_back(mean / seeds.size());
      prev = &seeds;
    }
    auto gain = [](double from, double to) { return from > 0.0 ? to / from - 1.0 : (to > 0.0 ? HUGE_VAL : 0.0); };
    const size_t n = s.gamma_db.size();
    if (n >= 2) {
      s.last_step_gain = gain(s.mean_min_rate[n - 2], s.mean_min_rate[n - 1]);
      // Latest grid point at least 10 dB below the top of the sweep.
      size_t j = 0;
      for (size_t i = 0; i < n; ++i)
        if (s.gamma_db[i] <= s.gamma_db[n - 1] - 10.0) j = i;
      s.decade_gain = gain(s.mean_min_rate[j], s.mean_min_rate[n - 1]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

namespace detail {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
}

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw InvalidArgument("CSV is missing column '" + name + "'");
}

const std::string& CsvTable::at(size_t row, const std::string& name) const { return rows[row][column(name)]; }

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    size_t start = 0;
    for (size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
      fields.push_back(line.substr(start, pos - start));
    fields.push_back(line.substr(start));
    if (first) {
      t.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != t.header.size()) throw InvalidArgument("CSV row has the wrong number of fields");
      t.rows.push_back(std::move(fields));
    }
  }
  if (first) throw InvalidArgument("CSV has no header");
  return t;
}

std::vector<double> normalized(const std::vector<ResultRow>& rows, const std::string& metric) {
  const bool min = metric == "min_rate";
  if (!min && metric != "sum_rate") throw InvalidArgument("unknown metric '" + metric + "'");
  auto value = [&](const ResultRow& r) { return min ? r.min_rate : r.sum_rate; };
  // Reference: the centralized power route at eps = 0 for the min rate when it was run,
  // otherwise the same algorithm at eps = 0.
  std::map<std::tuple<int, std::uint64_t, double>, double> base;
  bool has_central = false;
  for (const ResultRow& r : rows)
    if (r.ok() && r.eps == 0.0) {
      base[{static_cast<int>(r.algo), r.seed, r.gamma_db}] = value(r);
      has_central |= r.algo == Algorithm::maxmin_power;
    }
  std::vector<double> out;
  for (const ResultRow& r : rows) {
    const int ref = min && has_central ? static_cast<int>(Algorithm::maxmin_power) : static_cast<int>(r.algo);
    auto it = base.find({ref, r.seed, r.gamma_db});
    out.push_back(r.ok() && it != base.end() && it->second > 0.0 ? value(r) / it->second
                                                                 : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

}  // namespace detail

}  // namespace robustbf
