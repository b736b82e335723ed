#include "robustbf/instance.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace robustbf {

namespace {

using nlohmann::json;

std::string cell_tag(int m) { return "(m=" + std::to_string(m + 1) + ")"; }
std::string user_tag(int m, int k) { return "(m=" + std::to_string(m + 1) + ",k=" + std::to_string(k + 1) + ")"; }
std::string channel_tag(int m, int n, int k) {
  return "(m=" + std::to_string(m + 1) + ",n=" + std::to_string(n + 1) + ",k=" + std::to_string(k + 1) + ")";
}

CRowVector gaussian_row(std::mt19937_64& rng, int n, double variance) {
  std::normal_distribution<double> g(0.0, std::sqrt(variance / 2.0));
  CRowVector v(n);
  for (int i = 0; i < n; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v[i] = {re, im};
  }
  return v;
}

void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

[[noreturn]] void shape_error(const std::string& what) { throw InvalidArgument("shape mismatch: " + what); }

const json& expect_array(const json& j, size_t n, const std::string& what) {
  if (!j.is_array()) shape_error(what + " is not an array");
  if (j.size() != n)
    shape_error(what + " has " + std::to_string(j.size()) + " entries, expected " + std::to_string(n));
  return j;
}

double expect_number(const json& j, const std::string& what) {
  if (!j.is_number()) shape_error(what + " is not a number");
  return j.get<double>();
}

}  // namespace

NetworkInstance NetworkInstance::with_radius(double eps) const {
  NetworkInstance out = *this;
  for (auto& r : out.radii) r = eps;
  return out;
}

NetworkInstance NetworkInstance::with_power_scale(double gamma) const {
  NetworkInstance out = *this;
  for (auto& p : out.powers) p *= gamma;
  return out;
}

std::vector<std::string> validate(const NetworkInstance& inst) {
  std::vector<std::string> v;
  const NetworkConfig& c = inst.config;
  if (!c.valid()) {
    v.push_back("config dimensions must be positive");
    return v;
  }
  const size_t nch = static_cast<size_t>(c.cells) * c.cells * c.users;
  if (inst.estimates.size() != nch) v.push_back("estimates: expected " + std::to_string(nch) + " channels");
  if (inst.radii.size() != nch) v.push_back("radii: expected " + std::to_string(nch) + " entries");
  if (inst.powers.size() != static_cast<size_t>(c.cells))
    v.push_back("powers: expected " + std::to_string(c.cells) + " entries");
  if (inst.weights.size() != static_cast<size_t>(c.user_count()))
    v.push_back("weights: expected " + std::to_string(c.user_count()) + " entries");
  if (!v.empty()) return v;

  for (int m = 0; m < c.cells; ++m)
    for (int n = 0; n < c.cells; ++n)
      for (int k = 0; k < c.users; ++k) {
        if (inst.h(m, n, k).size() != c.antennas)
          v.push_back("estimate length differs from antenna count at " + channel_tag(m, n, k));
        const double e = inst.eps(m, n, k);
        if (!(e >= 0.0) || !std::isfinite(e)) v.push_back("negative radius at " + channel_tag(m, n, k));
      }
  for (int m = 0; m < c.cells; ++m)
    if (!(inst.power(m) > 0.0) || !std::isfinite(inst.power(m))) v.push_back("non-positive power at cell " + cell_tag(m));
  for (int m = 0; m < c.cells; ++m)
    for (int k = 0; k < c.users; ++k)
      if (!(inst.weight(m, k) > 0.0)) v.push_back("non-positive weight at " + user_tag(m, k));
  for (int m = 0; m < c.cells; ++m)
    for (int k = 0; k < c.users; ++k)
      if (inst.h(m, m, k).size() == c.antennas && !(inst.h(m, m, k).norm() > inst.eps(m, m, k)))
        v.push_back("own-channel radius exceeds estimate norm at " + user_tag(m, k));
  return v;
}

NetworkInstance sample_instance(const NetworkConfig& cfg, const SampleSpec& spec, std::uint64_t seed) {
  if (!cfg.valid()) throw InvalidArgument("sample_instance: invalid config");
  auto pick = [](const std::vector<double>& v, int i, int count, const char* what) {
    if (v.size() == 1) return v[0];
    if (static_cast<int>(v.size()) != count) throw InvalidArgument(std::string("sample_instance: ") + what + " size mismatch");
    return v[i];
  };
  NetworkInstance inst;
  inst.config = cfg;
  const int nch = cfg.cells * cfg.cells * cfg.users;
  inst.radii.assign(nch, spec.radius);
  for (int m = 0; m < cfg.cells; ++m) inst.powers.push_back(pick(spec.powers, m, cfg.cells, "powers"));
  for (int u = 0; u < cfg.user_count(); ++u) inst.weights.push_back(pick(spec.weights, u, cfg.user_count(), "weights"));

  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    inst.estimates.clear();
    for (int i = 0; i < nch; ++i) inst.estimates.push_back(gaussian_row(rng, cfg.antennas, 1.0));
    if (validate(inst).empty()) return inst;
  }
  throw InvalidArgument("sample_instance: rejection limit exceeded (radius too large for the channel draw)");
}

PerturbationSet sample_perturbation(const NetworkInstance& inst, std::uint64_t seed, PerturbationMode mode) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PerturbationSet out;
  out.config = inst.config;
  const int n = inst.config.antennas;
  for (size_t i = 0; i < inst.estimates.size(); ++i) {
    const double eps = inst.radii[i];
    CRowVector d = gaussian_row(rng, n, 1.0);
    double r = eps;
    if (mode == PerturbationMode::interior) r = eps * std::pow(u(rng), 1.0 / (2.0 * n));
    const double nrm = d.norm();
    out.deltas.push_back(eps == 0.0 || nrm == 0.0 ? CRowVector(CRowVector::Zero(n)) : CRowVector(d * (r / nrm)));
  }
  return out;
}

std::string instance_to_json(const NetworkInstance& inst) {
  const NetworkConfig& c = inst.config;
  std::string s = "{\"config\":{\"m\":" + std::to_string(c.cells) + ",\"k\":" + std::to_string(c.users) +
                  ",\"n\":" + std::to_string(c.antennas) + "},\n\"estimates\":[";
  for (int m = 0; m < c.cells; ++m) {
    s += m ? ",[" : "[";
    for (int n = 0; n < c.cells; ++n) {
      s += n ? ",[" : "[";
      for (int k = 0; k < c.users; ++k) {
        s += k ? ",[" : "[";
        const CRowVector& h = inst.h(m, n, k);
        for (int a = 0; a < h.size(); ++a) {
          s += a ? ",[" : "[";
          append_double(s, h[a].real());
          s += ',';
          append_double(s, h[a].imag());
          s += ']';
        }
        s += ']';
      }
      s += ']';
    }
    s += ']';
  }
  s += "],\n\"radii\":[";
  for (int m = 0; m < c.cells; ++m) {
    s += m ? ",[" : "[";
    for (int n = 0; n < c.cells; ++n) {
      s += n ? ",[" : "[";
      for (int k = 0; k < c.users; ++k) {
        if (k) s += ',';
        append_double(s, inst.eps(m, n, k));
      }
      s += ']';
    }
    s += ']';
  }
  s += "],\n\"powers\":[";
  for (int m = 0; m < c.cells; ++m) {
    if (m) s += ',';
    append_double(s, inst.power(m));
  }
  s += "],\n\"weights\":[";
  for (int m = 0; m < c.cells; ++m) {
    s += m ? ",[" : "[";
    for (int k = 0; k < c.users; ++k) {
      if (k) s += ',';
      append_double(s, inst.weight(m, k));
    }
    s += ']';
  }
  s += "]}\n";
  return s;
}

NetworkInstance instance_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("config")) shape_error("missing config object");
  NetworkInstance inst;
  const json& c = j["config"];
  for (const char* key : {"m", "k", "n"})
    if (!c.contains(key) || !c[key].is_number_integer()) shape_error(std::string("config.") + key + " missing");
  inst.config = {c["m"].get<int>(), c["k"].get<int>(), c["n"].get<int>()};
  const NetworkConfig& cfg = inst.config;
  if (!cfg.valid()) shape_error("config dimensions must be positive");
  for (const char* key : {"estimates", "radii", "powers", "weights"})
    if (!j.contains(key)) shape_error(std::string(key) + " missing");

  const size_t M = cfg.cells, K = cfg.users, N = cfg.antennas;
  const json& est = expect_array(j["estimates"], M, "estimates");
  const json& rad = expect_array(j["radii"], M, "radii");
  inst.estimates.resize(M * M * K);
  inst.radii.resize(M * M * K);
  for (size_t m = 0; m < M; ++m) {
    expect_array(est[m], M, "estimates[" + std::to_string(m) + "]");
    expect_array(rad[m], M, "radii[" + std::to_string(m) + "]");
    for (size_t n = 0; n < M; ++n) {
      expect_array(est[m][n], K, "estimates[" + std::to_string(m) + "][" + std::to_string(n) + "]");
      expect_array(rad[m][n], K, "radii[" + std::to_string(m) + "][" + std::to_string(n) + "]");
      for (size_t k = 0; k < K; ++k) {
        const std::string where = "[" + std::to_string(m) + "][" + std::to_string(n) + "][" + std::to_string(k) + "]";
        const json& row = expect_array(est[m][n][k], N, "estimates" + where);
        CRowVector h(N);
        for (size_t a = 0; a < N; ++a) {
          const json& z = expect_array(row[a], 2, "estimates" + where + "[" + std::to_string(a) + "]");
          h[a] = {expect_number(z[0], "estimate entry"), expect_number(z[1], "estimate entry")};
        }
        const int idx = channel_index(cfg, m, n, k);
        inst.estimates[idx] = h;
        inst.radii[idx] = expect_number(rad[m][n][k], "radii" + where);
      }
    }
  }
  const json& pw = expect_array(j["powers"], M, "powers");
  for (size_t m = 0; m < M; ++m) inst.powers.push_back(expect_number(pw[m], "powers entry"));
  const json& wt = expect_array(j["weights"], M, "weights");
  for (size_t m = 0; m < M; ++m) {
    expect_array(wt[m], K, "weights[" + std::to_string(m) + "]");
    for (size_t k = 0; k < K; ++k) inst.weights.push_back(expect_number(wt[m][k], "weights entry"));
  }
  return inst;
}

void save_instance(const NetworkInstance& inst, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << instance_to_json(inst);
}

NetworkInstance load_instance(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return instance_from_json(ss.str());
}

}  // namespace robustbf
