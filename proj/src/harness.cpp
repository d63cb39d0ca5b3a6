// Copyright 2026 The lqem Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lqem/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "lqem/krylov_core.hpp"

namespace lqem {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Reads the keys of one JSON object and rejects any it did not consume.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ParseError(name_ + ": expected an object");
  }
  ~Section() = default;

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return as<T>(j_.at(key), key);
  }

  template <typename T>
  std::optional<T> optional(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return as<T>(j_.at(key), key);
  }

  template <typename T>
  T as(const json& v, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (v.is_string()) {
          const auto s = v.get<std::string>();
          if (s == "inf" || s == "infinity") return kInf;
          throw ParseError(path(key) + ": expected a number or \"inf\"");
        }
        if (!v.is_number()) throw ParseError(path(key) + ": expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw ParseError(path(key) + ": expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_integer() && !v.is_number_unsigned()) {
            throw ParseError(path(key) + ": expected a non-negative integer");
          }
        }
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ParseError(path(key) + ": " + e.what());
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ParseError(path(key) + ": unknown key");
    }
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string require_file(const fs::path& base, const std::string& p, const std::string& key) {
  const fs::path full = resolve(base, p);
  if (!fs::is_regular_file(full)) throw ParseError(key + ": file not found: " + full.string());
  return full.string();
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::Bare, Method::Lanczos, Method::CubeRoot, Method::Wls, Method::FixedRatio}) {
    if (to_string(m) == s) return m;
  }
  throw ParseError("mitigation.estimators: unknown estimator '" + s + "'");
}

ZneEstimator parse_zne_estimator(const std::string& s) {
  if (s == "bare") return ZneEstimator::Bare;
  if (s == "lanczos") return ZneEstimator::Lanczos;
  throw ParseError("zne.estimators: unknown estimator '" + s + "'");
}

ReadoutError parse_readout_entry(const json& v, const std::string& where) {
  if (v.is_number()) return ReadoutError::symmetric(v.get<double>());
  Section s(v, where);
  ReadoutError r;
  r.p1_given_0 = s.get<double>("p1_given_0", 0.0);
  r.p0_given_1 = s.get<double>("p0_given_1", 0.0);
  s.finish();
  return r;
}

NoiseModel parse_noise(const json& j, int n_qubits) {
  Section s(j, "noise");
  NoiseModel n;
  n.p_depol_1q = s.get<double>("p_depol_1q", 0.0);
  n.p_depol_2q = s.get<double>("p_depol_2q", 0.0);
  n.tau1 = s.get<double>("tau1", kInf);
  n.tau2 = s.get<double>("tau2", kInf);
  n.gate_time_1q = s.get<double>("gate_time_1q", 0.0);
  n.gate_time_2q = s.get<double>("gate_time_2q", 0.0);
  n.thermal_population = s.get<double>("thermal_population", 1.0);
  if (s.has("readout")) {
    const json& r = s.at("readout");
    if (r.is_array()) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        n.readout.push_back(parse_readout_entry(r[i], "noise.readout[" + std::to_string(i) + "]"));
      }
    } else {
      n.readout.assign(static_cast<std::size_t>(n_qubits), parse_readout_entry(r, "noise.readout"));
    }
  }
  s.finish();
  try {
    n.validate(n_qubits);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("noise: ") + e.what());
  }
  return n;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// Runs body(i) for i in [0, n) on up to `threads` workers; the first exception
// is rethrown after all workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Shared state of one command invocation.
struct Context {
  const ExperimentConfig& config;
  const RunOptions& options;
  std::uint64_t seed = 0;
  std::string hash;
  fs::path out_dir;

  std::ostream& log() const { return options.log ? *options.log : std::cerr; }
  std::optional<std::uint64_t> shots(std::optional<std::uint64_t> configured) const {
    return options.exact ? std::nullopt : configured;
  }
  NoiseModel noise() const { return config.noise.value_or(NoiseModel{}); }
  std::span<const ReadoutError> readout() const {
    return config.noise ? std::span<const ReadoutError>(config.noise->readout)
                        : std::span<const ReadoutError>{};
  }
  BootstrapOptions bootstrap(std::uint64_t s) const {
    return {config.mitigation.n_bootstrap, s};
  }
};

Context make_context(const ExperimentConfig& config, const RunOptions& options, bool needs_seed) {
  Context ctx{config, options, 0, {}, {}};
  const auto seed = options.seed ? options.seed : config.seed;
  if (!seed && needs_seed) {
    throw ParseError("a master seed is required for this run (config \"seed\" or --seed)");
  }
  ctx.seed = seed.value_or(0);
  ctx.hash = config.hash();
  ctx.out_dir = options.out_dir ? *options.out_dir : fs::path(config.output_dir);
  fs::create_directories(ctx.out_dir);
  return ctx;
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw std::runtime_error("cannot write " + path.string());
    os_ << std::setprecision(17);
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }

  template <typename... Ts>
  void row(const Ts&... cells) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
    os_ << '\n';
  }

 private:
  template <typename T>
  static const T& cell(const T& v) { return v; }
  static std::string cell(bool v) { return v ? "true" : "false"; }
  static std::string cell(const std::optional<double>& v) {
    if (!v) return "";
    std::ostringstream os;
    os << std::setprecision(17) << *v;
    return os.str();
  }

  std::ofstream os_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

json opt_json(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return *v;
}

AnsatzSpec ansatz_for(const ExperimentConfig& config, const PauliSum& h) {
  return {h.n_qubits(), config.n_entangling_layers};
}

Eigen::VectorXd resolve_theta(const Context& ctx, const AnsatzSpec& spec) {
  fs::path path;
  if (ctx.options.theta_file) {
    path = *ctx.options.theta_file;
  } else if (ctx.config.theta_file) {
    path = *ctx.config.theta_file;
  } else if (fs::exists(ctx.out_dir / "theta_opt.json")) {
    path = ctx.out_dir / "theta_opt.json";
  } else {
    throw ParseError("no optimal parameters: pass --theta, set \"theta_file\" or run run-vqe first");
  }
  Eigen::VectorXd theta = read_theta_file(path);
  if (static_cast<std::size_t>(theta.size()) != spec.parameter_count()) {
    throw ParseError(path.string() + ": expected " + std::to_string(spec.parameter_count()) +
                     " parameters for this ansatz, found " + std::to_string(theta.size()));
  }
  return theta;
}

DensityMatrix prepare_state(const Context& ctx, const AnsatzSpec& spec,
                            const Eigen::VectorXd& theta) {
  const Circuit c = build_ansatz(spec, theta);
  return ctx.config.noise ? run_circuit(c, *ctx.config.noise) : run_circuit(c);
}

MitigatedEstimate plain_bare(const MomentSet& ms) {
  MitigatedEstimate e;
  e.energy = ms.bare();
  e.method = Method::Bare;
  e.a0 = 1.0;
  e.a1 = 0.0;
  e.condition_value = 1.0;
  if (ms.order() >= 2) e.degenerate = core::lanczos_2x2(ms.value(1), ms.value(2), ms.value(3)).degenerate;
  return e;
}

MitigatedEstimate lanczos_of_order(const MomentSet& ms, int m, const BootstrapOptions& b) {
  return m == 2 ? lanczos_m2(ms.truncated(2), b) : lanczos_general(ms, m, b);
}

// Default cap between the Lanczos and the bare uncertainty.
double default_sigma_max(const MomentSet& ms, const MitigatedEstimate& lanczos) {
  const double lo = lanczos.energy.std_error;
  const double hi = ms.std_error(1);
  if (lo <= 0.0 || hi <= 0.0) return std::max(lo, hi);
  return std::sqrt(lo * hi);
}

json estimate_json(const MitigatedEstimate& e, const std::string& name) {
  return {{"method", name},
          {"energy", e.energy.value},
          {"stderr", e.energy.std_error},
          {"a0", opt_json(e.a0)},
          {"a1", opt_json(e.a1)},
          {"ratio", opt_json(e.ratio())},
          {"condition_value", opt_json(e.condition_value)},
          {"degenerate", e.degenerate},
          {"discard", e.discard},
          {"infeasible", e.infeasible}};
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  Section top(doc, "config");
  if (!top.has("schema_version")) throw ParseError("config.schema_version: missing");
  c.schema_version = top.as<int>(top.at("schema_version"), "schema_version");
  if (c.schema_version != kConfigSchemaVersion) {
    throw ParseError("config.schema_version: unsupported version " +
                     std::to_string(c.schema_version));
  }
  c.seed = top.optional<std::uint64_t>("seed");
  c.output_dir = top.get<std::string>("output_dir", "out");

  int n_qubits = 4;
  if (top.has("model")) {
    Section m(top.at("model"), "config.model");
    const auto type = m.get<std::string>("type", "tetrahedron");
    if (type == "tetrahedron") {
      c.model.kind = ModelSpec::Kind::HeisenbergTetrahedron;
      c.model.J = m.get<double>("J", 1.0);
      c.model.J_prime = m.get<double>("J_prime", c.model.J);
    } else if (type == "pauli_file") {
      c.model.kind = ModelSpec::Kind::PauliFile;
      if (!m.has("path")) throw ParseError("config.model.path: missing");
      c.model.path = require_file(base_dir, m.get<std::string>("path", ""), "config.model.path");
      n_qubits = load_pauli_file(c.model.path).n_qubits();
    } else {
      throw ParseError("config.model.type: expected \"tetrahedron\" or \"pauli_file\"");
    }
    m.finish();
  }

  if (top.has("ansatz")) {
    Section a(top.at("ansatz"), "config.ansatz");
    c.n_entangling_layers = a.get<int>("n_entangling_layers", 1);
    a.finish();
    if (c.n_entangling_layers < 0) throw ParseError("config.ansatz.n_entangling_layers: negative");
  }

  if (top.has("vqe")) {
    Section v(top.at("vqe"), "config.vqe");
    c.vqe.n_init = v.get<int>("n_init", 5);
    c.vqe.n_vqe = v.get<int>("n_vqe", 1);
    c.vqe.spsa.n_steps = v.get<int>("n_steps", c.vqe.spsa.n_steps);
    c.vqe.n_shots = v.optional<std::uint64_t>("n_shots");
    c.vqe_with_noise = v.get<bool>("with_noise", true);
    if (v.has("spsa")) {
      Section s(v.at("spsa"), "config.vqe.spsa");
      c.vqe.spsa.a = s.optional<double>("a");
      c.vqe.spsa.c = s.get<double>("c", c.vqe.spsa.c);
      c.vqe.spsa.A = s.optional<double>("A");
      c.vqe.spsa.alpha = s.get<double>("alpha", c.vqe.spsa.alpha);
      c.vqe.spsa.gamma = s.get<double>("gamma", c.vqe.spsa.gamma);
      s.finish();
    }
    v.finish();
    try {
      c.vqe.validate();
    } catch (const ContractError& e) {
      throw ParseError(std::string("config.vqe: ") + e.what());
    }
  }

  if (top.has("noise")) c.noise = parse_noise(top.at("noise"), n_qubits);

  if (top.has("mitigation")) {
    Section m(top.at("mitigation"), "config.mitigation");
    auto& s = c.mitigation;
    s.order = m.get<int>("order", 2);
    if (m.has("n_shots")) s.n_shots = m.as<std::uint64_t>(m.at("n_shots"), "n_shots");
    s.sigma_max = m.optional<double>("sigma_max");
    s.fixed_ratio = m.optional<double>("fixed_ratio");
    s.n_repeat = m.get<int>("n_repeat", s.n_repeat);
    s.n_bootstrap = m.get<int>("n_bootstrap", s.n_bootstrap);
    if (m.has("estimators")) {
      s.estimators.clear();
      for (const auto& e : m.at("estimators")) s.estimators.push_back(parse_method(m.as<std::string>(e, "estimators")));
    }
    m.finish();
    if (s.order < 2) throw ParseError("config.mitigation.order: must be >= 2");
    if (s.n_repeat < 1) throw ParseError("config.mitigation.n_repeat: must be >= 1");
    if (s.n_bootstrap < 2) throw ParseError("config.mitigation.n_bootstrap: must be >= 2");
    if (s.n_shots && *s.n_shots == 0) throw ParseError("config.mitigation.n_shots: must be positive");
  }

  if (top.has("zne")) {
    Section z(top.at("zne"), "config.zne");
    auto& s = c.zne;
    if (z.has("fold_factors")) s.zne.fold_factors = z.as<std::vector<int>>(z.at("fold_factors"), "fold_factors");
    s.zne.degree = z.get<int>("degree", 1);
    if (z.get<bool>("richardson", false)) {
      s.zne.degree = ZneConfig::richardson_degree(s.zne.fold_factors.size());
    }
    if (z.has("n_shots")) s.zne.n_shots = z.as<std::uint64_t>(z.at("n_shots"), "n_shots");
    s.zne.shot_multiplier = z.get<int>("shot_multiplier", 1);
    if (z.has("estimators")) {
      s.estimators.clear();
      for (const auto& e : z.at("estimators")) s.estimators.push_back(parse_zne_estimator(z.as<std::string>(e, "estimators")));
    }
    s.n_repetitions = z.get<int>("n_repetitions", 1);
    s.budget_compare = z.get<bool>("budget_compare", true);
    z.finish();
    try {
      s.zne.validate();
    } catch (const ContractError& e) {
      throw ParseError(std::string("config.zne: ") + e.what());
    }
    if (s.n_repetitions < 1) throw ParseError("config.zne.n_repetitions: must be >= 1");
  }

  if (top.has("histogram")) {
    Section h(top.at("histogram"), "config.histogram");
    c.histogram_repetitions = h.get<int>("n_repetitions", c.histogram_repetitions);
    h.finish();
    if (c.histogram_repetitions < 1) throw ParseError("config.histogram.n_repetitions: must be >= 1");
  }

  if (top.has("sweep")) {
    Section s(top.at("sweep"), "config.sweep");
    if (s.has("values")) c.sweep.values = s.as<std::vector<double>>(s.at("values"), "values");
    if (s.has("files")) {
      for (const auto& f : s.as<std::vector<std::string>>(s.at("files"), "files")) {
        c.sweep.files.push_back(require_file(base_dir, f, "config.sweep.files"));
      }
    }
    if (s.has("sigma_max_grid")) {
      c.sweep.sigma_max_grid = s.as<std::vector<double>>(s.at("sigma_max_grid"), "sigma_max_grid");
    }
    s.finish();
    if (!c.sweep.values.empty() && !c.sweep.files.empty()) {
      throw ParseError("config.sweep: give either values or files, not both");
    }
  }

  if (top.has("scaling")) {
    Section s(top.at("scaling"), "config.scaling");
    if (s.has("files")) {
      for (const auto& f : s.as<std::vector<std::string>>(s.at("files"), "files")) {
        c.scaling_files.push_back(require_file(base_dir, f, "config.scaling.files"));
      }
    }
    s.finish();
  }

  if (top.has("theta_file")) {
    c.theta_file = require_file(base_dir, top.get<std::string>("theta_file", ""), "config.theta_file");
  }
  top.finish();
  c.canonical = doc.dump();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.parent_path());
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(canonical); }

bool ExperimentConfig::any_sampling() const {
  return vqe.n_shots || mitigation.n_shots || zne.zne.n_shots;
}

Eigen::VectorXd read_theta_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("theta: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("theta") || !j["theta"].is_array()) {
    throw ParseError(path.string() + ": expected an object with a \"theta\" array");
  }
  const auto v = j["theta"].get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

CommandResult cmd_run_vqe(const ExperimentConfig& config, const RunOptions& options) {
  const Context ctx = make_context(config, options, true);
  const PauliSum h = build_model(config.model);
  const AnsatzSpec spec = ansatz_for(config, h);
  VqeConfig vqe = config.vqe;
  vqe.seed = ctx.seed;
  vqe.n_threads = options.threads;
  vqe.n_shots = ctx.shots(config.vqe.n_shots);
  std::optional<NoiseModel> noise;
  if (config.vqe_with_noise) noise = config.noise;
  const VqeResult result = run_vqe(h, spec, vqe, noise);

  CommandResult out;
  std::vector<double> theta(result.theta_opt.data(), result.theta_opt.data() + result.theta_opt.size());
  const json doc = {{"schema_version", kConfigSchemaVersion},
                    {"seed", ctx.seed},
                    {"config_hash", ctx.hash},
                    {"n_qubits", spec.n_qubits},
                    {"n_entangling_layers", spec.n_entangling_layers},
                    {"energy", result.energy.value},
                    {"stderr", result.energy.std_error},
                    {"best_restart", result.best_restart},
                    {"theta", theta}};
  out.files.push_back(ctx.out_dir / "theta_opt.json");
  write_json(out.files.back(), doc);

  out.files.push_back(ctx.out_dir / "vqe_trace.csv");
  CsvWriter trace(out.files.back(),
                  {"restart", "step", "energy", "stderr", "best", "method", "seed", "config_hash"});
  for (std::size_t r = 0; r < result.restarts.size(); ++r) {
    for (const auto& row : result.restarts[r].result.trace) {
      trace.row(r, row.step, row.energy, row.std_error, row.best, std::string("spsa"), ctx.seed, ctx.hash);
    }
  }
  out.files.push_back(ctx.out_dir / "vqe_restarts.csv");
  CsvWriter restarts(out.files.back(), {"restart", "start_energy", "final_energy", "final_stderr",
                                        "best", "method", "seed", "config_hash"});
  for (std::size_t r = 0; r < result.restarts.size(); ++r) {
    const auto& rs = result.restarts[r];
    restarts.row(r, rs.start_energy.value, rs.result.energy.value, rs.result.energy.std_error,
                 r == result.best_restart, std::string("spsa"), ctx.seed, ctx.hash);
  }
  ctx.log() << "run-vqe: energy " << result.energy.value << " (restart " << result.best_restart
            << ")\n";
  return out;
}

CommandResult cmd_mitigate(const ExperimentConfig& config, const RunOptions& options) {
  const bool sampled = !options.exact && config.mitigation.n_shots.has_value();
  const Context ctx = make_context(config, options, sampled);
  const auto& ms_cfg = config.mitigation;
  const PauliSum h = build_model(config.model);
  const AnsatzSpec spec = ansatz_for(config, h);
  const Eigen::VectorXd theta = resolve_theta(ctx, spec);
  const DensityMatrix rho = prepare_state(ctx, spec, theta);
  const MomentOperators ops = moment_operators(h, ms_cfg.order);
  const MomentExpectations exp = moment_expectations(rho, ops, ctx.readout());
  const auto shots = ctx.shots(ms_cfg.n_shots);
  const MomentSet ms = sample_moments(exp, shots, split_seed(ctx.seed, 0));
  const BootstrapOptions boot = ctx.bootstrap(split_seed(ctx.seed, 1));

  const MitigatedEstimate lanczos = lanczos_of_order(ms, ms_cfg.order, boot);
  std::vector<std::pair<std::string, MitigatedEstimate>> results;
  std::optional<double> sigma_used;
  for (const Method m : ms_cfg.estimators) {
    switch (m) {
      case Method::Bare:
        results.emplace_back("bare", plain_bare(ms));
        break;
      case Method::Lanczos:
        results.emplace_back("lanczos", lanczos);
        break;
      case Method::CubeRoot:
        results.emplace_back("cube_root", cube_root(ms, boot));
        break;
      case Method::Wls: {
        std::vector<MitigatedEstimate> reps;
        for (int r = 0; r < ms_cfg.n_repeat; ++r) {
          const std::uint64_t s = split_seed(ctx.seed, 100 + static_cast<std::uint64_t>(r));
          reps.push_back(lanczos_of_order(sample_moments(exp, shots, s), ms_cfg.order,
                                          ctx.bootstrap(split_seed(s, 1))));
        }
        results.emplace_back("wls", wls_average(reps));
        break;
      }
      case Method::FixedRatio:
        if (ms_cfg.fixed_ratio) {
          results.emplace_back("fixed_ratio", fixed_ratio_estimate(ms, *ms_cfg.fixed_ratio, boot));
        } else {
          sigma_used = ms_cfg.sigma_max.value_or(default_sigma_max(ms, lanczos));
          results.emplace_back("fixed_ratio", constrained_select(ms, *sigma_used, boot));
        }
        break;
    }
  }

  const double noiseless = exact_expectation(run_circuit(build_ansatz(spec, theta)), h);
  json moments = json::array();
  for (int l = 1; l <= ms.max_power(); ++l) {
    moments.push_back({{"power", l}, {"value", ms.value(l)}, {"stderr", ms.std_error(l)}});
  }
  json estimates = json::array();
  for (const auto& [name, e] : results) estimates.push_back(estimate_json(e, name));
  json doc = {{"schema_version", kConfigSchemaVersion},
              {"seed", ctx.seed},
              {"config_hash", ctx.hash},
              {"mode", shots ? "sampled" : "exact"},
              {"n_shots", shots ? json(*shots) : json(nullptr)},
              {"order", ms_cfg.order},
              {"sigma_max", opt_json(sigma_used)},
              {"reference", {{"ground_energy", ground_energy(h)}, {"noiseless_energy", noiseless}}},
              {"moments", moments},
              {"estimates", estimates}};
  CommandResult out;
  out.files.push_back(ctx.out_dir / "mitigation.json");
  write_json(out.files.back(), doc);
  out.files.push_back(ctx.out_dir / "mitigation.csv");
  CsvWriter csv(out.files.back(),
                {"method", "energy", "stderr", "a0", "a1", "condition_value", "degenerate",
                 "discard", "infeasible", "seed", "config_hash"});
  for (const auto& [name, e] : results) {
    csv.row(name, e.energy.value, e.energy.std_error, e.a0, e.a1, e.condition_value, e.degenerate,
            e.discard, e.infeasible, ctx.seed, ctx.hash);
  }
  return out;
}

CommandResult cmd_histogram(const ExperimentConfig& config, const RunOptions& options) {
  const Context ctx = make_context(config, options, !options.exact);
  const PauliSum h = build_model(config.model);
  const AnsatzSpec spec = ansatz_for(config, h);
  const Eigen::VectorXd theta = resolve_theta(ctx, spec);
  const DensityMatrix rho = prepare_state(ctx, spec, theta);
  const MomentExpectations exp = moment_expectations(rho, moment_operators(h, 2), ctx.readout());
  const auto shots = ctx.shots(config.mitigation.n_shots);
  const auto n = static_cast<std::size_t>(config.histogram_repetitions);

  std::vector<std::array<MitigatedEstimate, 3>> rows(n);
  parallel_for(n, options.threads, [&](std::size_t r) {
    const std::uint64_t s = split_seed(ctx.seed, r);
    const MomentSet ms = sample_moments(exp, shots, split_seed(s, 0));
    const BootstrapOptions boot = ctx.bootstrap(split_seed(s, 1));
    rows[r] = {plain_bare(ms), lanczos_m2(ms, boot), cube_root(ms, boot)};
  });

  CommandResult out;
  out.files.push_back(ctx.out_dir / "histogram.csv");
  CsvWriter csv(out.files.back(), {"repetition", "method", "energy", "stderr", "degenerate",
                                   "ground_energy", "seed", "config_hash"});
  const double e0 = ground_energy(h);
  const char* names[] = {"bare", "lanczos", "cube_root"};
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < 3; ++k) {
      csv.row(r, std::string(names[k]), rows[r][k].energy.value, rows[r][k].energy.std_error,
              rows[r][k].degenerate, e0, ctx.seed, ctx.hash);
    }
  }
  return out;
}

CommandResult cmd_zne(const ExperimentConfig& config, const RunOptions& options) {
  const bool sampled = !options.exact && config.zne.zne.n_shots.has_value();
  const Context ctx = make_context(config, options, sampled);
  const PauliSum h = build_model(config.model);
  const AnsatzSpec spec = ansatz_for(config, h);
  const Eigen::VectorXd theta = resolve_theta(ctx, spec);
  const Circuit circuit = build_ansatz(spec, theta);
  const NoiseModel noise = ctx.noise();
  ZneConfig zcfg = config.zne.zne;
  zcfg.n_shots = ctx.shots(zcfg.n_shots);
  if (circuit.count_cz() == 0) ctx.log() << "zne: warning: circuit has no CZ gates, folding has no effect\n";

  CommandResult out;
  out.files.push_back(ctx.out_dir / "zne_points.csv");
  CsvWriter points_csv(out.files.back(), {"repetition", "factor", "energy", "stderr", "method",
                                          "seed", "config_hash"});
  struct Fit {
    std::size_t repetition;
    std::string method;
    Extrapolation fit;
  };
  std::vector<Fit> fits;
  std::optional<std::uint64_t> shots = zcfg.n_shots;
  if (shots) *shots *= static_cast<std::uint64_t>(zcfg.shot_multiplier);
  for (std::size_t k = 0; k < config.zne.estimators.size(); ++k) {
    const ZneEstimator est = config.zne.estimators[k];
    const auto folds = prepare_folds(circuit, h, noise, zcfg.fold_factors, est);
    const auto n = static_cast<std::size_t>(config.zne.n_repetitions);
    std::vector<std::vector<ZnePoint>> reps(n);
    parallel_for(n, options.threads, [&](std::size_t r) {
      const std::uint64_t s = split_seed(split_seed(ctx.seed, k), r);
      reps[r] = sample_folds(folds, est, shots, s, ctx.bootstrap(split_seed(s, 1)));
    });
    for (std::size_t r = 0; r < n; ++r) {
      for (const auto& p : reps[r]) {
        points_csv.row(r, p.fold_factor, p.energy.value, p.energy.std_error, p.method, ctx.seed, ctx.hash);
      }
      fits.push_back({r, to_string(est), extrapolate(reps[r], zcfg.degree)});
    }
  }

  out.files.push_back(ctx.out_dir / "zne_extrapolation.csv");
  CsvWriter fit_csv(out.files.back(), {"repetition", "method", "degree", "intercept", "stderr",
                                       "slope", "noiseless_energy", "seed", "config_hash"});
  const double noiseless = exact_expectation(run_circuit(circuit), h);
  for (const auto& f : fits) {
    const std::optional<double> slope =
        f.fit.coefficients.size() > 1 ? std::optional<double>(f.fit.coefficients(1)) : std::nullopt;
    fit_csv.row(f.repetition, f.method, zcfg.degree, f.fit.intercept.value, f.fit.intercept.std_error,
                slope, noiseless, ctx.seed, ctx.hash);
  }

  if (config.zne.budget_compare && zcfg.n_shots) {
    const BudgetComparison cmp =
        budget_matched_compare(circuit, h, noise, zcfg, *zcfg.n_shots, config.zne.n_repetitions,
                               split_seed(ctx.seed, 0xb0d9e7), ctx.bootstrap(split_seed(ctx.seed, 2)));
    out.files.push_back(ctx.out_dir / "zne_budget.csv");
    CsvWriter b(out.files.back(), {"method", "mean", "std", "n_repetitions", "n_strings",
                                   "shots_per_string", "budget", "seed", "config_hash"});
    const auto& p = cmp.plan;
    const std::size_t lanczos_strings = p.lanczos_strings[0] + p.lanczos_strings[1] + p.lanczos_strings[2];
    b.row(std::string("bare"), cmp.mean(cmp.bare), cmp.std_dev(cmp.bare), cmp.bare.size(),
          p.lanczos_strings[0], p.lanczos_shots, p.lanczos_strings[0] * p.lanczos_shots, ctx.seed, ctx.hash);
    b.row(std::string("lanczos"), cmp.mean(cmp.lanczos), cmp.std_dev(cmp.lanczos), cmp.lanczos.size(),
          lanczos_strings, p.lanczos_shots, p.lanczos_budget, ctx.seed, ctx.hash);
    b.row(std::string("zne"), cmp.mean(cmp.zne), cmp.std_dev(cmp.zne), cmp.zne.size(), p.zne_strings,
          p.zne_shots, p.zne_budget, ctx.seed, ctx.hash);
  }
  return out;
}

CommandResult cmd_sweep(const ExperimentConfig& config, const RunOptions& options) {
  const Context ctx = make_context(config, options, true);
  struct Point {
    double parameter = 0.0;
    std::string label;
    PauliSum h;
  };
  std::vector<Point> points;
  if (!config.sweep.files.empty()) {
    for (std::size_t i = 0; i < config.sweep.files.size(); ++i) {
      points.push_back({static_cast<double>(i), config.sweep.files[i], load_pauli_file(config.sweep.files[i])});
    }
  } else {
    if (config.model.kind != ModelSpec::Kind::HeisenbergTetrahedron) {
      throw ParseError("config.sweep.values: coupling sweeps need the tetrahedron model");
    }
    for (double v : config.sweep.values) {
      points.push_back({v, "", build_tetrahedron(config.model.J, v * config.model.J)});
    }
  }
  if (points.empty()) throw ParseError("config.sweep: empty grid");

  const auto shots = ctx.shots(config.mitigation.n_shots);
  struct Result {
    double ground = 0.0;
    double vqe = 0.0;
    SweepPoint sweep;
    MitigatedEstimate lanczos;
  };
  std::vector<Result> results(points.size());
  parallel_for(points.size(), options.threads, [&](std::size_t i) {
    const std::uint64_t s = split_seed(ctx.seed, i);
    const PauliSum& h = points[i].h;
    const AnsatzSpec spec = ansatz_for(config, h);
    VqeConfig vqe = config.vqe;
    vqe.seed = split_seed(s, 0);
    vqe.n_shots = ctx.shots(config.vqe.n_shots);
    std::optional<NoiseModel> noise;
    if (config.vqe_with_noise) noise = config.noise;
    const VqeResult v = run_vqe(h, spec, vqe, noise);
    const DensityMatrix rho = prepare_state(ctx, spec, v.theta_opt);
    Result& r = results[i];
    r.ground = ground_energy(h);
    r.vqe = v.energy.value;
    r.sweep = {points[i].parameter, measure_moments(rho, moment_operators(h, 2), shots, ctx.readout(),
                                                    split_seed(s, 1))};
    r.lanczos = lanczos_m2(r.sweep.moments, ctx.bootstrap(split_seed(s, 2)));
  });

  std::vector<SweepPoint> sweep;
  for (const auto& r : results) sweep.push_back(r.sweep);
  std::vector<double> grid = config.sweep.sigma_max_grid;
  if (grid.empty()) {
    double lo = kInf, hi = 0.0;
    for (const auto& r : results) {
      if (r.lanczos.energy.std_error > 0.0) lo = std::min(lo, r.lanczos.energy.std_error);
      hi = std::max(hi, r.lanczos.energy.std_error);
      if (r.sweep.moments.std_error(1) > 0.0) lo = std::min(lo, r.sweep.moments.std_error(1));
    }
    if (std::isfinite(lo) && hi > 0.0) {
      const int n = 16;
      for (int k = 0; k < n; ++k) {
        grid.push_back(0.5 * lo * std::pow(2.0 * hi / (0.5 * lo), static_cast<double>(k) / (n - 1)));
      }
    } else {
      grid.push_back(0.0);
    }
  }
  if (points.size() < 2) ctx.log() << "sweep: warning: single-point grid, the level-distance table is empty\n";
  const DeltaHProfile profile = delta_h_profile(sweep, grid, ctx.bootstrap(split_seed(ctx.seed, 0x5eed)));

  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].parameter < points[b].parameter; });

  CommandResult out;
  out.files.push_back(ctx.out_dir / "sweep_points.csv");
  CsvWriter csv(out.files.back(), {"parameter", "label", "method", "energy", "stderr",
                                   "ground_energy", "seed", "config_hash"});
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    const auto& r = results[i];
    const auto& p = points[i];
    csv.row(p.parameter, p.label, std::string("exact"), r.ground, 0.0, r.ground, ctx.seed, ctx.hash);
    csv.row(p.parameter, p.label, std::string("vqe"), r.vqe, 0.0, r.ground, ctx.seed, ctx.hash);
    csv.row(p.parameter, p.label, std::string("bare"), r.sweep.moments.value(1),
            r.sweep.moments.std_error(1), r.ground, ctx.seed, ctx.hash);
    csv.row(p.parameter, p.label, std::string("lanczos"), r.lanczos.energy.value,
            r.lanczos.energy.std_error, r.ground, ctx.seed, ctx.hash);
    if (!profile.recommended.empty()) {
      const auto& e = profile.recommended[k];
      csv.row(p.parameter, p.label, std::string("constrained"), e.energy.value, e.energy.std_error,
              r.ground, ctx.seed, ctx.hash);
    }
  }
  out.files.push_back(ctx.out_dir / "sweep_delta_h.csv");
  CsvWriter d(out.files.back(), {"sigma_max", "delta", "mean_stderr", "n_infeasible", "bare_delta",
                                 "recommended", "seed", "config_hash"});
  for (const auto& row : profile.rows) {
    d.row(row.sigma_max, row.delta, row.mean_std_error, row.n_infeasible, profile.bare_delta,
          profile.recommended_sigma_max && *profile.recommended_sigma_max == row.sigma_max, ctx.seed,
          ctx.hash);
  }
  return out;
}

CommandResult cmd_scaling(const ExperimentConfig& config, const RunOptions& options) {
  const Context ctx = make_context(config, options, false);
  std::vector<std::string> files = config.scaling_files;
  for (const auto& f : options.inputs) {
    if (!fs::is_regular_file(f)) throw ParseError("scaling: file not found: " + f);
    files.push_back(f);
  }
  if (files.empty()) throw ParseError("scaling: no Hamiltonian files given");

  std::vector<TermCountReport> reports;
  for (const auto& f : files) reports.push_back(count_terms_report(load_pauli_file(f)));

  CommandResult out;
  out.files.push_back(ctx.out_dir / "scaling.csv");
  CsvWriter csv(out.files.back(), {"file", "n_qubits", "power", "n_strings", "n_measured",
                                   "exponent", "seed", "config_hash"});
  for (std::size_t i = 0; i < files.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const auto& r = reports[i];
      csv.row(files[i], r.n_qubits, k + 1, r.counts[static_cast<std::size_t>(k)],
              r.measured[static_cast<std::size_t>(k)], r.exponents[static_cast<std::size_t>(k)],
              ctx.seed, ctx.hash);
    }
  }

  // Power-law fit log n_strings = y log n_q + b across files, per power.
  out.files.push_back(ctx.out_dir / "scaling_fit.csv");
  CsvWriter fit(out.files.back(), {"power", "exponent", "log_prefactor", "n_files", "seed", "config_hash"});
  for (int k = 0; k < 3; ++k) {
    std::vector<std::pair<double, double>> xy;
    for (const auto& r : reports) {
      const auto c = r.counts[static_cast<std::size_t>(k)];
      if (r.n_qubits > 1 && c > 0) xy.emplace_back(std::log(r.n_qubits), std::log(static_cast<double>(c)));
    }
    std::optional<double> slope, icpt;
    if (xy.size() >= 2) {
      double mx = 0, my = 0;
      for (auto [x, y] : xy) mx += x, my += y;
      mx /= xy.size();
      my /= xy.size();
      double sxx = 0, sxy = 0;
      for (auto [x, y] : xy) sxx += (x - mx) * (x - mx), sxy += (x - mx) * (y - my);
      if (sxx > 0) {
        slope = sxy / sxx;
        icpt = my - *slope * mx;
      }
    }
    fit.row(k + 1, slope, icpt, xy.size(), ctx.seed, ctx.hash);
  }
  return out;
}

CommandResult run_command(const std::string& verb, const ExperimentConfig& config,
                          const RunOptions& options) {
  if (verb == "run-vqe") return cmd_run_vqe(config, options);
  if (verb == "mitigate") return cmd_mitigate(config, options);
  if (verb == "sweep") return cmd_sweep(config, options);
  if (verb == "histogram") return cmd_histogram(config, options);
  if (verb == "zne") return cmd_zne(config, options);
  if (verb == "scaling") return cmd_scaling(config, options);
  throw ContractError("unknown command '" + verb + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConsistencyError*>(&e)) return 3;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ContractError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e)) {
    return 2;
  }
  return 1;
}

}  // namespace lqem
