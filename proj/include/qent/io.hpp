// Run configuration, deterministic CSV/JSON artifacts, state-file parsing,
// and the implementations behind the command-line harness.

#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qent/channels.hpp"
#include "qent/concurrence.hpp"
#include "qent/decay.hpp"
#include "qent/roof.hpp"
#include "qent/state.hpp"

namespace qent {

using Json = nlohmann::ordered_json;

// Bad flag values or combinations; the harness maps this to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable, unwritable, or malformed files; mapped to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline StateFamily state_family_from_string(const std::string& s) {
  if (s == "ghz") return StateFamily::GHZ;
  if (s == "w") return StateFamily::W;
  if (s == "file") return StateFamily::File;
  throw UsageError("unknown state family '" + s + "' (expected ghz, w, or file)");
}

inline EnvironmentKind environment_from_string(const std::string& s) {
  if (s == "zero-t") return EnvironmentKind::ZeroTemperature;
  if (s == "infinite-t") return EnvironmentKind::InfiniteTemperature;
  if (s == "dephasing") return EnvironmentKind::Dephasing;
  throw UsageError("unknown environment '" + s +
                   "' (expected zero-t, infinite-t, or dephasing)");
}

inline PropagatorMethod method_from_string(const std::string& s) {
  if (s == "exact") return PropagatorMethod::ExactChannel;
  if (s == "rk4") return PropagatorMethod::RungeKutta4;
  throw UsageError("unknown method '" + s + "' (expected exact or rk4)");
}

// Full description of one run; the sidecar JSON round-trips this struct.
struct RunSpec {
  std::string command = "simulate";
  StateFamily family = StateFamily::GHZ;
  int n = 3;
  std::string state_file;  // input path when family == File
  EnvironmentKind environment = EnvironmentKind::Dephasing;
  double rate = 1.0;
  PropagatorMethod method = PropagatorMethod::ExactChannel;
  double dt = 0.01;
  double t_max = 5.0;
  int sample_every = 10;
  int ensemble_size = 0;  // 0: automatic
  int restarts = 8;
  int max_iters = 500;
  std::uint64_t seed = 0;
  std::string out;  // empty: per-command default (stdout for concurrence)
  // Sweep-only settings.
  int n_min = 2;
  int n_max = 6;
  std::vector<StateFamily> families{StateFamily::GHZ, StateFamily::W};
  std::vector<EnvironmentKind> envs{EnvironmentKind::ZeroTemperature,
                                    EnvironmentKind::InfiniteTemperature,
                                    EnvironmentKind::Dephasing};

  RoofConfig roof_config() const {
    RoofConfig cfg;
    cfg.ensemble_size = ensemble_size;
    cfg.restarts = restarts;
    cfg.max_iters = max_iters;
    cfg.seed = seed;
    return cfg;
  }

  PropagatorConfig propagator_config() const {
    PropagatorConfig cfg;
    cfg.method = method;
    cfg.dt = dt;
    cfg.t_max = t_max;
    cfg.sample_every = sample_every;
    return cfg;
  }

  SweepConfig sweep_config() const {
    SweepConfig cfg;
    cfg.rate = rate;
    cfg.dt = dt;
    cfg.sample_every = sample_every;
    cfg.t_max = t_max;
    cfg.roof = roof_config();
    return cfg;
  }
};

inline void to_json(Json& j, const RunSpec& spec) {
  j = Json{{"command", spec.command},
           {"state", std::string(to_string(spec.family))},
           {"n", spec.n},
           {"file", spec.state_file},
           {"env", to_string(spec.environment)},
           {"rate", spec.rate},
           {"method", to_string(spec.method)},
           {"dt", spec.dt},
           {"t_max", spec.t_max},
           {"sample_every", spec.sample_every},
           {"ensemble_size", spec.ensemble_size},
           {"restarts", spec.restarts},
           {"max_iters", spec.max_iters},
           {"seed", spec.seed},
           {"out", spec.out},
           {"n_min", spec.n_min},
           {"n_max", spec.n_max}};
  Json fams = Json::array();
  for (const auto f : spec.families) fams.push_back(std::string(to_string(f)));
  Json kinds = Json::array();
  for (const auto e : spec.envs) kinds.push_back(to_string(e));
  j["states"] = std::move(fams);
  j["envs"] = std::move(kinds);
}

// Keys absent from the JSON keep their current (default) values; unknown
// keys such as the sidecar's "results" block are ignored.
inline void from_json(const Json& j, RunSpec& spec) {
  if (j.contains("command")) spec.command = j.at("command").get<std::string>();
  if (j.contains("state")) {
    spec.family = state_family_from_string(j.at("state").get<std::string>());
  }
  if (j.contains("n")) spec.n = j.at("n").get<int>();
  if (j.contains("file")) spec.state_file = j.at("file").get<std::string>();
  if (j.contains("env")) {
    spec.environment = environment_from_string(j.at("env").get<std::string>());
  }
  if (j.contains("rate")) spec.rate = j.at("rate").get<double>();
  if (j.contains("method")) {
    spec.method = method_from_string(j.at("method").get<std::string>());
  }
  if (j.contains("dt")) spec.dt = j.at("dt").get<double>();
  if (j.contains("t_max")) spec.t_max = j.at("t_max").get<double>();
  if (j.contains("sample_every")) spec.sample_every = j.at("sample_every").get<int>();
  if (j.contains("ensemble_size")) spec.ensemble_size = j.at("ensemble_size").get<int>();
  if (j.contains("restarts")) spec.restarts = j.at("restarts").get<int>();
  if (j.contains("max_iters")) spec.max_iters = j.at("max_iters").get<int>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("out")) spec.out = j.at("out").get<std::string>();
  if (j.contains("n_min")) spec.n_min = j.at("n_min").get<int>();
  if (j.contains("n_max")) spec.n_max = j.at("n_max").get<int>();
  if (j.contains("states")) {
    spec.families.clear();
    for (const auto& f : j.at("states")) {
      spec.families.push_back(state_family_from_string(f.get<std::string>()));
    }
  }
  if (j.contains("envs")) {
    spec.envs.clear();
    for (const auto& e : j.at("envs")) {
      spec.envs.push_back(environment_from_string(e.get<std::string>()));
    }
  }
}

// Input state: either pure amplitudes or a density matrix.
struct LoadedState {
  bool pure = true;
  std::optional<PureState> psi;
  std::optional<DensityMatrix> rho;

  int num_qubits() const { return pure ? psi->num_qubits() : rho->num_qubits(); }
  DensityMatrix density() const { return pure ? density_from_pure(*psi) : *rho; }
};

namespace detail {

inline bool is_power_of_two(std::size_t v) { return v > 0 && (v & (v - 1)) == 0; }

inline int log2_exact(std::size_t v) {
  int n = 0;
  while ((std::size_t{1} << n) < v) ++n;
  return n;
}

}  // namespace detail

// Text format: one basis state per line as whitespace-separated `re im`
// pairs in ascending index order. A pure state is 2^n lines of one pair; a
// density matrix is 2^n lines of 2^n pairs (row-major). Blank lines and
// `#` comments are ignored. Pure inputs are normalized, density inputs are
// trace-normalized; all other state validation stays strict.
inline LoadedState parse_state_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::vector<std::vector<Complex>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::vector<double> nums;
    std::string token;
    while (ls >> token) {
      try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        nums.push_back(v);
      } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(line_no) + ": bad number '" +
                      token + "'");
      }
    }
    if (nums.empty()) continue;
    if (nums.size() % 2 != 0) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": odd token count; expected re im pairs");
    }
    std::vector<Complex> entries;
    entries.reserve(nums.size() / 2);
    for (std::size_t i = 0; i < nums.size(); i += 2) {
      entries.emplace_back(nums[i], nums[i + 1]);
    }
    rows.push_back(std::move(entries));
  }
  if (rows.empty()) throw IoError(path + ": no data lines");
  const std::size_t width = rows.front().size();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw IoError(path + ": inconsistent pair count (line with " +
                    std::to_string(rows[r].size()) + " pairs, expected " +
                    std::to_string(width) + ")");
    }
  }
  const std::size_t dim = rows.size();
  if (!detail::is_power_of_two(dim)) {
    throw IoError(path + ": line count " + std::to_string(dim) +
                  " is not a power of two");
  }
  const int n = detail::log2_exact(dim);
  LoadedState state;
  if (width == 1) {
    Vector amps(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) amps(static_cast<Eigen::Index>(i)) = rows[i][0];
    const double norm = amps.norm();
    if (!(norm > 0.0)) throw IoError(path + ": zero state vector");
    amps /= norm;
    state.pure = true;
    state.psi.emplace(n, std::move(amps));
  } else if (width == dim) {
    Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = 0; c < dim; ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      }
    }
    const double tr = m.trace().real();
    if (!(tr > 0.0)) throw IoError(path + ": density matrix trace must be positive");
    m /= tr;
    state.pure = false;
    try {
      state.rho.emplace(n, std::move(m));
    } catch (const std::invalid_argument& e) {
      throw IoError(path + ": not a valid density matrix: " + e.what());
    }
  } else {
    throw IoError(path + ": expected 1 pair per line (pure state) or " +
                  std::to_string(dim) + " pairs per line (density matrix), got " +
                  std::to_string(width));
  }
  return state;
}

inline LoadedState load_state(const RunSpec& spec) {
  if (spec.family == StateFamily::File) {
    if (spec.state_file.empty()) {
      throw UsageError("--state file requires --file <path>");
    }
    return parse_state_file(spec.state_file);
  }
  LoadedState state;
  state.pure = true;
  state.psi.emplace(spec.family == StateFamily::GHZ ? ghz_state(spec.n)
                                                    : w_state(spec.n));
  return state;
}

// Every CSV numeric carries 12 significant digits.
inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << content;
  out.flush();
  if (!out) throw IoError(path + ": write failed");
}

struct SimulateResult {
  Trajectory trajectory;
  std::vector<double> purities;
  std::vector<double> trace_errors;
  std::vector<int> converged;
  std::optional<DecayFit> fit;
  std::optional<double> t_sep;
};

// One concurrence trajectory on the sample grid t_j = j * dt * sample_every.
// Once the estimate certifies (numerical) zero it is carried forward: the
// local semigroup cannot increase entanglement, so the earlier upper bound
// stays valid and the remaining samples need no optimization.
inline SimulateResult compute_simulate(const RunSpec& spec) {
  const LoadedState input = load_state(spec);
  const PropagatorConfig prop = spec.propagator_config();
  prop.check();
  const EnvironmentSpec env(spec.environment, spec.rate);
  const DensityMatrix rho0 = input.density();

  SimulateResult result;
  result.trajectory.meta =
      TrajectoryMeta{spec.family, input.num_qubits(), spec.environment,
                     spec.rate, spec.method, spec.seed};

  const StateTrajectory states =
      (spec.method == PropagatorMethod::ExactChannel)
          ? propagate_exact(rho0, env, prop)
          : evolve_ode(rho0, env, prop);

  double reference = 0.0;  // initial concurrence, set at the first sample
  double settled_value = -1.0;
  for (std::size_t j = 0; j < states.states.size(); ++j) {
    const DensityMatrix& rho = states.states[j];
    double value = 0.0;
    int converged = 1;
    if (j == 0 && input.pure) {
      value = concurrence_pure(*input.psi);
    } else if (settled_value >= 0.0) {
      value = settled_value;
    } else {
      RoofConfig cfg = spec.roof_config();
      cfg.seed = detail::mix_seed(spec.seed, static_cast<std::uint64_t>(j));
      const RoofEstimate est = detail::trajectory_roof_estimate(
          rho, spec.environment, (j == 0) ? 1.0 : reference, cfg);
      value = est.value;
      converged = est.converged ? 1 : 0;
      if (value < kRoofValueFloor) settled_value = value;
    }
    if (j == 0) reference = value;
    result.trajectory.times.push_back(states.times[j]);
    result.trajectory.values.push_back(value);
    result.purities.push_back(purity(rho));
    result.trace_errors.push_back(std::abs(rho.matrix().trace() - Complex(1.0, 0.0)));
    result.converged.push_back(converged);
  }

  try {
    result.fit = fit_exponential(result.trajectory);
  } catch (const InsufficientDataError&) {
    result.fit.reset();
  }
  result.t_sep = separability_time(result.trajectory);
  return result;
}

inline std::string simulate_csv(const SimulateResult& result) {
  std::string csv = "t,c_estimate,purity,trace_error,roof_converged\n";
  for (std::size_t j = 0; j < result.trajectory.times.size(); ++j) {
    csv += csv_number(result.trajectory.times[j]);
    csv += ',';
    csv += csv_number(result.trajectory.values[j]);
    csv += ',';
    csv += csv_number(result.purities[j]);
    csv += ',';
    csv += csv_number(result.trace_errors[j]);
    csv += ',';
    csv += std::to_string(result.converged[j]);
    csv += '\n';
  }
  return csv;
}

inline Json simulate_sidecar(const RunSpec& spec, const SimulateResult& result) {
  Json j = spec;
  Json results;
  results["gamma"] = result.fit ? Json(result.fit->gamma) : Json(nullptr);
  results["r_squared"] = result.fit ? Json(result.fit->r_squared) : Json(nullptr);
  results["t_sep"] = result.t_sep ? Json(*result.t_sep) : Json(nullptr);
  j["results"] = std::move(results);
  return j;
}

// Trajectory CSV plus a sidecar JSON (`<out>.json`) that reconstructs the run.
inline int run_simulate(const RunSpec& spec) {
  const SimulateResult result = compute_simulate(spec);
  const std::string out = spec.out.empty() ? "trajectory.csv" : spec.out;
  write_text_file(out, simulate_csv(result));
  write_text_file(out + ".json", simulate_sidecar(spec, result).dump(2) + "\n");
  return 0;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string csv = "n,state,env,gamma_over_rate,r_squared,t_sep\n";
  for (const SweepRow& row : rows) {
    csv += std::to_string(row.n);
    csv += ',';
    csv += to_string(row.family);
    csv += ',';
    csv += to_string(row.environment);
    csv += ',';
    csv += csv_number(row.gamma);
    csv += ',';
    csv += csv_number(row.r_squared);
    csv += ',';
    if (row.t_sep) csv += csv_number(*row.t_sep);
    csv += '\n';
  }
  return csv;
}

// Decay-rate sweep CSV; exit is nonzero when any fit misses the r^2 floor.
inline int run_sweep(const RunSpec& spec, std::ostream& err) {
  const std::vector<SweepRow> rows = sweep_decay_rates(
      spec.families, spec.envs, spec.n_min, spec.n_max, spec.sweep_config());
  const std::string out = spec.out.empty() ? "sweep.csv" : spec.out;
  write_text_file(out, sweep_csv(rows));
  int flagged = 0;
  for (const SweepRow& row : rows) {
    if (row.flagged) {
      ++flagged;
      err << "flagged: n=" << row.n << " state=" << to_string(row.family)
          << " env=" << to_string(row.environment)
          << " r_squared=" << csv_number(row.r_squared) << " below "
          << csv_number(kFitQualityFloor) << "\n";
    }
  }
  return flagged == 0 ? 0 : 1;
}

// Standalone calculator: exact value for pure inputs, the global rank-2
// optimum for rank <= 2 inputs, and the multi-start roof estimate otherwise.
inline Json concurrence_record(const RunSpec& spec) {
  const LoadedState input = load_state(spec);
  Json j;
  j["n"] = input.num_qubits();
  j["pure"] = input.pure;
  if (input.pure) {
    j["c_n"] = concurrence_pure(*input.psi);
    j["method"] = "pure";
    j["restarts_spread"] = 0.0;
    return j;
  }
  const DensityMatrix& rho = *input.rho;
  const Decomposition eig = eigen_decomposition(rho, kRank2Cutoff);
  if (eig.probs.size() <= 2) {
    j["c_n"] = roof_rank2(rho).value;
    j["method"] = "rank2";
    j["restarts_spread"] = 0.0;
    return j;
  }
  RoofEstimate est;
  try {
    est = estimate_roof(rho, spec.roof_config());
  } catch (const RoofStalledError& e) {
    est = e.estimate;
  }
  j["c_n"] = est.value;
  j["method"] = "roof";
  j["restarts_spread"] = est.spread;
  return j;
}

inline int run_concurrence(const RunSpec& spec, std::ostream& out_stream) {
  const Json record = concurrence_record(spec);
  if (spec.out.empty()) {
    out_stream << record.dump(2) << "\n";
  } else {
    write_text_file(spec.out, record.dump(2) + "\n");
  }
  return 0;
}

struct CheckResult {
  std::string name;
  double tolerance = 0.0;
  double observed = 0.0;
  bool pass = false;
};

// Built-in oracle suite: Kraus completeness, cross-propagator agreement,
// Wootters equivalence on two qubits, product-state factorization, and the
// GHZ/W closed-form ratio.
inline std::vector<CheckResult> validation_checks(std::uint64_t seed) {
  std::vector<CheckResult> checks;
  const EnvironmentKind kinds[] = {EnvironmentKind::ZeroTemperature,
                                   EnvironmentKind::InfiniteTemperature,
                                   EnvironmentKind::Dephasing};

  {
    double worst = 0.0;
    for (const EnvironmentKind kind : kinds) {
      const EnvironmentSpec env(kind, 1.0);
      for (const double t : {0.0, 0.3, 1.7, 5.0}) {
        const SingleQubitChannel ch = single_qubit_channel(env, t);
        Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
        for (const auto& k : ch.kraus) sum += k.adjoint() * k;
        worst = std::max(worst,
                         (sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff());
      }
    }
    checks.push_back({"kraus-completeness", 1e-12, worst, worst <= 1e-12});
  }

  {
    std::mt19937_64 rng(detail::mix_seed(seed, 1));
    double worst = 0.0;
    for (const EnvironmentKind kind : kinds) {
      const DensityMatrix rho0 = random_density_matrix(3, 8, rng);
      const EnvironmentSpec env(kind, 1.0);
      PropagatorConfig prop;
      prop.method = PropagatorMethod::RungeKutta4;
      prop.dt = 0.002;
      prop.t_max = 1.0;
      prop.sample_every = 500;
      const StateTrajectory ode = evolve_ode(rho0, env, prop);
      const DensityMatrix exact = evolve_exact(rho0, env, prop.t_max);
      worst = std::max(worst, trace_distance(ode.states.back(), exact));
    }
    checks.push_back({"propagator-cross-check", 1e-8, worst, worst <= 1e-8});
  }

  {
    std::mt19937_64 rng(detail::mix_seed(seed, 2));
    double worst = 0.0;
    for (int i = 0; i < 25; ++i) {
      const DensityMatrix rho = random_density_matrix(2, 1 + i % 4, rng);
      RoofConfig cfg;
      cfg.seed = detail::mix_seed(seed, 100 + static_cast<std::uint64_t>(i));
      double est;
      try {
        est = estimate_roof(rho, cfg).value;
      } catch (const RoofStalledError& e) {
        est = e.estimate.value;
      }
      worst = std::max(worst, std::abs(est - wootters_concurrence_2q(rho)));
    }
    checks.push_back({"wootters-equivalence", 2e-3, worst, worst <= 2e-3});
  }

  {
    std::mt19937_64 rng(detail::mix_seed(seed, 3));
    double worst = 0.0;
    for (int i = 0; i < 25; ++i) {
      const int n = 3 + i % 3;
      const PureState psi = random_pure_state(n - 1, rng);
      const PureState phi = random_pure_state(1, rng);
      const double full = concurrence_pure(tensor_product(psi, phi));
      worst = std::max(worst, std::abs(full - concurrence_pure(psi)));
    }
    checks.push_back({"factorization", 1e-10, worst, worst <= 1e-10});
  }

  {
    double worst = 0.0;
    for (int n = 2; n <= 8; ++n) {
      const double computed =
          concurrence_pure(ghz_state(n)) / concurrence_pure(w_state(n));
      worst = std::max(worst, std::abs(computed - ghz_w_ratio(n)));
    }
    checks.push_back({"ghz-w-ratio-closed-form", 1e-12, worst, worst <= 1e-12});
  }

  return checks;
}

inline int run_validate(const RunSpec& spec, std::ostream& out_stream) {
  const std::vector<CheckResult> checks = validation_checks(spec.seed);
  bool all_pass = true;
  char buf[160];
  for (const CheckResult& c : checks) {
    std::snprintf(buf, sizeof(buf), "%-28s tolerance %-9.3g observed %-12.6g %s",
                  c.name.c_str(), c.tolerance, c.observed,
                  c.pass ? "PASS" : "FAIL");
    out_stream << buf << "\n";
    all_pass = all_pass && c.pass;
  }
  out_stream << (all_pass ? "all checks passed" : "validation FAILED") << "\n";
  return all_pass ? 0 : 1;
}

}  // namespace qent
