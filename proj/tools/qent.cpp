// Command-line harness: simulate / sweep / concurrence / validate.
// Exit codes: 0 success, 1 validation or fit failure, 2 usage error, 3 I/O error.

#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qent/io.hpp"

namespace {

struct Flags {
  std::string state = "ghz";
  std::string file;
  std::string env = "dephasing";
  std::string method = "exact";
  std::string out;
  std::string spec_path;
  int n = 3;
  int n_min = 2;
  int n_max = 6;
  int sample_every = 10;
  int restarts = 8;
  int max_iters = 500;
  int ensemble_size = 0;
  double rate = 1.0;
  double dt = 0.01;
  double t_max = 5.0;
  std::uint64_t seed = 0;
  std::vector<std::string> states{"ghz", "w"};
  std::vector<std::string> envs{"zero-t", "infinite-t", "dephasing"};
};

void add_roof_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--restarts", f.restarts, "random restarts of the roof optimizer");
  cmd->add_option("--max-iters", f.max_iters, "descent iteration cap per start");
  cmd->add_option("--ensemble-size", f.ensemble_size,
                  "decomposition size (0: automatic, at least the state rank)");
  cmd->add_option("--seed", f.seed, "seed for all stochastic choices");
}

void add_grid_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--rate", f.rate, "reservoir rate Gamma");
  cmd->add_option("--dt", f.dt, "propagation step");
  cmd->add_option("--t-max", f.t_max, "final time");
  cmd->add_option("--sample-every", f.sample_every,
                  "concurrence sampling stride in dt units");
}

void add_input_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--state", f.state, "input state: ghz, w, or file");
  cmd->add_option("--n", f.n, "number of qubits");
  cmd->add_option("--file", f.file,
                  "state file (re im pairs: one per line for amplitudes, full "
                  "rows for a density matrix)");
}

bool flag_given(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* opt = cmd->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

qent::RunSpec build_spec(const CLI::App* cmd, const Flags& f, const char* command) {
  qent::RunSpec spec;
  if (flag_given(cmd, "--spec")) {
    std::ifstream in(f.spec_path);
    if (!in) throw qent::IoError(f.spec_path + ": cannot open for reading");
    try {
      spec = qent::Json::parse(in).get<qent::RunSpec>();
    } catch (const nlohmann::json::exception& e) {
      throw qent::IoError(f.spec_path + ": " + e.what());
    }
  }
  spec.command = command;
  if (flag_given(cmd, "--state")) spec.family = qent::state_family_from_string(f.state);
  if (flag_given(cmd, "--file")) {
    spec.state_file = f.file;
    if (!flag_given(cmd, "--state")) spec.family = qent::StateFamily::File;
  }
  if (flag_given(cmd, "--n")) spec.n = f.n;
  if (flag_given(cmd, "--env")) spec.environment = qent::environment_from_string(f.env);
  if (flag_given(cmd, "--rate")) spec.rate = f.rate;
  if (flag_given(cmd, "--method")) spec.method = qent::method_from_string(f.method);
  if (flag_given(cmd, "--dt")) spec.dt = f.dt;
  if (flag_given(cmd, "--t-max")) spec.t_max = f.t_max;
  if (flag_given(cmd, "--sample-every")) spec.sample_every = f.sample_every;
  if (flag_given(cmd, "--restarts")) spec.restarts = f.restarts;
  if (flag_given(cmd, "--max-iters")) spec.max_iters = f.max_iters;
  if (flag_given(cmd, "--ensemble-size")) spec.ensemble_size = f.ensemble_size;
  if (flag_given(cmd, "--seed")) spec.seed = f.seed;
  if (flag_given(cmd, "--out")) spec.out = f.out;
  if (flag_given(cmd, "--n-min")) spec.n_min = f.n_min;
  if (flag_given(cmd, "--n-max")) spec.n_max = f.n_max;
  if (flag_given(cmd, "--states")) {
    spec.families.clear();
    for (const auto& s : f.states) {
      spec.families.push_back(qent::state_family_from_string(s));
    }
  }
  if (flag_given(cmd, "--envs")) {
    spec.envs.clear();
    for (const auto& e : f.envs) {
      spec.envs.push_back(qent::environment_from_string(e));
    }
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entanglement decay of N-qubit states under local decoherence"};
  app.require_subcommand(1);

  Flags sim_flags, sweep_flags, conc_flags, val_flags;

  CLI::App* sim = app.add_subcommand(
      "simulate", "concurrence trajectory CSV for one state and environment");
  add_input_flags(sim, sim_flags);
  sim->add_option("--env", sim_flags.env, "environment: zero-t, infinite-t, dephasing");
  sim->add_option("--method", sim_flags.method, "propagator: exact or rk4");
  add_grid_flags(sim, sim_flags);
  add_roof_flags(sim, sim_flags);
  sim->add_option("--out", sim_flags.out, "output CSV path (default trajectory.csv)");
  sim->add_option("--spec", sim_flags.spec_path, "JSON run spec; flags override");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "decay-rate fits over a range of system sizes");
  sweep->add_option("--n-min", sweep_flags.n_min, "smallest system size");
  sweep->add_option("--n-max", sweep_flags.n_max, "largest system size");
  sweep->add_option("--states", sweep_flags.states, "state families to sweep");
  sweep->add_option("--envs", sweep_flags.envs, "environments to sweep");
  add_grid_flags(sweep, sweep_flags);
  add_roof_flags(sweep, sweep_flags);
  sweep->add_option("--out", sweep_flags.out, "output CSV path (default sweep.csv)");
  sweep->add_option("--spec", sweep_flags.spec_path, "JSON run spec; flags override");

  CLI::App* conc = app.add_subcommand(
      "concurrence", "multipartite concurrence of a single state as JSON");
  add_input_flags(conc, conc_flags);
  add_roof_flags(conc, conc_flags);
  conc->add_option("--out", conc_flags.out, "output path (default stdout)");
  conc->add_option("--spec", conc_flags.spec_path, "JSON run spec; flags override");

  CLI::App* val = app.add_subcommand(
      "validate", "run the built-in oracle checks and report PASS/FAIL");
  val->add_option("--seed", val_flags.seed, "seed for the randomized checks");
  val->add_option("--spec", val_flags.spec_path, "JSON run spec; flags override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) {
      return qent::run_simulate(build_spec(sim, sim_flags, "simulate"));
    }
    if (sweep->parsed()) {
      return qent::run_sweep(build_spec(sweep, sweep_flags, "sweep"), std::cerr);
    }
    if (conc->parsed()) {
      return qent::run_concurrence(build_spec(conc, conc_flags, "concurrence"),
                                   std::cout);
    }
    return qent::run_validate(build_spec(val, val_flags, "validate"), std::cout);
  } catch (const qent::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const qent::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
