// Acceptance harness: exercises the full pipeline against the documented
// quantitative targets and prints one PASS/FAIL line per criterion.
// Returns nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qent/io.hpp"

using namespace qent;

namespace {

struct Verdict {
  int criterion;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Verdict> g_verdicts;

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[done] criterion %d %s\n", criterion, pass ? "PASS" : "FAIL");
  std::fflush(stdout);
  g_verdicts.push_back({criterion, name, pass, detail});
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

bool strictly_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

std::string sequence(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << " -> ";
    os << fmt("%.4f", v[i]);
  }
  return os.str();
}

// --- criterion 1: initial concurrences and the GHZ/W ratio ---------------

void criterion_initial_values() {
  double worst = 0.0;
  for (int n = 2; n <= 8; ++n) {
    const double ghz = concurrence_pure(ghz_state(n));
    const double ghz_closed =
        std::pow(2.0, 1.0 - 0.5 * n) * std::sqrt((std::pow(2.0, n) - 2.0) / 2.0);
    const double ratio = ghz / concurrence_pure(w_state(n));
    const double ratio_closed =
        std::sqrt((1.0 - std::pow(2.0, 1.0 - n)) * n / (n - 1.0));
    worst = std::max(worst, std::abs(ghz - ghz_closed));
    worst = std::max(worst, std::abs(ratio - ratio_closed));
  }
  int argmax = 2;
  for (int n = 2; n <= 64; ++n) {
    if (ghz_w_ratio(n) > ghz_w_ratio(argmax)) argmax = n;
  }
  const bool pass = worst <= 1e-12 && argmax == 5;
  report(1, "initial concurrences (Eq. 3)", pass,
         fmt("worst closed-form deviation %.3g (tol 1e-12), ratio max at n=%d",
             worst, argmax));
}

// --- criteria 2 and 5a: dephasing GHZ rate, fit quality -------------------

std::vector<SweepRow> g_dephasing_ghz;

void criterion_dephasing_rate() {
  const auto start = std::chrono::steady_clock::now();
  SweepConfig cfg;
  cfg.roof.restarts = 2;
  g_dephasing_ghz = sweep_decay_rates({StateFamily::GHZ},
                                      {EnvironmentKind::Dephasing}, 2, 6, cfg);
  const double elapsed = seconds_since(start);
  double worst_rel = 0.0;
  for (const SweepRow& row : g_dephasing_ghz) {
    const double expected = 0.5 * row.n;
    worst_rel = std::max(worst_rel, std::abs(row.gamma - expected) / expected);
  }
  const bool pass = worst_rel <= 0.02 && elapsed < 120.0;
  report(2, "dephasing GHZ rate gamma = N/2", pass,
         fmt("worst relative error %.3g (tol 0.02), %.1f s (budget 120 s)",
             worst_rel, elapsed));
}

// --- criteria 3 and 5b: zero-temperature W rate ---------------------------

std::vector<SweepRow> g_zero_w;

void criterion_zero_temperature_w_rate() {
  SweepConfig cfg;
  cfg.roof.restarts = 2;
  cfg.t_max = 3.2;  // the gamma = 1 fit window ends at ln(20) ~= 3.0
  g_zero_w = sweep_decay_rates({StateFamily::W},
                               {EnvironmentKind::ZeroTemperature}, 2, 6, cfg);
  double worst_rel = 0.0, lo = 1e30, hi = -1e30;
  for (const SweepRow& row : g_zero_w) {
    worst_rel = std::max(worst_rel, std::abs(row.gamma - 1.0));
    lo = std::min(lo, row.gamma);
    hi = std::max(hi, row.gamma);
  }
  const bool pass = worst_rel <= 0.02 && (hi - lo) < 0.05;
  report(3, "zero-T W rate gamma = 1, N-independent", pass,
         fmt("worst |gamma-1| %.3g (tol 0.02), spread %.3g (tol 0.05)",
             worst_rel, hi - lo));
}

void criterion_fit_quality() {
  double worst = 1.0;
  for (const SweepRow& row : g_dephasing_ghz) worst = std::min(worst, row.r_squared);
  for (const SweepRow& row : g_zero_w) worst = std::min(worst, row.r_squared);
  report(5, "monoexponential fits r^2 >= 0.99", worst >= 0.99,
         fmt("worst r^2 %.6f over %zu fits", worst,
             g_dephasing_ghz.size() + g_zero_w.size()));
}

// --- criteria 4, 6, 7: finite-time disentanglement, scaling, crossing -----

struct TrajectoryPair {
  Trajectory ghz;
  Trajectory w;
};

TrajectoryPair n3_pair(EnvironmentKind kind, const SweepConfig& cfg) {
  TrajectoryPair pair;
  pair.ghz = sweep_trajectory(StateFamily::GHZ, 3, kind, cfg);
  pair.w = sweep_trajectory(StateFamily::W, 3, kind, cfg);
  return pair;
}

void criteria_environment_structure() {
  SweepConfig cfg;
  cfg.roof.restarts = 1;

  const TrajectoryPair zero = n3_pair(EnvironmentKind::ZeroTemperature, cfg);
  const TrajectoryPair deph = n3_pair(EnvironmentKind::Dephasing, cfg);
  // Infinite-T rates are window statistics of visibly bent curves, so these
  // trajectories keep the default 0.02 sampling grid (coarser grids shift the
  // fitted rates by a few percent). They stop once the fit window and t_sep
  // are both behind them: the near-zero tail runs in the wide-ensemble
  // regime, costs minutes, and feeds neither quantity.
  SweepConfig inf_cfg = cfg;
  inf_cfg.t_max_infinite = 0.65;  // t_sep(N=3) <= 0.54; windows close by 0.44
  const TrajectoryPair inf = n3_pair(EnvironmentKind::InfiniteTemperature, inf_cfg);

  // Criterion 4: only infinite temperature disentangles in finite time.
  const auto ghz_sep = separability_time(inf.ghz);
  const auto w_sep = separability_time(inf.w);
  const bool finite = ghz_sep && *ghz_sep < 10.0 && w_sep && *w_sep < 10.0;
  const bool persistent = !separability_time(zero.ghz) &&
                          !separability_time(zero.w) &&
                          !separability_time(deph.ghz) &&
                          !separability_time(deph.w);
  report(4, "finite t_sep only at infinite T", finite && persistent,
         fmt("t_sep(GHZ_3)=%.3g, t_sep(W_3)=%.3g; zero-T/dephasing: none over [0,5]",
             ghz_sep ? *ghz_sep : -1.0, w_sep ? *w_sep : -1.0));

  // Criterion 6: qualitative scaling of the fitted rates with N. Each group
  // compared across N uses one fixed configuration; trajectories run just
  // past the fit window (the near-zero tail only matters for t_sep).
  SweepConfig deph_w_cfg = cfg;
  deph_w_cfg.roof.restarts = 2;
  deph_w_cfg.t_max = 3.2;  // window of a gamma ~= 1 fit ends at ln(20)
  const auto deph_w_rows = sweep_decay_rates(
      {StateFamily::W}, {EnvironmentKind::Dephasing}, 3, 6, deph_w_cfg);

  SweepConfig zero_ghz_cfg = cfg;
  zero_ghz_cfg.t_max = 1.6;  // all three fit windows close by t = 1.4
  const auto zero_ghz_rows = sweep_decay_rates(
      {StateFamily::GHZ}, {EnvironmentKind::ZeroTemperature}, 3, 5, zero_ghz_cfg);

  // Infinite-T N=3 rates come from the criterion-4 trajectories; N=4 rows
  // are computed over their fit windows only (the wide-ensemble near-zero
  // samples beyond the window cost minutes and contribute nothing here).
  std::vector<double> inf_ghz_gamma, inf_w_gamma;
  bool inf_fits_ok = true;
  std::string inf_fit_error;
  try {
    inf_ghz_gamma.push_back(fit_exponential(inf.ghz).gamma);
    inf_w_gamma.push_back(fit_exponential(inf.w).gamma);
    SweepConfig inf4 = inf_cfg;
    inf4.t_max_infinite = 0.56;  // GHZ_4 fit window closes at 0.48
    inf_ghz_gamma.push_back(
        fit_exponential(
            sweep_trajectory(StateFamily::GHZ, 4,
                             EnvironmentKind::InfiniteTemperature, inf4))
            .gamma);
    inf4.t_max_infinite = 0.48;  // W_4 fit window closes at 0.40
    inf_w_gamma.push_back(
        fit_exponential(sweep_trajectory(StateFamily::W, 4,
                                         EnvironmentKind::InfiniteTemperature, inf4))
            .gamma);
  } catch (const InsufficientDataError& e) {
    inf_fits_ok = false;
    inf_fit_error = e.what();
  }

  std::vector<double> deph_ghz_gamma;
  for (const SweepRow& row : g_dephasing_ghz) {
    if (row.n >= 3) deph_ghz_gamma.push_back(row.gamma);
  }
  std::vector<double> zero_ghz_gamma, deph_w_gamma;
  for (const SweepRow& row : zero_ghz_rows) zero_ghz_gamma.push_back(row.gamma);
  for (const SweepRow& row : deph_w_rows) deph_w_gamma.push_back(row.gamma);

  const bool deph_ghz_up = strictly_increasing(deph_ghz_gamma);
  const bool zero_ghz_up = strictly_increasing(zero_ghz_gamma);
  const bool inf_ghz_up = inf_fits_ok && strictly_increasing(inf_ghz_gamma);
  const bool inf_w_up = inf_fits_ok && strictly_increasing(inf_w_gamma);
  bool w_dominates = inf_fits_ok;
  for (std::size_t i = 0; i < inf_w_gamma.size(); ++i) {
    w_dominates = w_dominates && inf_w_gamma[i] >= inf_ghz_gamma[i];
  }
  double w_lo = 1e30, w_hi = -1e30;
  for (const double g : deph_w_gamma) {
    w_lo = std::min(w_lo, g);
    w_hi = std::max(w_hi, g);
  }
  const bool w_const = (w_hi - w_lo) <= 0.05 * (0.5 * (w_hi + w_lo));

  std::printf("  gamma(GHZ, dephasing)  n=3..6: %s  %s\n",
              sequence(deph_ghz_gamma).c_str(), deph_ghz_up ? "ok" : "NOT INCREASING");
  std::printf("  gamma(GHZ, zero-T)     n=3..5: %s  %s\n",
              sequence(zero_ghz_gamma).c_str(), zero_ghz_up ? "ok" : "NOT INCREASING");
  std::printf("  gamma(GHZ, infinite-T) n=3..4: %s  %s\n",
              sequence(inf_ghz_gamma).c_str(), inf_ghz_up ? "ok" : "NOT INCREASING");
  std::printf("  gamma(W,   infinite-T) n=3..4: %s  %s\n",
              sequence(inf_w_gamma).c_str(), inf_w_up ? "ok" : "NOT INCREASING");
  std::printf("  gamma(W, infinite-T) >= gamma(GHZ, infinite-T): %s\n",
              w_dominates ? "ok" : "VIOLATED");
  std::printf("  gamma(W, dephasing)    n=3..6: %s  spread %.2f%%\n",
              sequence(deph_w_gamma).c_str(),
              100.0 * (w_hi - w_lo) / (0.5 * (w_hi + w_lo)));

  const bool pass = deph_ghz_up && zero_ghz_up && inf_ghz_up && inf_w_up &&
                    w_dominates && w_const;
  std::string blockers;
  if (!inf_fits_ok) blockers += " infinite-T fit failed: " + inf_fit_error + ";";
  if (!inf_ghz_up) blockers += " gamma(GHZ,infinite-T) non-monotone;";
  if (!deph_ghz_up) blockers += " gamma(GHZ,dephasing) non-monotone;";
  if (!zero_ghz_up) blockers += " gamma(GHZ,zero-T) non-monotone;";
  if (!inf_w_up) blockers += " gamma(W,infinite-T) non-monotone;";
  if (!w_dominates) blockers += " W does not dominate GHZ;";
  if (!w_const) blockers += " gamma(W,dephasing) not constant;";
  report(6, "rate scaling with N across environments", pass,
         pass ? "all six sub-checks hold" : ("sub-checks failed:" + blockers));

  // Criterion 7: W overtakes GHZ except at infinite temperature.
  const auto crosses = [](const TrajectoryPair& pair) {
    const std::size_t len = std::min(pair.ghz.values.size(), pair.w.values.size());
    for (std::size_t j = 0; j < len; ++j) {
      if (pair.w.values[j] > pair.ghz.values[j]) return true;
    }
    return false;
  };
  const bool zero_cross = crosses(zero);
  const bool deph_cross = crosses(deph);
  bool inf_ordered = true;
  double worst_gap = 0.0;
  const std::size_t len = std::min(inf.ghz.values.size(), inf.w.values.size());
  for (std::size_t j = 0; j < len; ++j) {
    if (inf.ghz.values[j] < 1e-3 && inf.w.values[j] < 1e-3) break;
    worst_gap = std::max(worst_gap, inf.w.values[j] - inf.ghz.values[j]);
    if (inf.ghz.values[j] < inf.w.values[j] - 2e-3) inf_ordered = false;
  }
  report(7, "N=3 crossing behavior", zero_cross && deph_cross && inf_ordered,
         fmt("W overtakes GHZ: zero-T %s, dephasing %s; infinite-T max(W-GHZ)=%.2g "
             "(tol 2e-3)",
             zero_cross ? "yes" : "NO", deph_cross ? "yes" : "NO", worst_gap));
}

// --- criterion 8: estimator cross-validation ------------------------------

void criterion_oracle_equivalence() {
  std::mt19937_64 rng(20260814);
  double worst_wootters = 0.0;
  for (int i = 0; i < 100; ++i) {
    const DensityMatrix rho = random_density_matrix(2, 1 + i % 4, rng);
    RoofConfig cfg;
    cfg.restarts = 2;
    cfg.seed = 1000 + static_cast<std::uint64_t>(i);
    double est;
    try {
      est = estimate_roof(rho, cfg).value;
    } catch (const RoofStalledError& e) {
      est = e.estimate.value;
    }
    worst_wootters =
        std::max(worst_wootters, std::abs(est - wootters_concurrence_2q(rho)));
  }

  double worst_rank2 = 0.0;
  const EnvironmentSpec zero(EnvironmentKind::ZeroTemperature, 1.0);
  for (const int n : {3, 4}) {
    for (const double t : {0.3, 0.9}) {
      const DensityMatrix rho =
          evolve_exact(density_from_pure(w_state(n)), zero, t);
      RoofConfig cfg;
      cfg.restarts = 2;
      cfg.seed = static_cast<std::uint64_t>(10 * n + t * 10);
      double est;
      try {
        est = estimate_roof(rho, cfg).value;
      } catch (const RoofStalledError& e) {
        est = e.estimate.value;
      }
      worst_rank2 = std::max(worst_rank2, std::abs(est - roof_rank2(rho).value));
    }
  }

  double worst_prop = 0.0;
  for (const EnvironmentKind kind :
       {EnvironmentKind::ZeroTemperature, EnvironmentKind::InfiniteTemperature,
        EnvironmentKind::Dephasing}) {
    const DensityMatrix rho0 = random_density_matrix(3, 8, rng);
    const EnvironmentSpec env(kind, 1.0);
    PropagatorConfig prop;
    prop.method = PropagatorMethod::RungeKutta4;
    prop.dt = 0.002;
    prop.t_max = 1.0;
    prop.sample_every = 500;
    const StateTrajectory ode = evolve_ode(rho0, env, prop);
    worst_prop = std::max(
        worst_prop, trace_distance(ode.states.back(), evolve_exact(rho0, env, 1.0)));
  }

  const bool pass =
      worst_wootters <= 2e-3 && worst_rank2 <= 1e-4 && worst_prop <= 1e-8;
  report(8, "estimator oracle equivalences", pass,
         fmt("Wootters dev %.2g (tol 2e-3, 100 states), rank-2 dev %.2g (tol 1e-4), "
             "ode-exact %.2g (tol 1e-8)",
             worst_wootters, worst_rank2, worst_prop));
}

// --- criterion 9: structural invariants -----------------------------------

void criterion_structural_invariants() {
  std::mt19937_64 rng(7);
  double worst_fact = 0.0;
  for (int i = 0; i < 100; ++i) {
    const PureState psi = random_pure_state(2 + i % 3, rng);
    const PureState phi = random_pure_state(1, rng);
    worst_fact = std::max(worst_fact,
                          std::abs(concurrence_pure(tensor_product(psi, phi)) -
                                   concurrence_pure(psi)));
  }

  double worst_purity = 0.0;
  for (int i = 0; i < 20; ++i) {
    const DensityMatrix rho = density_from_pure(random_pure_state(4, rng));
    const SubsetMask full = (SubsetMask{1} << 4) - 1;
    for (SubsetMask mask = 1; mask < full; ++mask) {
      const double a = purity(partial_trace(rho, mask));
      const double b = purity(partial_trace(rho, full ^ mask));
      worst_purity = std::max(worst_purity, std::abs(a - b));
    }
  }

  double worst_kraus = 0.0;
  for (const EnvironmentKind kind :
       {EnvironmentKind::ZeroTemperature, EnvironmentKind::InfiniteTemperature,
        EnvironmentKind::Dephasing}) {
    for (const double t : {0.0, 0.2, 1.0, 4.0}) {
      const SingleQubitChannel ch =
          single_qubit_channel(EnvironmentSpec(kind, 1.3), t);
      Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
      for (const auto& k : ch.kraus) sum += k.adjoint() * k;
      worst_kraus = std::max(
          worst_kraus, (sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff());
    }
  }

  RunSpec spec;
  spec.family = StateFamily::GHZ;
  spec.n = 3;
  spec.environment = EnvironmentKind::Dephasing;
  spec.t_max = 1.5;
  spec.restarts = 2;
  spec.seed = 9;
  const std::string csv_a = simulate_csv(compute_simulate(spec));
  const std::string csv_b = simulate_csv(compute_simulate(spec));
  SweepConfig sweep_cfg;
  sweep_cfg.roof.restarts = 1;
  sweep_cfg.t_max = 2.0;
  const auto rows_a = sweep_decay_rates({StateFamily::GHZ},
                                        {EnvironmentKind::Dephasing}, 2, 3, sweep_cfg);
  const auto rows_b = sweep_decay_rates({StateFamily::GHZ},
                                        {EnvironmentKind::Dephasing}, 2, 3, sweep_cfg);
  const bool identical =
      csv_a == csv_b && sweep_csv(rows_a) == sweep_csv(rows_b);

  const bool pass = worst_fact <= 1e-10 && worst_purity <= 1e-10 &&
                    worst_kraus <= 1e-12 && identical;
  report(9, "structural invariants", pass,
         fmt("factorization %.2g (tol 1e-10), purity symmetry %.2g (tol 1e-10), "
             "Kraus %.2g (tol 1e-12), repeat runs %s",
             worst_fact, worst_purity, worst_kraus,
             identical ? "byte-identical" : "DIFFER"));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  criterion_initial_values();
  criterion_dephasing_rate();
  criterion_zero_temperature_w_rate();
  criteria_environment_structure();
  criterion_fit_quality();
  criterion_oracle_equivalence();
  criterion_structural_invariants();

  std::sort(g_verdicts.begin(), g_verdicts.end(),
            [](const Verdict& a, const Verdict& b) { return a.criterion < b.criterion; });
  int failures = 0;
  std::printf("\n");
  for (const Verdict& v : g_verdicts) {
    std::printf("criterion %d: %-40s %s  (%s)\n", v.criterion, v.name.c_str(),
                v.pass ? "PASS" : "FAIL", v.detail.c_str());
    if (!v.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed in %.1f s\n",
              static_cast<int>(g_verdicts.size()) - failures, g_verdicts.size(),
              seconds_since(start));
  return failures == 0 ? 0 : 1;
}
