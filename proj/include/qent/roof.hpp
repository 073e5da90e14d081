// Mixed-state multipartite concurrence as a convex roof: the infimum of the
// ensemble-averaged pure-state concurrence over all decompositions of rho.
// Every decomposition arises from the eigendecomposition through a
// column-orthonormal mixing matrix, so the search walks the isometry manifold
// with finite-difference gradients and a backtracking line search. The result
// is a convergent upper estimate of the true infimum.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "qent/concurrence.hpp"
#include "qent/state.hpp"

namespace qent {

// Probability-weighted pure states representing a mixed state.
struct Decomposition {
  std::vector<double> probs;
  std::vector<PureState> states;

  Matrix reconstruct() const {
    if (states.empty()) {
      throw std::invalid_argument("Decomposition: empty");
    }
    Matrix sum = Matrix::Zero(states.front().dim(), states.front().dim());
    for (std::size_t i = 0; i < states.size(); ++i) {
      sum += probs[i] * (states[i].amplitudes() * states[i].amplitudes().adjoint());
    }
    return sum;
  }
};

struct RoofConfig {
  int ensemble_size = 0;  // 0 selects rank + 2
  int restarts = 8;
  int max_iters = 500;
  double grad_tol = 1e-8;
  std::uint64_t seed = 0;
};

struct RoofEstimate {
  double value = 0.0;
  bool converged = false;
  int iterations_used = 0;
  double spread = 0.0;  // max - min across restarts
};

// Thrown when no restart can take a single descent step; still carries the
// best (valid upper-estimate) value seen.
class RoofStalledError : public std::runtime_error {
 public:
  explicit RoofStalledError(RoofEstimate est)
      : std::runtime_error("estimate_roof: no descent step found from any start"),
        estimate(est) {}
  RoofEstimate estimate;
};

// Eigenvalue cutoffs: genuine rank vs round-off.
inline constexpr double kEigDecompositionCutoff = 1e-12;
inline constexpr double kRank2Cutoff = 1e-10;
// Members below this squared norm are dropped from decompositions.
inline constexpr double kMemberNormFloor = 1e-14;
// Descent stops once the average concurrence is this small; the floor sits
// well below every tolerance that consumes roof values.
inline constexpr double kRoofValueFloor = 1e-7;

// Canonical starting decomposition: eigenvectors above the cutoff, weighted
// by their eigenvalues (renormalized so the weights sum to one).
inline Decomposition eigen_decomposition(const DensityMatrix& rho,
                                         double cutoff = kEigDecompositionCutoff) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  Decomposition d;
  double total = 0.0;
  for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i) {  // descending
    const double lambda = es.eigenvalues()(i);
    if (lambda > cutoff) {
      d.probs.push_back(lambda);
      Vector v = es.eigenvectors().col(i);
      v /= v.norm();
      d.states.emplace_back(rho.num_qubits(), std::move(v));
      total += lambda;
    }
  }
  for (auto& p : d.probs) p /= total;
  return d;
}

// Remix a decomposition through a column-orthonormal (m x r) matrix; the new
// ensemble reconstructs the same state. Zero-norm members are dropped.
inline Decomposition mix_decomposition(const Decomposition& base, const Matrix& mixer) {
  const auto r = static_cast<Eigen::Index>(base.states.size());
  if (mixer.cols() != r || mixer.rows() < r) {
    throw std::invalid_argument("mix_decomposition: mixer must be m x r with m >= r");
  }
  const double ortho_dev =
      (mixer.adjoint() * mixer - Matrix::Identity(r, r)).cwiseAbs().maxCoeff();
  if (ortho_dev > 1e-10) {
    throw std::invalid_argument("mix_decomposition: mixer columns not orthonormal");
  }
  const int n = base.states.front().num_qubits();
  const auto dim = base.states.front().dim();
  Matrix b(dim, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    b.col(j) = std::sqrt(base.probs[static_cast<std::size_t>(j)]) *
               base.states[static_cast<std::size_t>(j)].amplitudes();
  }
  Decomposition out;
  for (Eigen::Index i = 0; i < mixer.rows(); ++i) {
    Vector v = b * mixer.row(i).transpose();
    const double w = v.squaredNorm();
    if (w < kMemberNormFloor) continue;
    v /= std::sqrt(w);
    out.probs.push_back(w);
    out.states.emplace_back(n, std::move(v));
  }
  return out;
}

// Ensemble average of the pure-state concurrence.
inline double average_concurrence(const Decomposition& d) {
  double avg = 0.0;
  for (std::size_t i = 0; i < d.states.size(); ++i) {
    avg += d.probs[i] * concurrence_pure(d.states[i]);
  }
  return avg;
}

namespace detail {

// The optimizer state: member columns v_i with sum_i v_i v_i^dag = rho fixed
// under unitary member mixes. Weight and concurrence are per column.
struct RoofWorkspace {
  Matrix members;                 // dim x m, subnormalized columns
  std::vector<double> contrib;    // w_i * C(v_i / |v_i|)
  double value = 0.0;
  int n = 0;

  double member_contribution(const Vector& v) const {
    const double w = v.squaredNorm();
    if (w < kMemberNormFloor) return 0.0;
    return w * concurrence_normalized(v / std::sqrt(w), n);
  }

  void refresh() {
    value = 0.0;
    for (Eigen::Index i = 0; i < members.cols(); ++i) {
      contrib[static_cast<std::size_t>(i)] = member_contribution(members.col(i));
      value += contrib[static_cast<std::size_t>(i)];
    }
  }
};

// Pair rotation used by both the finite-difference probe and the update:
// axis 0 mixes (v_i, v_j) by a real rotation, axis 1 by an imaginary one.
inline void rotated_pair(const Matrix& members, Eigen::Index i, Eigen::Index j,
                         int axis, double theta, Vector& vi, Vector& vj) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  if (axis == 0) {
    vi = c * members.col(i) + s * members.col(j);
    vj = -s * members.col(i) + c * members.col(j);
  } else {
    const Complex is(0.0, s);
    vi = c * members.col(i) + is * members.col(j);
    vj = is * members.col(i) + c * members.col(j);
  }
}

// exp(A) for anti-Hermitian A, through the Hermitian eigendecomposition of iA.
inline Matrix expm_anti_hermitian(const Matrix& a) {
  const Matrix ia = Complex(0.0, 1.0) * a;
  Eigen::SelfAdjointEigenSolver<Matrix> es(ia);
  Vector phases(es.eigenvalues().size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) {
    phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k)));
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

struct DescentResult {
  double value = 0.0;
  bool converged = false;
  bool stalled_at_start = false;
  int iterations = 0;
};

inline DescentResult roof_descent(RoofWorkspace& ws, const RoofConfig& cfg) {
  constexpr double kFdStep = 1e-5;
  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-12;
  constexpr int kStagnationRuns = 3;  // stop after this many near-zero improvements

  const auto m = ws.members.cols();
  const auto ncoords = m * (m - 1);
  Eigen::VectorXd grad(ncoords), prev_grad(ncoords), dir_coords(ncoords);
  Vector vi(ws.members.rows()), vj(ws.members.rows());

  // L-BFGS history in the local rotation coordinates (identity transport
  // between iterates; steps are small enough for the approximation).
  constexpr int kMemory = 8;
  std::vector<Eigen::VectorXd> hist_s, hist_y;
  std::vector<double> hist_rho;

  // Coordinates are pair rotations: k-th entry pair (i,j), axis re/im.
  const auto coords_to_generator = [m](const Eigen::VectorXd& c) {
    Matrix a = Matrix::Zero(m, m);
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        const double cre = c(idx++);
        const double cim = c(idx++);
        a(i, j) = Complex(cre, cim);
        a(j, i) = Complex(-cre, cim);
      }
    }
    return a;
  };

  DescentResult res;
  ws.refresh();
  res.value = ws.value;
  if (ws.value < kRoofValueFloor) {
    res.converged = true;
    return res;
  }

  int stagnant = 0;
  bool have_prev = false;
  Eigen::VectorXd accepted_step;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // Central differences; a pair generator touches only members i and j,
    // so each probe re-evaluates two members.
    Eigen::Index idx = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        const double rest =
            ws.contrib[static_cast<std::size_t>(i)] + ws.contrib[static_cast<std::size_t>(j)];
        for (int axis = 0; axis < 2; ++axis) {
          rotated_pair(ws.members, i, j, axis, kFdStep, vi, vj);
          const double fp = ws.member_contribution(vi) + ws.member_contribution(vj) - rest;
          rotated_pair(ws.members, i, j, axis, -kFdStep, vi, vj);
          const double fm = ws.member_contribution(vi) + ws.member_contribution(vj) - rest;
          grad(idx++) = (fp - fm) / (2.0 * kFdStep);
        }
      }
    }
    const double grad_sq = grad.squaredNorm();
    if (std::sqrt(grad_sq) < cfg.grad_tol) {
      res.converged = true;
      res.iterations = iter;
      return res;
    }

    if (have_prev) {
      Eigen::VectorXd y = grad - prev_grad;
      const double sy = accepted_step.dot(y);
      if (sy > 1e-12 * accepted_step.norm() * y.norm()) {
        if (static_cast<int>(hist_s.size()) == kMemory) {
          hist_s.erase(hist_s.begin());
          hist_y.erase(hist_y.begin());
          hist_rho.erase(hist_rho.begin());
        }
        hist_s.push_back(accepted_step);
        hist_y.push_back(std::move(y));
        hist_rho.push_back(1.0 / sy);
      }
    }
    prev_grad = grad;

    // Two-loop recursion for the quasi-Newton direction.
    dir_coords = -grad;
    const auto hlen = static_cast<int>(hist_s.size());
    std::vector<double> alpha_hist(static_cast<std::size_t>(hlen));
    for (int k = hlen - 1; k >= 0; --k) {
      const double a = hist_rho[static_cast<std::size_t>(k)] *
                       hist_s[static_cast<std::size_t>(k)].dot(dir_coords);
      alpha_hist[static_cast<std::size_t>(k)] = a;
      dir_coords -= a * hist_y[static_cast<std::size_t>(k)];
    }
    if (hlen > 0) {
      const auto& sl = hist_s.back();
      const auto& yl = hist_y.back();
      dir_coords *= sl.dot(yl) / yl.squaredNorm();
    }
    for (int k = 0; k < hlen; ++k) {
      const double b = hist_rho[static_cast<std::size_t>(k)] *
                       hist_y[static_cast<std::size_t>(k)].dot(dir_coords);
      dir_coords += (alpha_hist[static_cast<std::size_t>(k)] - b) *
                    hist_s[static_cast<std::size_t>(k)];
    }
    double slope = dir_coords.dot(grad);
    if (slope >= 0.0) {  // curvature breakdown; reset to steepest descent
      hist_s.clear();
      hist_y.clear();
      hist_rho.clear();
      dir_coords = -grad;
      slope = -grad_sq;
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const Matrix dir = coords_to_generator(dir_coords);
      double accepted_alpha = 0.0;
      for (double alpha = 1.0; alpha >= kMinStep; alpha *= 0.5) {
        const Matrix u = expm_anti_hermitian(alpha * dir);
        Matrix trial = ws.members * u.transpose();
        double trial_value = 0.0;
        bool ok = true;
        for (Eigen::Index i = 0; i < m && ok; ++i) {
          trial_value += ws.member_contribution(trial.col(i));
          if (trial_value > ws.value) ok = false;  // cannot satisfy Armijo anymore
        }
        if (ok && trial_value <= ws.value + kArmijo * alpha * slope) {
          ws.members = std::move(trial);
          ws.refresh();
          accepted = true;
          accepted_alpha = alpha;
          break;
        }
      }
      if (accepted) {
        accepted_step = accepted_alpha * dir_coords;
        have_prev = true;
        break;
      }
      if (hist_s.empty()) break;
      // Quasi-Newton direction failed; fall back to steepest descent once.
      hist_s.clear();
      hist_y.clear();
      hist_rho.clear();
      dir_coords = -grad;
      slope = -grad_sq;
    }
    if (!accepted) {
      res.stalled_at_start = (iter == 0);
      res.value = ws.value;
      res.iterations = iter;
      res.converged = (iter > 0);  // local minimum at line-search resolution
      return res;
    }
    const double gain = res.value - ws.value;
    res.value = ws.value;
    res.iterations = iter + 1;
    if (ws.value < kRoofValueFloor) {
      res.converged = true;
      return res;
    }
    stagnant = (gain < std::max(1e-10, 1e-9 * ws.value)) ? stagnant + 1 : 0;
    if (stagnant >= kStagnationRuns) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

// Deterministic column-orthonormal m x r matrix that spreads every base
// state over every member. (An identity embedding would leave the extra
// members at zero, where pair rotations have no first-order effect and the
// descent cannot populate them.)
inline Matrix fourier_isometry(Eigen::Index m, Eigen::Index r) {
  constexpr double kTau = 6.28318530717958647692;
  Matrix w(m, r);
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index j = 0; j < r; ++j) {
      const double phase = kTau * static_cast<double>(k) * static_cast<double>(j) /
                           static_cast<double>(m);
      w(k, j) = scale * std::exp(Complex(0.0, phase));
    }
  }
  return w;
}

// Random column-orthonormal m x r matrix from a seeded stream.
inline Matrix random_isometry(Eigen::Index m, Eigen::Index r, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(m, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    for (Eigen::Index row = 0; row < m; ++row) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      g(row, c) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(m, r);
  return q;
}

}  // namespace detail

// Variational upper estimate of the convex-roof concurrence. One descent runs
// from a deterministic Fourier mixing of the eigendecomposition, plus
// cfg.restarts descents from random orthonormal starts (restart r draws from
// an independent stream derived from (seed, r)); the reported value is the
// minimum.
inline RoofEstimate estimate_roof(const DensityMatrix& rho, const RoofConfig& cfg = {}) {
  detail::check_qubit_count(rho.num_qubits(), 2, "estimate_roof");
  if (cfg.restarts < 0 || cfg.max_iters < 0) {
    throw std::invalid_argument("estimate_roof: negative restarts or max_iters");
  }
  const Decomposition base = eigen_decomposition(rho);
  const auto rank = static_cast<Eigen::Index>(base.states.size());
  if (rank == 1) {
    return RoofEstimate{concurrence_pure(base.states.front()), true, 0, 0.0};
  }
  const Eigen::Index m = (cfg.ensemble_size > 0) ? cfg.ensemble_size : rank + 2;
  if (m < rank) {
    throw std::invalid_argument("estimate_roof: ensemble_size below the state rank");
  }

  const auto dim = base.states.front().dim();
  Matrix b(dim, rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    b.col(j) = std::sqrt(base.probs[static_cast<std::size_t>(j)]) *
               base.states[static_cast<std::size_t>(j)].amplitudes();
  }

  RoofEstimate out;
  double best = -1.0, worst = -1.0;
  bool all_stalled = true;
  for (int start = 0; start <= cfg.restarts; ++start) {
    detail::RoofWorkspace ws;
    ws.n = rho.num_qubits();
    ws.contrib.assign(static_cast<std::size_t>(m), 0.0);
    if (start == 0) {
      ws.members = b * detail::fourier_isometry(m, rank).transpose();
    } else {
      std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(start)};
      std::mt19937_64 rng(seq);
      const Matrix w0 = detail::random_isometry(m, rank, rng);
      ws.members = b * w0.transpose();
    }
    const detail::DescentResult res = detail::roof_descent(ws, cfg);
    if (!res.stalled_at_start) all_stalled = false;
    if (best < 0.0 || res.value < best) {
      best = res.value;
      out.converged = res.converged;
      out.iterations_used = res.iterations;
    }
    worst = std::max(worst, res.value);
    if (best < kRoofValueFloor) break;  // further restarts cannot matter
  }
  out.value = best;
  out.spread = worst - best;
  if (all_stalled && best >= kRoofValueFloor) {
    throw RoofStalledError(out);
  }
  return out;
}

// Numerically exact minimization on the rank-2 manifold: two-member
// decompositions form a three-parameter family (one rotation angle, two
// phases), scanned on a dense grid and polished by pattern search. Used as a
// validation oracle for estimate_roof on rank-2 inputs.
inline RoofEstimate roof_rank2(const DensityMatrix& rho, int grid = 64) {
  detail::check_qubit_count(rho.num_qubits(), 2, "roof_rank2");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()(i) > kRank2Cutoff) kept.push_back(i);
  }
  if (kept.size() > 2) {
    throw std::invalid_argument("roof_rank2: state has rank > 2");
  }
  const int n = rho.num_qubits();
  if (kept.size() == 1) {
    Vector v = es.eigenvectors().col(kept[0]);
    v /= v.norm();
    return RoofEstimate{detail::concurrence_normalized(v, n), true, 0, 0.0};
  }

  const Vector b1 = std::sqrt(es.eigenvalues()(kept[1])) * es.eigenvectors().col(kept[1]);
  const Vector b2 = std::sqrt(es.eigenvalues()(kept[0])) * es.eigenvectors().col(kept[0]);

  const auto evaluate = [&](double theta, double pa, double pb) {
    const Complex ea = std::exp(Complex(0.0, pa));
    const Complex eb = std::exp(Complex(0.0, pb));
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Vector v1 = c * ea * b1 + s * eb * b2;
    const Vector v2 = -s * std::conj(eb) * b1 + c * std::conj(ea) * b2;
    double f = 0.0;
    for (const Vector* v : {&v1, &v2}) {
      const double w = v->squaredNorm();
      if (w < kMemberNormFloor) continue;
      f += w * detail::concurrence_normalized(*v / std::sqrt(w), n);
    }
    return f;
  };

  constexpr double kPi = 3.14159265358979323846;
  double best_f = -1.0;
  double best_theta = 0.0, best_pa = 0.0, best_pb = 0.0;
  for (int it = 0; it < grid; ++it) {
    const double theta = (0.5 * kPi) * it / (grid - 1);
    for (int ia = 0; ia < grid; ++ia) {
      const double pa = 2.0 * kPi * ia / grid;
      for (int ib = 0; ib < grid; ++ib) {
        const double pb = 2.0 * kPi * ib / grid;
        const double f = evaluate(theta, pa, pb);
        if (best_f < 0.0 || f < best_f) {
          best_f = f;
          best_theta = theta;
          best_pa = pa;
          best_pb = pb;
        }
      }
    }
  }

  // Pattern-search refinement around the best grid point.
  double step_theta = 0.5 * kPi / (grid - 1);
  double step_phase = 2.0 * kPi / grid;
  int iters = 0;
  while (step_theta > 1e-7 || step_phase > 1e-7) {
    bool improved = false;
    const double candidates[6][3] = {
        {best_theta + step_theta, best_pa, best_pb}, {best_theta - step_theta, best_pa, best_pb},
        {best_theta, best_pa + step_phase, best_pb}, {best_theta, best_pa - step_phase, best_pb},
        {best_theta, best_pa, best_pb + step_phase}, {best_theta, best_pa, best_pb - step_phase}};
    for (const auto& cand : candidates) {
      const double f = evaluate(cand[0], cand[1], cand[2]);
      if (f < best_f) {
        best_f = f;
        best_theta = cand[0];
        best_pa = cand[1];
        best_pb = cand[2];
        improved = true;
      }
    }
    if (!improved) {
      step_theta *= 0.5;
      step_phase *= 0.5;
    }
    ++iters;
  }
  return RoofEstimate{best_f, true, iters, 0.0};
}

}  // namespace qent
