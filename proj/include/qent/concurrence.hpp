// Multipartite concurrence of pure states, built from the purities of all
// proper-subset reductions, plus the bipartite special case, the closed-form
// GHZ/W ratio, and the exact two-qubit mixed-state concurrence.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "qent/state.hpp"

namespace qent {

// Value attained by the n-qubit GHZ state, the maximum over normalized states.
inline double max_concurrence(int n) {
  detail::check_qubit_count(n, 2, "max_concurrence");
  const double dim = std::ldexp(1.0, n);
  return std::exp2(1.0 - 0.5 * n) * std::sqrt((dim - 2.0) / 2.0);
}

namespace detail {

// Gather tables for one representative of each {subset, complement} pair,
// always using the side with fewer qubits. Cached per qubit count since the
// convex-roof search evaluates the same sizes many times.
struct SubsetPair {
  std::vector<std::int64_t> row_map;  // scattered kept-qubit labels
  std::vector<std::int64_t> env_map;  // scattered traced-qubit labels
};

struct SubsetTables {
  std::vector<SubsetPair> pairs;
};

inline SubsetTables build_subset_tables(int n) {
  SubsetTables tables;
  const SubsetMask full = static_cast<SubsetMask>((std::uint64_t{1} << n) - 1);
  for (SubsetMask mask = 1; mask < full; ++mask) {
    const SubsetMask comp = full & ~mask;
    if (mask > comp) continue;  // one representative per complement pair
    const SubsetMask side = (std::popcount(mask) <= std::popcount(comp)) ? mask : comp;
    SubsetPair pair;
    pair.row_map = scatter_table(n, mask_to_qubits(n, side));
    pair.env_map = scatter_table(n, mask_to_qubits(n, full & ~side));
    tables.pairs.push_back(std::move(pair));
  }
  return tables;
}

inline const SubsetTables& subset_tables(int n) {
  thread_local std::unordered_map<int, SubsetTables> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, build_subset_tables(n)).first;
  }
  return it->second;
}

inline double reduced_purity(const Vector& amps, const SubsetPair& pair) {
  const auto ds = static_cast<Eigen::Index>(pair.row_map.size());
  const auto dr = static_cast<Eigen::Index>(pair.env_map.size());
  Matrix a(ds, dr);
  for (Eigen::Index s = 0; s < ds; ++s) {
    const auto base = pair.row_map[static_cast<std::size_t>(s)];
    for (Eigen::Index r = 0; r < dr; ++r) {
      a(s, r) = amps(base | pair.env_map[static_cast<std::size_t>(r)]);
    }
  }
  Matrix g = a * a.adjoint();
  return g.squaredNorm();
}

// Sum of tr(rho_alpha^2) over all 2^n - 2 proper nonempty subsets, computed
// from one representative per complement pair (equal purities for pure
// global states) in fixed ascending-mask order.
inline double subset_purity_sum(const Vector& amps, int n) {
  const auto& tables = subset_tables(n);
  double sum = 0.0;
  for (const auto& pair : tables.pairs) {
    sum += reduced_purity(amps, pair);
  }
  return 2.0 * sum;
}

// Concurrence of a normalized amplitude vector; hot path for the roof search.
inline double concurrence_normalized(const Vector& amps, int n) {
  const double dim = std::ldexp(1.0, n);
  const double radicand = (dim - 2.0) - subset_purity_sum(amps, n);
  if (radicand < -1e-10) {
    throw std::runtime_error(
        "concurrence: radicand " + std::to_string(radicand) +
        " below the round-off clamp; inconsistent purity sum");
  }
  return std::exp2(1.0 - 0.5 * n) * std::sqrt(std::max(0.0, radicand));
}

}  // namespace detail

// Multipartite concurrence of a normalized pure state (n >= 2). Vanishes on
// fully separable states and is maximal on GHZ states.
inline double concurrence_pure(const PureState& psi) {
  detail::check_qubit_count(psi.num_qubits(), 2, "concurrence_pure");
  return detail::concurrence_normalized(psi.amplitudes(), psi.num_qubits());
}

// Bipartite concurrence sqrt(2(1 - tr rho_cut^2)) across the declared cut.
inline double concurrence_bipartite_pure(const PureState& psi, SubsetMask cut) {
  const int n = psi.num_qubits();
  detail::check_qubit_count(n, 2, "concurrence_bipartite_pure");
  detail::check_subset_mask(n, cut, /*allow_full=*/false, "concurrence_bipartite_pure");
  const Matrix reduced = detail::reduced_density_pure(psi.amplitudes(), n, cut);
  const double p = reduced.squaredNorm();
  return std::sqrt(std::max(0.0, 2.0 * (1.0 - p)));
}

// Closed form for C_n(GHZ)/C_n(W): sqrt((1 - 2^{1-n}) n/(n-1)).
// Pure arithmetic, so unlike the state constructors it has no size cap.
inline double ghz_w_ratio(int n) {
  if (n < 2) {
    throw std::invalid_argument("ghz_w_ratio: qubit count must be >= 2");
  }
  return std::sqrt((1.0 - std::exp2(1.0 - n)) * static_cast<double>(n) /
                   static_cast<double>(n - 1));
}

// Exact two-qubit mixed-state concurrence max(0, l1 - l2 - l3 - l4), with
// l_i the decreasing square roots of the eigenvalues of
// rho (sy x sy) conj(rho) (sy x sy).
inline double wootters_concurrence_2q(const DensityMatrix& rho) {
  if (rho.num_qubits() != 2) {
    throw std::invalid_argument("wootters_concurrence_2q: input must be two qubits");
  }
  Matrix yy = Matrix::Zero(4, 4);
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Matrix spin_flipped = yy * rho.matrix().conjugate() * yy;
  Eigen::ComplexEigenSolver<Matrix> es(rho.matrix() * spin_flipped, false);
  std::vector<double> lambdas(4);
  for (int i = 0; i < 4; ++i) {
    lambdas[static_cast<std::size_t>(i)] =
        std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  }
  std::sort(lambdas.begin(), lambdas.end(), std::greater<double>());
  return std::max(0.0, lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]);
}

}  // namespace qent
