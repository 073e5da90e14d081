// Core N-qubit state representations: pure states, density matrices,
// tensor-product construction, partial traces and validation.

#pragma once

#include <Eigen/Dense>

#include <bit>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qent {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

// Shared validation tolerances.
inline constexpr double kNormTol = 1e-10;
inline constexpr double kHermTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-8;

// Subset of qubits encoded as a bitmask: bit k set means qubit k is kept,
// cleared means qubit k is traced out.
using SubsetMask = std::uint32_t;

// Convention: qubit 0 is the most significant bit of a basis-state label,
// so qubit k lives at bit position n-1-k.
inline int qubit_bit_position(int n, int k) { return n - 1 - k; }

namespace detail {

inline std::int64_t dim_for(int n) { return std::int64_t{1} << n; }

inline void check_qubit_count(int n, int min_n, const char* what) {
  if (n < min_n) {
    throw std::invalid_argument(std::string(what) + ": qubit count must be >= " +
                                std::to_string(min_n) + ", got " + std::to_string(n));
  }
  if (n > 30) {
    throw std::invalid_argument(std::string(what) + ": qubit count too large");
  }
}

}  // namespace detail

// Normalized pure state of n qubits in the computational basis.
class PureState {
 public:
  PureState(int n, Vector amplitudes) : n_(n), amps_(std::move(amplitudes)) {
    detail::check_qubit_count(n_, 1, "PureState");
    if (amps_.size() != detail::dim_for(n_)) {
      throw std::invalid_argument("PureState: amplitude vector has dimension " +
                                  std::to_string(amps_.size()) + ", expected 2^" +
                                  std::to_string(n_));
    }
    const double sq = amps_.squaredNorm();
    if (std::abs(sq - 1.0) > kNormTol) {
      throw std::invalid_argument("PureState: squared norm " + std::to_string(sq) +
                                  " is not 1 within tolerance");
    }
  }

  int num_qubits() const { return n_; }
  Eigen::Index dim() const { return amps_.size(); }
  const Vector& amplitudes() const { return amps_; }
  Complex amplitude(Eigen::Index i) const { return amps_(i); }

 private:
  int n_;
  Vector amps_;
};

// Hermitian, positive-semidefinite, trace-one matrix of dimension 2^n.
class DensityMatrix {
 public:
  DensityMatrix(int n, Matrix entries) : n_(n), m_(std::move(entries)) {
    detail::check_qubit_count(n_, 1, "DensityMatrix");
    const auto d = detail::dim_for(n_);
    if (m_.rows() != d || m_.cols() != d) {
      throw std::invalid_argument("DensityMatrix: entries must be 2^n x 2^n");
    }
    const double herm_dev = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
    if (herm_dev > kHermTol) {
      throw std::invalid_argument("DensityMatrix: Hermiticity deviation " +
                                  std::to_string(herm_dev) + " exceeds tolerance");
    }
    const Complex tr = m_.trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > kTraceTol) {
      throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " +
                                  std::to_string(std::abs(tr - Complex(1.0, 0.0))));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < kEigenvalueFloor) {
      throw std::invalid_argument("DensityMatrix: minimum eigenvalue " +
                                  std::to_string(min_eig) + " below floor");
    }
  }

  int num_qubits() const { return n_; }
  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Complex entry(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

 private:
  int n_;
  Matrix m_;
};

namespace detail {

// Scatter a dense sub-index over the bit positions selected by the given
// qubit list (qubits in ascending index order keep their relative MSB order).
inline std::vector<std::int64_t> scatter_table(int n, const std::vector<int>& qubits) {
  const int m = static_cast<int>(qubits.size());
  std::vector<std::int64_t> table(std::size_t{1} << m, 0);
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(table.size()); ++s) {
    std::int64_t idx = 0;
    for (int j = 0; j < m; ++j) {
      if ((s >> (m - 1 - j)) & 1) {
        idx |= std::int64_t{1} << qubit_bit_position(n, qubits[j]);
      }
    }
    table[static_cast<std::size_t>(s)] = idx;
  }
  return table;
}

inline std::vector<int> mask_to_qubits(int n, SubsetMask mask) {
  std::vector<int> qubits;
  for (int k = 0; k < n; ++k) {
    if ((mask >> k) & 1u) qubits.push_back(k);
  }
  return qubits;
}

inline void check_subset_mask(int n, SubsetMask keep, bool allow_full, const char* what) {
  const SubsetMask full = static_cast<SubsetMask>((std::uint64_t{1} << n) - 1);
  if (keep == 0 || keep > full || (!allow_full && keep == full)) {
    throw std::invalid_argument(std::string(what) + ": subset mask out of range");
  }
}

// Reduced density matrix of a pure state on the kept subset, as a raw matrix.
// Built by summing amplitude outer products over the traced-out labels:
// rho_S(s,s') = sum_r psi[s|r] conj(psi[s'|r]).
inline Matrix reduced_density_pure(const Vector& amps, int n, SubsetMask keep) {
  const auto kept = mask_to_qubits(n, keep);
  const SubsetMask full = static_cast<SubsetMask>((std::uint64_t{1} << n) - 1);
  const auto traced = mask_to_qubits(n, full & ~keep);
  const auto row_map = scatter_table(n, kept);
  const auto env_map = scatter_table(n, traced);
  const auto ds = static_cast<Eigen::Index>(row_map.size());
  const auto dr = static_cast<Eigen::Index>(env_map.size());
  Matrix a(ds, dr);
  for (Eigen::Index s = 0; s < ds; ++s) {
    const auto base = row_map[static_cast<std::size_t>(s)];
    for (Eigen::Index r = 0; r < dr; ++r) {
      a(s, r) = amps(base | env_map[static_cast<std::size_t>(r)]);
    }
  }
  return a * a.adjoint();
}

}  // namespace detail

// (|00...0> + |11...1>)/sqrt(2).
inline PureState ghz_state(int n) {
  detail::check_qubit_count(n, 2, "ghz_state");
  Vector amps = Vector::Zero(detail::dim_for(n));
  const double r = 1.0 / std::sqrt(2.0);
  amps(0) = r;
  amps(detail::dim_for(n) - 1) = r;
  return PureState(n, std::move(amps));
}

// Equal superposition of the n single-excitation basis states.
inline PureState w_state(int n) {
  detail::check_qubit_count(n, 2, "w_state");
  Vector amps = Vector::Zero(detail::dim_for(n));
  const double r = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k) {
    amps(std::int64_t{1} << k) = r;
  }
  return PureState(n, std::move(amps));
}

// Tensor product of single-qubit factors; the first factor is qubit 0.
inline PureState product_state(std::span<const Eigen::Vector2cd> factors) {
  if (factors.empty()) {
    throw std::invalid_argument("product_state: need at least one factor");
  }
  for (const auto& f : factors) {
    if (std::abs(f.squaredNorm() - 1.0) > kNormTol) {
      throw std::invalid_argument("product_state: unnormalized factor");
    }
  }
  const int n = static_cast<int>(factors.size());
  Vector amps = Vector::Constant(detail::dim_for(n), Complex(1.0, 0.0));
  for (std::int64_t idx = 0; idx < detail::dim_for(n); ++idx) {
    Complex v(1.0, 0.0);
    for (int k = 0; k < n; ++k) {
      const int bit = static_cast<int>((idx >> qubit_bit_position(n, k)) & 1);
      v *= factors[static_cast<std::size_t>(k)](bit);
    }
    amps(idx) = v;
  }
  return PureState(n, std::move(amps));
}

// |a> tensor |b>; the qubits of a come first (more significant labels).
inline PureState tensor_product(const PureState& a, const PureState& b) {
  const int n = a.num_qubits() + b.num_qubits();
  detail::check_qubit_count(n, 2, "tensor_product");
  Vector amps(detail::dim_for(n));
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    amps.segment(i * b.dim(), b.dim()) = a.amplitude(i) * b.amplitudes();
  }
  return PureState(n, std::move(amps));
}

// Haar-distributed pure state: normalized i.i.d. complex Gaussian amplitudes.
template <class Rng>
PureState random_pure_state(int n, Rng& rng) {
  detail::check_qubit_count(n, 1, "random_pure_state");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector amps(detail::dim_for(n));
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    amps(i) = Complex(gauss(rng), gauss(rng));
  }
  amps /= amps.norm();
  return PureState(n, std::move(amps));
}

// Random mixed state of the given rank: normalized Gram matrix of a
// dim x rank Ginibre block.
template <class Rng>
DensityMatrix random_density_matrix(int n, int rank, Rng& rng) {
  detail::check_qubit_count(n, 1, "random_density_matrix");
  const auto d = detail::dim_for(n);
  if (rank < 1 || rank > d) {
    throw std::invalid_argument("random_density_matrix: rank out of range");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix block(d, rank);
  for (Eigen::Index c = 0; c < rank; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) {
      block(r, c) = Complex(gauss(rng), gauss(rng));
    }
  }
  Matrix m = block * block.adjoint();
  m /= m.trace().real();
  return DensityMatrix(n, std::move(m));
}

// Outer product |psi><psi|.
inline DensityMatrix density_from_pure(const PureState& psi) {
  Matrix m = psi.amplitudes() * psi.amplitudes().adjoint();
  return DensityMatrix(psi.num_qubits(), std::move(m));
}

// Trace out the qubits whose mask bit is cleared. Keeping every qubit is
// allowed as an identity convenience; the empty subset is rejected.
inline DensityMatrix partial_trace(const DensityMatrix& rho, SubsetMask keep) {
  const int n = rho.num_qubits();
  detail::check_subset_mask(n, keep, /*allow_full=*/true, "partial_trace");
  const SubsetMask full = static_cast<SubsetMask>((std::uint64_t{1} << n) - 1);
  if (keep == full) {
    return rho;
  }
  const auto kept = detail::mask_to_qubits(n, keep);
  const auto traced = detail::mask_to_qubits(n, full & ~keep);
  const auto row_map = detail::scatter_table(n, kept);
  const auto env_map = detail::scatter_table(n, traced);
  const auto ds = static_cast<Eigen::Index>(row_map.size());
  Matrix out = Matrix::Zero(ds, ds);
  for (Eigen::Index s = 0; s < ds; ++s) {
    for (Eigen::Index t = 0; t < ds; ++t) {
      Complex acc(0.0, 0.0);
      for (const auto r : env_map) {
        acc += rho.entry(row_map[static_cast<std::size_t>(s)] | r,
                         row_map[static_cast<std::size_t>(t)] | r);
      }
      out(s, t) = acc;
    }
  }
  return DensityMatrix(static_cast<int>(kept.size()), std::move(out));
}

// tr(rho^2); exactly real for Hermitian input.
inline double purity(const DensityMatrix& rho) { return rho.matrix().squaredNorm(); }

// Half the absolute-eigenvalue sum of the difference.
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("trace_distance: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.matrix() - b.matrix(), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace qent
