#pragma once

// Small dense complex linear algebra and entropies for quantum states of
// dimension at most 16 (two qubits plus a four-level environment).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "keyrate/errors.hpp"

namespace keyrate {

using complex = std::complex<double>;

inline constexpr std::size_t kMaxDim = 16;

// Tolerances shared by the state types.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kNegativeEigenTol = 1e-10;
inline constexpr double kNormTol = 1e-10;

class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {
    check_shape(rows, cols);
  }

  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<complex> entries)
      : rows_(rows), cols_(cols), data_(std::move(entries)) {
    check_shape(rows, cols);
    if (data_.size() != rows * cols) {
      throw DomainError("ComplexMatrix: entry count does not match shape");
    }
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(std::span<const double> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  // |v><v| for a column vector v.
  static ComplexMatrix outer(std::span<const complex> v) {
    ComplexMatrix m(v.size(), v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[i] * std::conj(v[j]);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const complex> entries() const { return data_; }

  ComplexMatrix adjoint() const {
    ComplexMatrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
    return m;
  }

  complex trace() const {
    complex t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  // max |M - M^dagger| entrywise.
  double hermiticity_defect() const {
    if (!is_square()) return INFINITY;
    double worst = 0.0;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i; j < cols_; ++j)
        worst = std::max(worst, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return worst;
  }

  bool is_hermitian(double tol = kHermitianTol) const { return hermiticity_defect() <= tol; }

  double max_abs_diff(const ComplexMatrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) return INFINITY;
    double worst = 0.0;
    for (std::size_t k = 0; k < data_.size(); ++k)
      worst = std::max(worst, std::abs(data_[k] - other.data_[k]));
    return worst;
  }

  bool approx_equal(const ComplexMatrix& other, double tol) const {
    return max_abs_diff(other) <= tol;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  ComplexMatrix& operator*=(complex s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, complex s) { return a *= s; }
  friend ComplexMatrix operator*(complex s, ComplexMatrix a) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw DomainError("ComplexMatrix: inner dimensions differ");
    ComplexMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const complex aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  std::vector<complex> apply(std::span<const complex> v) const {
    if (v.size() != cols_) throw DomainError("ComplexMatrix: vector length mismatch");
    std::vector<complex> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out[i] += (*this)(i, j) * v[j];
    return out;
  }

  // M X M^dagger
  ComplexMatrix conjugate(const ComplexMatrix& x) const { return (*this) * x * adjoint(); }

 private:
  static void check_shape(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0 || rows > kMaxDim || cols > kMaxDim) {
      throw DomainError("ComplexMatrix: shape must be within 1..16");
    }
  }
  void require_same_shape(const ComplexMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DomainError("ComplexMatrix: shape mismatch");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<complex> data_;
};

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t k = 0; k < b.rows(); ++k)
        for (std::size_t l = 0; l < b.cols(); ++l)
          c(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
  return c;
}

struct EigenSystem {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // column k belongs to values[k]
};

// Cyclic complex Jacobi. Each rotation first removes the phase of the pivot
// with diag(1, e^{-i phi}) and then applies a real Givens rotation, so the
// accumulated eigenvector matrix stays unitary to rounding.
inline EigenSystem eig_hermitian(const ComplexMatrix& m) {
  constexpr double kOffTol = 1e-12;
  constexpr int kMaxSweeps = 100;

  if (!m.is_square()) throw DomainError("eig_hermitian: matrix is not square");
  if (!m.is_hermitian()) throw DomainError("eig_hermitian: matrix is not Hermitian");

  const std::size_t n = m.rows();
  ComplexMatrix a = m;
  ComplexMatrix v = ComplexMatrix::identity(n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = a(i, i).real();

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < kMaxSweeps && off_norm() >= kOffTol; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const complex z = a(p, q);
        const double mag = std::abs(z);
        if (mag < 1e-300) continue;
        const complex phase = z / mag;  // e^{i phi}
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // G restricted to (p,q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]]
        const complex g_pp = c;
        const complex g_pq = s;
        const complex g_qp = -s * std::conj(phase);
        const complex g_qq = c * std::conj(phase);
        for (std::size_t k = 0; k < n; ++k) {  // A <- A G
          const complex akp = a(k, p);
          const complex akq = a(k, q);
          a(k, p) = akp * g_pp + akq * g_qp;
          a(k, q) = akp * g_pq + akq * g_qq;
        }
        for (std::size_t k = 0; k < n; ++k) {  // A <- G^dagger A
          const complex apk = a(p, k);
          const complex aqk = a(q, k);
          a(p, k) = std::conj(g_pp) * apk + std::conj(g_qp) * aqk;
          a(q, k) = std::conj(g_pq) * apk + std::conj(g_qq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {  // V <- V G
          const complex vkp = v(k, p);
          const complex vkq = v(k, q);
          v(k, p) = vkp * g_pp + vkq * g_qp;
          v(k, q) = vkp * g_pq + vkq * g_qq;
        }
      }
    }
  }
  if (off_norm() >= kOffTol) throw NumericalError("eig_hermitian: Jacobi did not converge in 100 sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

  EigenSystem es{std::vector<double>(n), ComplexMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    es.values[k] = a(order[k], order[k]).real();
    for (std::size_t r = 0; r < n; ++r) es.vectors(r, k) = v(r, order[k]);
  }
  return es;
}

inline std::size_t product_of(std::span<const std::size_t> dims) {
  std::size_t p = 1;
  for (auto d : dims) {
    if (d == 0) throw DomainError("subsystem dimension must be positive");
    p *= d;
  }
  return p;
}

class PureState {
 public:
  PureState(std::vector<std::size_t> dims, std::vector<complex> amplitudes)
      : dims_(std::move(dims)), amplitudes_(std::move(amplitudes)) {
    if (product_of(dims_) != amplitudes_.size() || amplitudes_.size() > kMaxDim) {
      throw DomainError("PureState: amplitude count does not match dims");
    }
    double n2 = 0.0;
    for (const auto& a : amplitudes_) n2 += std::norm(a);
    if (std::abs(std::sqrt(n2) - 1.0) > kNormTol) throw DomainError("PureState: vector is not normalized");
  }

  // Rescales an arbitrary nonzero vector to unit norm.
  static PureState normalized(std::vector<std::size_t> dims, std::vector<complex> amplitudes) {
    double n2 = 0.0;
    for (const auto& a : amplitudes) n2 += std::norm(a);
    if (n2 < 1e-300) throw NumericalError("PureState: cannot normalize the zero vector");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : amplitudes) a *= inv;
    return PureState(std::move(dims), std::move(amplitudes));
  }

  static PureState basis(std::vector<std::size_t> dims, std::size_t index) {
    std::vector<complex> amps(product_of(dims));
    amps.at(index) = 1.0;
    return PureState(std::move(dims), std::move(amps));
  }

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::span<const complex> amplitudes() const { return amplitudes_; }
  std::size_t dimension() const { return amplitudes_.size(); }

  ComplexMatrix projector() const { return ComplexMatrix::outer(amplitudes_); }

 private:
  std::vector<std::size_t> dims_;
  std::vector<complex> amplitudes_;
};

// Hermitian, unit-trace, positive semidefinite matrix on a labelled tensor
// product space. Validated on construction; the spectrum computed for the
// positivity check is kept for entropy evaluation.
class DensityOperator {
 public:
  DensityOperator(std::vector<std::size_t> dims, ComplexMatrix matrix)
      : dims_(std::move(dims)), matrix_(std::move(matrix)) {
    if (!matrix_.is_square() || product_of(dims_) != matrix_.rows()) {
      throw DomainError("DensityOperator: matrix size does not match dims");
    }
    if (!matrix_.is_hermitian(kHermitianTol)) throw DomainError("DensityOperator: matrix is not Hermitian");
    const complex tr = matrix_.trace();
    if (std::abs(tr - 1.0) > kTraceTol) throw DomainError("DensityOperator: trace is not 1");
    eigenvalues_ = eig_hermitian(matrix_).values;
    if (eigenvalues_.front() < -kNegativeEigenTol) {
      throw DomainError("DensityOperator: negative eigenvalue " + std::to_string(eigenvalues_.front()));
    }
  }

  explicit DensityOperator(const PureState& psi) : DensityOperator(psi.dims(), psi.projector()) {}

  // Divides a nonzero positive matrix by its trace.
  static DensityOperator normalized(std::vector<std::size_t> dims, ComplexMatrix m) {
    const double tr = m.trace().real();
    if (!(tr > 1e-300)) throw NumericalError("DensityOperator: cannot normalize a zero-trace matrix");
    m *= 1.0 / tr;
    return DensityOperator(std::move(dims), std::move(m));
  }

  static DensityOperator maximally_mixed(std::vector<std::size_t> dims) {
    const std::size_t n = product_of(dims);
    return DensityOperator(std::move(dims), ComplexMatrix::identity(n) * complex(1.0 / static_cast<double>(n)));
  }

  const std::vector<std::size_t>& dims() const { return dims_; }
  const ComplexMatrix& matrix() const { return matrix_; }
  std::size_t dimension() const { return matrix_.rows(); }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }

  complex operator()(std::size_t i, std::size_t j) const { return matrix_(i, j); }

 private:
  std::vector<std::size_t> dims_;
  ComplexMatrix matrix_;
  std::vector<double> eigenvalues_;
};

namespace detail {
inline std::vector<std::size_t> concat(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}
}  // namespace detail

inline PureState tensor(const PureState& a, const PureState& b) {
  std::vector<complex> amps;
  amps.reserve(a.dimension() * b.dimension());
  for (const auto& x : a.amplitudes())
    for (const auto& y : b.amplitudes()) amps.push_back(x * y);
  return PureState(detail::concat(a.dims(), b.dims()), std::move(amps));
}

inline DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  return DensityOperator(detail::concat(a.dims(), b.dims()), kron(a.matrix(), b.matrix()));
}

// Reduced state on the subsystems listed in `keep`, in their original order.
inline DensityOperator partial_trace(const DensityOperator& rho, std::vector<std::size_t> keep) {
  const auto& dims = rho.dims();
  std::sort(keep.begin(), keep.end());
  if (keep.empty()) throw DomainError("partial_trace: nothing to keep");
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end() || keep.back() >= dims.size()) {
    throw DomainError("partial_trace: invalid subsystem index");
  }
  const std::size_t nsys = dims.size();
  std::vector<bool> kept(nsys, false);
  for (auto k : keep) kept[k] = true;

  std::vector<std::size_t> out_dims;
  for (auto k : keep) out_dims.push_back(dims[k]);
  const std::size_t out_n = product_of(out_dims);
  const std::size_t n = rho.dimension();

  // Split a full index into (kept index, traced index).
  std::vector<std::size_t> kept_idx(n), traced_idx(n);
  for (std::size_t full = 0; full < n; ++full) {
    std::size_t rem = full, k_stride = 1, t_stride = 1, ki = 0, ti = 0;
    for (std::size_t s = nsys; s-- > 0;) {
      const std::size_t digit = rem % dims[s];
      rem /= dims[s];
      if (kept[s]) {
        ki += digit * k_stride;
        k_stride *= dims[s];
      } else {
        ti += digit * t_stride;
        t_stride *= dims[s];
      }
    }
    kept_idx[full] = ki;
    traced_idx[full] = ti;
  }

  ComplexMatrix out(out_n, out_n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (traced_idx[r] == traced_idx[c]) out(kept_idx[r], kept_idx[c]) += rho(r, c);
  return DensityOperator(std::move(out_dims), std::move(out));
}

// Reduced state of a pure state, computed from the amplitudes without forming
// the full projector.
inline DensityOperator partial_trace(const PureState& psi, std::vector<std::size_t> keep) {
  const auto& dims = psi.dims();
  std::sort(keep.begin(), keep.end());
  if (keep.empty()) throw DomainError("partial_trace: nothing to keep");
  if (std::adjacent_find(keep.begin(), keep.end()) != keep.end() || keep.back() >= dims.size()) {
    throw DomainError("partial_trace: invalid subsystem index");
  }
  const std::size_t nsys = dims.size();
  std::vector<bool> kept(nsys, false);
  for (auto k : keep) kept[k] = true;
  std::vector<std::size_t> out_dims;
  std::size_t traced_n = 1;
  for (std::size_t s = 0; s < nsys; ++s) {
    if (kept[s]) {
      out_dims.push_back(dims[s]);
    } else {
      traced_n *= dims[s];
    }
  }
  const std::size_t out_n = product_of(out_dims);

  // amplitudes rearranged as a (kept x traced) matrix
  std::vector<complex> m(out_n * traced_n);
  const auto amps = psi.amplitudes();
  for (std::size_t full = 0; full < amps.size(); ++full) {
    std::size_t rem = full, k_stride = 1, t_stride = 1, ki = 0, ti = 0;
    for (std::size_t s = nsys; s-- > 0;) {
      const std::size_t digit = rem % dims[s];
      rem /= dims[s];
      if (kept[s]) {
        ki += digit * k_stride;
        k_stride *= dims[s];
      } else {
        ti += digit * t_stride;
        t_stride *= dims[s];
      }
    }
    m[ki * traced_n + ti] = amps[full];
  }
  ComplexMatrix out(out_n, out_n);
  for (std::size_t i = 0; i < out_n; ++i)
    for (std::size_t j = 0; j < out_n; ++j) {
      complex s = 0.0;
      for (std::size_t t = 0; t < traced_n; ++t) s += m[i * traced_n + t] * std::conj(m[j * traced_n + t]);
      out(i, j) = s;
    }
  return DensityOperator(std::move(out_dims), std::move(out));
}

// -sum p log2 p over a probability vector, with 0 log 0 = 0. Entries in
// [-1e-10, 0) are treated as rounding and clamped to zero.
inline double shannon_entropy(std::span<const double> p) {
  double s = 0.0;
  for (double x : p) {
    if (x < -kNegativeEigenTol) throw DomainError("shannon_entropy: negative probability");
    if (x > 0.0) s -= x * std::log2(x);
  }
  return s;
}

inline double von_neumann_entropy(const DensityOperator& rho) { return shannon_entropy(rho.eigenvalues()); }

inline double binary_entropy(double p) {
  constexpr double kSlack = 1e-12;
  if (!(p >= -kSlack && p <= 1.0 + kSlack)) throw DomainError("binary_entropy: probability outside [0,1]");
  p = std::clamp(p, 0.0, 1.0);
  const double probs[2] = {p, 1.0 - p};
  return shannon_entropy(probs);
}

}  // namespace keyrate
