#pragma once

// QKD protocols as encoding/decoding operator data, the protocol map D1, the
// Bell-diagonal twirl D2, and each protocol's QBER-constrained family of
// attack spectra.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "keyrate/bell.hpp"
#include "keyrate/errors.hpp"
#include "keyrate/qmat.hpp"

namespace keyrate {

using Qubit = std::array<complex, 2>;

// One sifting branch: Alice's encoding operator, Bob's decoding operator and
// the probability that this branch is kept.
struct Branch {
  ComplexMatrix alice;
  ComplexMatrix bob;
  double weight = 1.0;
};

// Gamma_QBER as a (possibly 1-parameter) curve of Bell spectra.
struct FeasibleFamily {
  int parameter_count = 0;
  double noise_max = 0.5;
  // Domain of the free parameter at a given noise value; ignored when
  // parameter_count == 0.
  std::function<std::pair<double, double>(double)> parameter_bounds;
  std::function<BellSpectrum(double noise, double t)> spectrum;

  std::pair<double, double> bounds(double noise) const {
    if (parameter_count == 0) return {0.0, 0.0};
    return parameter_bounds(noise);
  }
  BellSpectrum at(double noise, double t = 0.0) const { return spectrum(noise, t); }
};

enum class ProtocolKind { kBB84, kSixState, kB92 };

struct ProtocolSpec {
  std::string name;
  ProtocolKind kind = ProtocolKind::kBB84;
  std::vector<Branch> branches;
  FeasibleFamily family;
  std::string noise_name = "QBER";
  std::optional<double> overlap;  // B92 only

  void check_noise(double noise) const {
    if (!(noise >= 0.0 && noise <= family.noise_max)) {
      throw DomainError(name + ": " + noise_name + " = " + std::to_string(noise) + " outside [0, " +
                        std::to_string(family.noise_max) + "]");
    }
  }
};

namespace detail {

inline double norm2(const Qubit& v) { return std::norm(v[0]) + std::norm(v[1]); }

inline complex inner(const Qubit& a, const Qubit& b) { return std::conj(a[0]) * b[0] + std::conj(a[1]) * b[1]; }

// Component of `other` orthogonal to `v`, normalized.
inline Qubit orthogonal_to(const Qubit& v, const Qubit& other) {
  const complex ov = inner(v, other);
  Qubit w{other[0] - ov * v[0], other[1] - ov * v[1]};
  const double n = std::sqrt(norm2(w));
  if (n < 1e-12) throw DomainError("encoding states must be linearly independent");
  return {w[0] / n, w[1] / n};
}

inline Qubit normalized(Qubit v) {
  const double n = std::sqrt(norm2(v));
  if (n < 1e-300) throw DomainError("encoding state is the zero vector");
  return {v[0] / n, v[1] / n};
}

inline ComplexMatrix pauli_x() { return ComplexMatrix(2, 2, {0.0, 1.0, 1.0, 0.0}); }
inline ComplexMatrix pauli_z() { return ComplexMatrix(2, 2, {1.0, 0.0, 0.0, -1.0}); }

}  // namespace detail

// A_j = |0><(phi0)*| + |1><(phi1)*| and B_j = |0><phi1_hat| + |1><phi0_hat|,
// where phi_i_hat is the normalized part of phi_{1-i} orthogonal to phi_i.
inline Branch basis_branch(Qubit phi0, Qubit phi1, double weight) {
  phi0 = detail::normalized(phi0);
  phi1 = detail::normalized(phi1);
  const Qubit hat0 = detail::orthogonal_to(phi0, phi1);
  const Qubit hat1 = detail::orthogonal_to(phi1, phi0);
  // Row i of A is the bra <(phi_i)*|, whose entries are those of phi_i.
  ComplexMatrix a(2, 2, {phi0[0], phi0[1], phi1[0], phi1[1]});
  ComplexMatrix b(2, 2, {std::conj(hat1[0]), std::conj(hat1[1]), std::conj(hat0[0]), std::conj(hat0[1])});
  return Branch{std::move(a), std::move(b), weight};
}

inline ProtocolSpec bb84() {
  const double r = std::numbers::sqrt2 / 2.0;
  ProtocolSpec spec;
  spec.name = "bb84";
  spec.kind = ProtocolKind::kBB84;
  spec.branches.push_back(basis_branch({r, r}, {r, -r}, 0.5));
  spec.branches.push_back(basis_branch({1.0, 0.0}, {0.0, 1.0}, 0.5));
  spec.family.parameter_count = 1;
  spec.family.noise_max = 0.5;
  spec.family.parameter_bounds = [](double q) { return std::pair{0.0, q}; };
  spec.family.spectrum = [](double q, double t) { return BellSpectrum(1.0 - q - t, t, t, q - t); };
  return spec;
}

inline BellSpectrum six_state_spectrum(double q) {
  if (!(q >= 0.0 && q <= 2.0 / 3.0)) throw DomainError("six-state family: QBER must lie in [0, 2/3]");
  return BellSpectrum(1.0 - 1.5 * q, q / 2.0, q / 2.0, q / 2.0);
}

inline ProtocolSpec six_state() {
  const double r = std::numbers::sqrt2 / 2.0;
  const complex i(0.0, 1.0);
  ProtocolSpec spec;
  spec.name = "six-state";
  spec.kind = ProtocolKind::kSixState;
  spec.branches.push_back(basis_branch({1.0, 0.0}, {0.0, 1.0}, 1.0 / 3.0));
  spec.branches.push_back(basis_branch({r, r}, {r, -r}, 1.0 / 3.0));
  spec.branches.push_back(basis_branch({r, r * i}, {r, -r * i}, 1.0 / 3.0));
  spec.family.parameter_count = 0;
  spec.family.noise_max = 0.5;
  spec.family.spectrum = [](double q, double) { return six_state_spectrum(q); };
  return spec;
}

inline void check_overlap(double overlap) {
  if (!(overlap > 0.0 && overlap < 1.0)) throw DomainError("B92 overlap must lie strictly inside (0,1)");
}

// Real signal states cos(a)|0> +- sin(a)|1> with <phi0|phi1> = cos(2a).
inline std::pair<Qubit, Qubit> b92_signal_states(double overlap) {
  check_overlap(overlap);
  const double a = std::acos(overlap) / 2.0;
  return {Qubit{std::cos(a), std::sin(a)}, Qubit{std::cos(a), -std::sin(a)}};
}

inline constexpr double kDefaultB92Overlap = std::numbers::sqrt2 / 2.0;  // cos(pi/4)

// Bell-basis diagonal <Phi_i|rho|Phi_i>.
inline BellSpectrum bell_spectrum(const DensityOperator& rho) {
  if (rho.dimension() != 4) throw DomainError("bell_spectrum: expected a two-qubit state");
  std::array<double, 4> l{};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto phi = bell_amplitudes(k);
    complex s = 0.0;
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) s += std::conj(phi[r]) * rho(r, c) * phi[c];
    l[k] = s.real();
  }
  return BellSpectrum(l);
}

// (1/4) sum_O (O x O) rho (O x O)^dagger over O in {1, Z, X, ZX}.
inline DensityOperator d2_twirl(const DensityOperator& rho) {
  if (rho.dimension() != 4) throw DomainError("d2_twirl: expected a two-qubit state");
  const ComplexMatrix z = detail::pauli_z();
  const ComplexMatrix x = detail::pauli_x();
  const std::array<ComplexMatrix, 4> ops{ComplexMatrix::identity(2), z, x, z * x};
  ComplexMatrix acc(4, 4);
  for (const auto& o : ops) acc += kron(o, o).conjugate(rho.matrix());
  acc *= 0.25;
  return DensityOperator({2, 2}, std::move(acc));
}

// Unnormalized (A_j x B_j) rho (A_j x B_j)^dagger.
inline ComplexMatrix apply_branch(const Branch& br, const ComplexMatrix& rho) {
  return kron(br.alice, br.bob).conjugate(rho);
}

// sum_j w_j (A_j x B_j) rho (A_j x B_j)^dagger with w_j = p_j / sum p, then
// renormalized to unit trace.
inline DensityOperator d1_map(const ProtocolSpec& spec, const DensityOperator& rho) {
  if (rho.dimension() != 4) throw DomainError("d1_map: expected a two-qubit state");
  if (spec.branches.empty()) throw DomainError("d1_map: protocol has no branches");
  double total = 0.0;
  for (const auto& br : spec.branches) total += br.weight;
  ComplexMatrix acc(4, 4);
  for (const auto& br : spec.branches) acc += apply_branch(br, rho.matrix()) * complex(br.weight / total);
  if (acc.trace().real() < 1e-12) throw NumericalError("d1_map: every branch annihilates the state");
  return DensityOperator::normalized({2, 2}, std::move(acc));
}

// z-basis disagreement probability of the state kept by one branch.
inline double branch_error_rate(const Branch& br, const DensityOperator& rho) {
  const ComplexMatrix out = apply_branch(br, rho.matrix());
  const double tr = out.trace().real();
  if (tr < 1e-12) throw NumericalError("branch_error_rate: branch annihilates the state");
  return (out(1, 1).real() + out(2, 2).real()) / tr;
}

// Random two-qubit state: partial trace over R of the normalized vector
// |Phi_1>|0>_R + sigma g on AB (x) R, g complex standard Gaussian and
// log10(sigma) uniform on [-1.5, 0]. The anchor keeps low-QBER states in
// reach; sigma = 1 already gives nearly Haar-random purifications.
template <class Rng>
DensityOperator random_two_qubit_state(Rng& rng) {
  std::uniform_real_distribution<double> log_sigma(-1.5, 0.0);
  std::normal_distribution<double> gauss(0.0, std::numbers::sqrt2 / 2.0);
  const double sigma = std::pow(10.0, log_sigma(rng));
  std::vector<complex> amps(16);
  const auto phi = bell_amplitudes(0);
  for (std::size_t ab = 0; ab < 4; ++ab) {
    for (std::size_t r = 0; r < 4; ++r) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      amps[ab * 4 + r] = sigma * complex(re, im) + (r == 0 ? phi[ab] : complex(0.0));
    }
  }
  return partial_trace(PureState::normalized({2, 2, 4}, std::move(amps)), {0, 1});
}

// Per-basis error-rate window. For six-state the averaged output deviates
// from the analytic point by up to 1.5x this value, so 4e-3 keeps every
// accepted spectrum within 6e-3 of its family.
inline constexpr double kFeasibleTolerance = 4e-3;

// Map-level image D2(D1(Gamma_Q)): random states whose error rate in every
// protocol basis is within `tolerance` of q, pushed through D1 and D2.
inline std::vector<BellSpectrum> sample_feasible_set(const ProtocolSpec& spec, double q, std::size_t n_samples,
                                                     std::uint64_t seed, double tolerance = kFeasibleTolerance) {
  if (n_samples == 0) throw DomainError("sample_feasible_set: n_samples must be at least 1");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("sample_feasible_set: QBER outside [0,1]");
  std::mt19937_64 rng(seed);
  std::vector<BellSpectrum> accepted;
  for (std::size_t n = 0; n < n_samples; ++n) {
    const DensityOperator rho0 = random_two_qubit_state(rng);
    bool ok = true;
    for (const auto& br : spec.branches) {
      if (std::abs(branch_error_rate(br, rho0) - q) > tolerance) {
        ok = false;
        break;
      }
    }
    if (ok) accepted.push_back(bell_spectrum(d2_twirl(d1_map(spec, rho0))));
  }
  return accepted;
}

// Max-norm distance from a spectrum to the family's curve at a fixed noise
// value (a point for 0-parameter families), minimized on a dense grid.
inline double family_distance(const FeasibleFamily& family, double noise, const BellSpectrum& lambda,
                              std::size_t grid_points = 4001) {
  if (family.parameter_count == 0) return lambda.max_abs_diff(family.at(noise));
  const auto [lo, hi] = family.bounds(noise);
  double best = lambda.max_abs_diff(family.at(noise, lo));
  for (std::size_t i = 1; i < grid_points; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_points - 1);
    best = std::min(best, lambda.max_abs_diff(family.at(noise, t)));
  }
  return best;
}

struct B92State {
  DensityOperator filtered;  // post-selected, before the twirl
  DensityOperator twirled;
  BellSpectrum spectrum;
  double p_pass = 0.0;
  double qber = 0.0;
};

inline void check_delta(double delta) {
  if (!(delta >= 0.0 && delta < 0.5)) throw DomainError("B92: delta must lie in [0, 1/2)");
}

// E_delta(rho) = (1 - 2 delta) rho + delta 1 on Bob's qubit, i.e.
// (1 - 2 delta) rho_AB + delta rho_A (x) 1.
inline ComplexMatrix depolarize_second_qubit(const ComplexMatrix& rho_ab, double delta) {
  ComplexMatrix rho_a(2, 2);
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t a2 = 0; a2 < 2; ++a2) rho_a(a, a2) = rho_ab(2 * a, 2 * a2) + rho_ab(2 * a + 1, 2 * a2 + 1);
  return rho_ab * complex(1.0 - 2.0 * delta) + kron(rho_a, ComplexMatrix::identity(2)) * complex(delta);
}

inline B92State b92_state(double overlap, double delta) {
  check_overlap(overlap);
  check_delta(delta);
  const ProtocolSpec spec = [&] {
    const auto [phi0, phi1] = b92_signal_states(overlap);
    ProtocolSpec s;
    s.branches.push_back(basis_branch(phi0, phi1, 1.0));
    return s;
  }();
  const Branch& br = spec.branches.front();

  const ComplexMatrix phi_plus = bell_state(0).projector();
  const ComplexMatrix prepared = kron(br.alice, ComplexMatrix::identity(2)).conjugate(phi_plus);
  const ComplexMatrix noisy = depolarize_second_qubit(prepared, delta);
  const ComplexMatrix kept = kron(ComplexMatrix::identity(2), br.bob).conjugate(noisy);

  // B_1 is not a contraction; scale it into a valid measurement operator
  // before reading off the pass probability.
  const double filter_norm = eig_hermitian(br.bob.adjoint() * br.bob).values.back();
  const double p_pass = kept.trace().real() / filter_norm;
  if (p_pass < 1e-12) throw NumericalError("b92_state: filter pass probability vanishes");

  DensityOperator filtered = DensityOperator::normalized({2, 2}, kept);
  DensityOperator twirled = d2_twirl(filtered);
  BellSpectrum spectrum = bell_spectrum(twirled);
  const double qber = spectrum.qber();
  return B92State{std::move(filtered), std::move(twirled), spectrum, p_pass, qber};
}

inline ProtocolSpec b92(double overlap = kDefaultB92Overlap) {
  const auto [phi0, phi1] = b92_signal_states(overlap);
  ProtocolSpec spec;
  spec.name = "b92";
  spec.kind = ProtocolKind::kB92;
  spec.branches.push_back(basis_branch(phi0, phi1, 1.0));
  spec.noise_name = "delta";
  spec.overlap = overlap;
  spec.family.parameter_count = 0;
  spec.family.noise_max = 0.5 - 1e-9;
  spec.family.spectrum = [overlap](double delta, double) { return b92_state(overlap, delta).spectrum; };
  return spec;
}

}  // namespace keyrate
