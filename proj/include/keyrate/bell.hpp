#pragma once

// Bell basis, Bell-diagonal spectra and their purifications.
//
// Ordering: Phi_1,2 = (|00> +- |11>)/sqrt2, Phi_3,4 = (|10> +- |01>)/sqrt2.
// A z-basis measurement on both qubits disagrees exactly on Phi_3 and Phi_4.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "keyrate/errors.hpp"
#include "keyrate/qmat.hpp"

namespace keyrate {

class BellSpectrum {
 public:
  static constexpr double kEntryTol = 1e-12;
  static constexpr double kSumTol = 1e-10;

  BellSpectrum() : lambda_{1.0, 0.0, 0.0, 0.0} {}

  BellSpectrum(double l1, double l2, double l3, double l4) : lambda_{l1, l2, l3, l4} {
    double sum = 0.0;
    for (double l : lambda_) {
      if (!(l >= -kEntryTol && l <= 1.0 + kEntryTol)) {
        throw DomainError("BellSpectrum: weight outside [0,1]: " + str());
      }
      sum += l;
    }
    if (std::abs(sum - 1.0) > kSumTol) throw DomainError("BellSpectrum: weights do not sum to 1: " + str());
  }

  explicit BellSpectrum(const std::array<double, 4>& l) : BellSpectrum(l[0], l[1], l[2], l[3]) {}

  double operator[](std::size_t i) const { return lambda_[i]; }
  const std::array<double, 4>& values() const { return lambda_; }

  // Bit-error probability of a z (x) z measurement.
  double qber() const { return lambda_[2] + lambda_[3]; }

  double max_abs_diff(const BellSpectrum& o) const {
    double d = 0.0;
    for (std::size_t i = 0; i < 4; ++i) d = std::max(d, std::abs(lambda_[i] - o.lambda_[i]));
    return d;
  }

  std::string str() const {
    std::ostringstream os;
    os << '(' << lambda_[0] << ", " << lambda_[1] << ", " << lambda_[2] << ", " << lambda_[3] << ')';
    return os.str();
  }

 private:
  std::array<double, 4> lambda_;
};

// Amplitudes of Phi_{index+1} in the computational basis |00>,|01>,|10>,|11>.
inline std::array<complex, 4> bell_amplitudes(std::size_t index) {
  const double r = std::numbers::sqrt2 / 2.0;
  switch (index) {
    case 0: return {r, 0.0, 0.0, r};
    case 1: return {r, 0.0, 0.0, -r};
    case 2: return {0.0, r, r, 0.0};
    case 3: return {0.0, -r, r, 0.0};
    default: throw DomainError("bell_amplitudes: index must be 0..3");
  }
}

inline PureState bell_state(std::size_t index) {
  const auto a = bell_amplitudes(index);
  return PureState({2, 2}, std::vector<complex>(a.begin(), a.end()));
}

// Columns are the Bell vectors; U^dagger rho U is rho in the Bell basis.
inline ComplexMatrix bell_basis_matrix() {
  ComplexMatrix u(4, 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto a = bell_amplitudes(k);
    for (std::size_t r = 0; r < 4; ++r) u(r, k) = a[r];
  }
  return u;
}

inline DensityOperator bell_diagonal_state(const BellSpectrum& lambda) {
  ComplexMatrix m(4, 4);
  for (std::size_t k = 0; k < 4; ++k) {
    m += ComplexMatrix::outer(bell_amplitudes(k)) * complex(std::max(lambda[k], 0.0));
  }
  return DensityOperator::normalized({2, 2}, std::move(m));
}

// sum_i sqrt(lambda_i) |Phi_i>_AB |e_i>_E on dims [2,2,4].
inline PureState purify(const BellSpectrum& lambda) {
  std::vector<complex> amps(16);
  for (std::size_t i = 0; i < 4; ++i) {
    const double w = std::sqrt(std::max(lambda[i], 0.0));
    const auto phi = bell_amplitudes(i);
    for (std::size_t ab = 0; ab < 4; ++ab) amps[ab * 4 + i] += w * phi[ab];
  }
  return PureState::normalized({2, 2, 4}, std::move(amps));
}

}  // namespace keyrate
