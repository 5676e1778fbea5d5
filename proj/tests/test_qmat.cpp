#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "keyrate/bell.hpp"
#include "keyrate/errors.hpp"
#include "keyrate/qmat.hpp"
#include "test_support.hpp"

using namespace keyrate;
using keyrate::fixtures::Rng;

namespace {

const double kR = std::numbers::sqrt2 / 2.0;

DensityOperator plus_state() { return DensityOperator(PureState({2}, {kR, kR})); }
DensityOperator zero_state() { return DensityOperator(PureState::basis({2}, 0)); }

}  // namespace

TEST(Tensor, PlusTimesZero) {
  const DensityOperator r = tensor(plus_state(), zero_state());
  ASSERT_EQ(r.dimension(), 4u);
  EXPECT_NEAR(r.matrix()(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(r.matrix()(0, 2).real(), 0.5, 1e-15);
  EXPECT_NEAR(std::abs(r.matrix()(1, 1)), 0.0, 1e-15);
  EXPECT_EQ(r.dims(), (std::vector<std::size_t>{2, 2}));
}

TEST(Tensor, PureMatchesDensity) {
  Rng rng(3);
  const PureState a = fixtures::random_pure(rng, {2});
  const PureState b = fixtures::random_pure(rng, {3});
  const DensityOperator from_pure(tensor(a, b));
  const DensityOperator from_mixed = tensor(DensityOperator(a), DensityOperator(b));
  EXPECT_LT(from_pure.matrix().max_abs_diff(from_mixed.matrix()), 1e-14);
}

TEST(PartialTrace, ProductStateFactors) {
  const DensityOperator r = tensor(plus_state(), zero_state());
  EXPECT_LT(partial_trace(r, {0}).matrix().max_abs_diff(plus_state().matrix()), 1e-14);
  EXPECT_LT(partial_trace(r, {1}).matrix().max_abs_diff(zero_state().matrix()), 1e-14);
}

TEST(PartialTrace, BellReducesToMaximallyMixed) {
  for (std::size_t i = 0; i < 4; ++i) {
    const DensityOperator r = partial_trace(bell_state(i), {1});
    EXPECT_LT(r.matrix().max_abs_diff(DensityOperator::maximally_mixed({2}).matrix()), 1e-14);
  }
}

TEST(PartialTrace, Composition) {
  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    const DensityOperator rho = fixtures::random_density(rng, {2, 2, 4});
    const DensityOperator two_steps = partial_trace(partial_trace(rho, {0, 1}), {0});
    const DensityOperator one_step = partial_trace(rho, {0});
    EXPECT_LT(two_steps.matrix().max_abs_diff(one_step.matrix()), 1e-12);
    const DensityOperator other_order = partial_trace(partial_trace(rho, {0, 2}), {0});
    EXPECT_LT(other_order.matrix().max_abs_diff(one_step.matrix()), 1e-12);
  }
}

TEST(PartialTrace, PureShortcutMatchesDensityPath) {
  Rng rng(5);
  for (int k = 0; k < 10; ++k) {
    const PureState psi = fixtures::random_pure(rng, {2, 2, 4});
    for (const std::vector<std::size_t>& keep :
         {std::vector<std::size_t>{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}}) {
      const DensityOperator a = partial_trace(psi, keep);
      const DensityOperator b = partial_trace(DensityOperator(psi), keep);
      EXPECT_LT(a.matrix().max_abs_diff(b.matrix()), 1e-12);
    }
  }
}

TEST(PartialTrace, InvalidIndex) {
  const DensityOperator r = tensor(plus_state(), zero_state());
  EXPECT_THROW(partial_trace(r, {2}), DomainError);
  EXPECT_THROW(partial_trace(r, {}), DomainError);
  EXPECT_THROW(partial_trace(r, {0, 0}), DomainError);
}

TEST(DensityOperatorCtor, RejectsInvalid) {
  EXPECT_THROW(DensityOperator({2}, ComplexMatrix(2, 2, {1.0, 0.0, 0.0, 1.0})), DomainError);   // trace 2
  EXPECT_THROW(DensityOperator({2}, ComplexMatrix(2, 2, {1.5, 0.0, 0.0, -0.5})), DomainError);  // negative
  EXPECT_THROW(DensityOperator({2}, ComplexMatrix(2, 2, {0.5, 0.3, 0.0, 0.5})), DomainError);   // not Hermitian
  EXPECT_THROW(DensityOperator({3}, ComplexMatrix::identity(2) * complex(0.5)), DomainError);
  EXPECT_THROW(PureState({2}, {1.0, 1.0}), DomainError);
}

TEST(Eig, Diagonal) {
  const double d[] = {3.0, 1.0, 2.0};
  const EigenSystem es = eig_hermitian(ComplexMatrix::diagonal(d));
  ASSERT_EQ(es.values.size(), 3u);
  EXPECT_NEAR(es.values[0], 1.0, 1e-14);
  EXPECT_NEAR(es.values[1], 2.0, 1e-14);
  EXPECT_NEAR(es.values[2], 3.0, 1e-14);
}

TEST(Eig, PauliX) {
  const EigenSystem es = eig_hermitian(ComplexMatrix(2, 2, {0.0, 1.0, 1.0, 0.0}));
  EXPECT_NEAR(es.values[0], -1.0, 1e-14);
  EXPECT_NEAR(es.values[1], 1.0, 1e-14);
  // eigenvector of +1 is |+> up to phase
  EXPECT_NEAR(std::abs(es.vectors(0, 1)), kR, 1e-12);
  EXPECT_NEAR(std::abs(es.vectors(1, 1)), kR, 1e-12);
}

TEST(Eig, RandomReconstruction) {
  Rng rng(8);
  for (std::size_t n : {2u, 4u, 8u, 16u}) {
    const ComplexMatrix h = fixtures::random_hermitian(rng, n);
    const EigenSystem es = eig_hermitian(h);
    const ComplexMatrix back = es.vectors * ComplexMatrix::diagonal(es.values) * es.vectors.adjoint();
    EXPECT_LT(back.max_abs_diff(h), 1e-8) << "n = " << n;
    const ComplexMatrix gram = es.vectors.adjoint() * es.vectors;
    EXPECT_LT(gram.max_abs_diff(ComplexMatrix::identity(n)), 1e-10);
    for (std::size_t k = 1; k < n; ++k) EXPECT_LE(es.values[k - 1], es.values[k]);
  }
}

TEST(Eig, RejectsNonHermitian) {
  EXPECT_THROW(eig_hermitian(ComplexMatrix(2, 2, {0.0, 1.0, 0.0, 0.0})), DomainError);
}

TEST(Entropy, Examples) {
  EXPECT_NEAR(von_neumann_entropy(DensityOperator(bell_state(0))), 0.0, 1e-12);
  EXPECT_NEAR(von_neumann_entropy(DensityOperator::maximally_mixed({2, 2})), 2.0, 1e-12);

  const BellSpectrum l(0.8, 0.1, 0.05, 0.05);
  const double oracle = fixtures::entropy_bits({0.8, 0.1, 0.05, 0.05});
  EXPECT_NEAR(oracle, 1.0219, 1e-4);
  EXPECT_NEAR(von_neumann_entropy(bell_diagonal_state(l)), oracle, 1e-12);
}

TEST(Entropy, BasisInvariance) {
  Rng rng(21);
  for (int k = 0; k < 50; ++k) {
    const DensityOperator rho = fixtures::random_density(rng, {2, 2});
    const ComplexMatrix u = fixtures::random_unitary(rng, 4);
    const DensityOperator rotated({2, 2}, u.conjugate(rho.matrix()));
    EXPECT_NEAR(von_neumann_entropy(rotated), von_neumann_entropy(rho), 1e-8);
  }
}

TEST(Entropy, Additivity) {
  Rng rng(22);
  for (int k = 0; k < 50; ++k) {
    const DensityOperator a = fixtures::random_density(rng, {2});
    const DensityOperator b = fixtures::random_density(rng, {4});
    EXPECT_NEAR(von_neumann_entropy(tensor(a, b)), von_neumann_entropy(a) + von_neumann_entropy(b), 1e-8);
  }
}

TEST(Entropy, PureStateMarginalsAgree) {
  Rng rng(23);
  for (int k = 0; k < 20; ++k) {
    const PureState psi = fixtures::random_pure(rng, {2, 2, 4});
    EXPECT_NEAR(von_neumann_entropy(partial_trace(psi, {0, 1})), von_neumann_entropy(partial_trace(psi, {2})),
                1e-9);
  }
}

TEST(BinaryEntropy, Examples) {
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.5), 1.0, 1e-15);
  EXPECT_NEAR(binary_entropy(0.25), 0.811278, 1e-6);
  EXPECT_NEAR(binary_entropy(0.11), binary_entropy(0.89), 1e-15);
}

TEST(BinaryEntropy, OutOfRange) {
  EXPECT_THROW(binary_entropy(-0.01), DomainError);
  EXPECT_THROW(binary_entropy(1.01), DomainError);
  EXPECT_THROW(binary_entropy(std::nan("")), DomainError);
}

TEST(Purify, Examples) {
  const PureState psi = purify(BellSpectrum(1.0, 0.0, 0.0, 0.0));
  EXPECT_NEAR(von_neumann_entropy(partial_trace(psi, {2})), 0.0, 1e-12);
  const PureState mixed = purify(BellSpectrum(0.25, 0.25, 0.25, 0.25));
  EXPECT_LT(partial_trace(mixed, {0, 1}).matrix().max_abs_diff(DensityOperator::maximally_mixed({2, 2}).matrix()),
            1e-12);
  EXPECT_NEAR(von_neumann_entropy(partial_trace(mixed, {2})), 2.0, 1e-12);
}

TEST(Purify, RoundTrip) {
  Rng rng(31);
  for (int k = 0; k < 100; ++k) {
    const BellSpectrum l = fixtures::random_spectrum(rng);
    const PureState psi = purify(l);
    const DensityOperator ab = partial_trace(psi, {0, 1});
    EXPECT_LT(ab.matrix().max_abs_diff(bell_diagonal_state(l).matrix()), 1e-10);
  }
}

TEST(Bell, BasisIsOrthonormal) {
  const ComplexMatrix u = bell_basis_matrix();
  EXPECT_LT((u.adjoint() * u).max_abs_diff(ComplexMatrix::identity(4)), 1e-14);
}

TEST(Bell, SpectrumValidation) {
  EXPECT_THROW(BellSpectrum(0.5, 0.5, 0.5, -0.5), DomainError);
  EXPECT_THROW(BellSpectrum(0.5, 0.2, 0.2, 0.2), DomainError);
  EXPECT_DOUBLE_EQ(BellSpectrum(0.7, 0.1, 0.15, 0.05).qber(), 0.2);
}
