#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "opkernel/algebra.hpp"
#include "opkernel/rng.hpp"

using namespace opkernel;

namespace {

const AlgebraShape kM2{{2}};
const AlgebraShape kM2C{{2, 1}};

AlgElement random_element(Rng &rng, const AlgebraShape &shape) {
  std::vector<CMatrix> blocks;
  for (std::size_t n : shape.block_dims) blocks.push_back(random_matrix(rng, n, n));
  return AlgElement(shape, std::move(blocks));
}

}  // namespace

TEST_CASE("unit is neutral") {
  Rng rng(1);
  const AlgElement b = random_element(rng, kM2C);
  const AlgElement u = alg_unit(kM2C);
  CHECK(alg_sub(alg_mul(u, b), b).frobenius_norm() == doctest::Approx(0.0));
  CHECK(alg_sub(alg_mul(b, u), b).frobenius_norm() == doctest::Approx(0.0));
}

TEST_CASE("adjoint is an involution and antihomomorphism") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const AlgElement a = random_element(rng, kM2C);
    const AlgElement b = random_element(rng, kM2C);
    CHECK(alg_sub(alg_adjoint(alg_adjoint(a)), a).frobenius_norm() <
          1e-15);
    const AlgElement lhs = alg_adjoint(alg_mul(a, b));
    const AlgElement rhs = alg_mul(alg_adjoint(b), alg_adjoint(a));
    CHECK(alg_sub(lhs, rhs).frobenius_norm() /
              (1.0 + lhs.frobenius_norm()) <
          1e-12);
  }
}

TEST_CASE("shape mismatch raises") {
  Rng rng(3);
  const AlgElement a = random_element(rng, kM2);
  const AlgElement b = random_element(rng, kM2C);
  CHECK_THROWS_AS(alg_mul(a, b), OpkError);
}

TEST_CASE("unit is positive, diag(1,-1) is not") {
  CHECK(is_positive(alg_unit(kM2)).positive);

  CMatrix blk(2, 2);
  blk(0, 0) = 1.0;
  blk(1, 1) = -1.0;
  const AlgElement b(kM2, {blk});
  const PositivityReport rep = is_positive(b);
  CHECK_FALSE(rep.positive);
  CHECK(rep.hermitian);
  CHECK(rep.min_eigenvalue == doctest::Approx(-1.0));
}

TEST_CASE("squares are positive") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const AlgElement beta = random_element(rng, kM2C);
    const AlgElement sq = alg_mul(alg_adjoint(beta), beta);
    CHECK(is_positive(sq).positive);
  }
}

TEST_CASE("sum of positives is positive") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const AlgElement a = random_element(rng, kM2C);
    const AlgElement b = random_element(rng, kM2C);
    const AlgElement sum = alg_add(alg_mul(alg_adjoint(a), a),
                                   alg_mul(alg_adjoint(b), b));
    CHECK(is_positive(sum).positive);
  }
}

TEST_CASE("non-hermitian reports asymmetry witness") {
  CMatrix blk(2, 2);
  blk(0, 1) = 2.0;
  const AlgElement b(kM2, {blk});
  const PositivityReport rep = is_positive(b);
  CHECK_FALSE(rep.positive);
  CHECK_FALSE(rep.hermitian);
  CHECK(rep.asymmetry > 0.1);
}

TEST_CASE("sqrt of unit and of a diagonal") {
  const AlgElement u = alg_unit(kM2);
  CHECK(alg_sub(sqrt_positive(u), u).frobenius_norm() < 1e-14);

  CMatrix blk(2, 2);
  blk(0, 0) = 4.0;
  blk(1, 1) = 9.0;
  const AlgElement b(kM2, {blk});
  const AlgElement s = sqrt_positive(b);
  CHECK(std::abs(s.block(0)(0, 0) - cplx(2.0, 0.0)) < 1e-12);
  CHECK(std::abs(s.block(0)(1, 1) - cplx(3.0, 0.0)) < 1e-12);
}

TEST_CASE("sqrt squares back on random positive elements") {
  Rng rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const AlgElement beta = random_element(rng, kM2C);
    const AlgElement b = alg_mul(alg_adjoint(beta), beta);
    const AlgElement s = sqrt_positive(b);
    CHECK(is_positive(s).positive);
    CHECK(alg_sub(alg_mul(s, s), b).frobenius_norm() /
              (1.0 + b.frobenius_norm()) <
          1e-10);
  }
}

TEST_CASE("sqrt rejects nonpositive") {
  CMatrix blk(2, 2);
  blk(0, 0) = 1.0;
  blk(1, 1) = -1.0;
  const AlgElement b(kM2, {blk});
  CHECK_THROWS_AS(sqrt_positive(b), OpkError);
}

TEST_CASE("functional arithmetic") {
  // normalized trace on M2 applied to the unit
  Functional tau{kM2, {CMatrix::identity(2) * cplx(0.5, 0.0)}};
  CHECK(std::abs(functional_apply(tau, alg_unit(kM2)) - cplx(1.0, 0.0)) <
        1e-15);

  // rho = diag(1,0) against diag(1,-1)
  CMatrix rho(2, 2);
  rho(0, 0) = 1.0;
  Functional phi{kM2, {rho}};
  CMatrix blk(2, 2);
  blk(0, 0) = 1.0;
  blk(1, 1) = -1.0;
  CHECK(std::abs(functional_apply(phi, AlgElement(kM2, {blk})) -
                 cplx(1.0, 0.0)) < 1e-15);

  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const AlgElement b = random_element(rng, kM2);
    const cplx v = functional_apply(tau, alg_mul(alg_adjoint(b), b));
    CHECK(v.real() >= -1e-12);
    CHECK(std::abs(v.imag()) < 1e-12);
  }
}

TEST_CASE("weak and spectral positivity agree") {
  // Oracle: scan vector states over a grid of random unit vectors per block.
  // Elements are generated with eigenvalues bounded away from zero so the
  // grid is dense enough to certify either verdict.
  Rng rng(8);
  const AlgebraShape shape{{3, 2}};
  int disagreements = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const bool make_positive = (trial % 2) == 0;
    std::vector<CMatrix> blocks;
    for (std::size_t n : shape.block_dims) {
      const CMatrix u = random_unitary(rng, n);
      CMatrix lam(n, n);
      for (std::size_t i = 0; i < n; ++i)
        lam(i, i) = make_positive ? 0.1 + rng.uniform()
                                  : (rng.uniform() < 0.5
                                         ? -1.0 + 0.7 * rng.uniform()
                                         : 0.1 + rng.uniform());
      blocks.push_back(u * lam * u.adjoint());
    }
    AlgElement b(shape, std::move(blocks));
    // ensure the "negative" branch really has a negative eigenvalue
    if (!make_positive) b.block(0)(0, 0) -= 1.0;
    b = alg_scale(0.5, alg_add(b, alg_adjoint(b)));

    double weak_min = 0.0;
    for (std::size_t k = 0; k < shape.num_blocks(); ++k) {
      const std::size_t n = shape.block_dims[k];
      for (int sample = 0; sample < 400; ++sample) {
        CMatrix v = random_matrix(rng, n, 1);
        const double nrm = v.frobenius_norm();
        for (auto &z : v.data()) z /= nrm;
        const double val = (v.adjoint() * b.block(k) * v)(0, 0).real();
        weak_min = std::min(weak_min, val);
      }
    }
    const bool weakly_positive = weak_min >= -1e-9;
    if (weakly_positive != is_positive(b).positive) ++disagreements;
  }
  CHECK(disagreements == 0);
}
