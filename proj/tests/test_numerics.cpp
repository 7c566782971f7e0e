#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "opkernel/numerics.hpp"
#include "opkernel/rng.hpp"

using namespace opkernel;

namespace {

CMatrix mat2(cplx a, cplx b, cplx c, cplx d) {
  CMatrix m(2, 2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return m;
}

double reconstruction_error(const CMatrix &h, const EigResult &eig) {
  const std::size_t n = h.rows();
  CMatrix lam(n, n);
  for (std::size_t i = 0; i < n; ++i) lam(i, i) = eig.eigenvalues[i];
  const CMatrix recon = eig.vectors * lam * eig.vectors.adjoint();
  return (h - recon).frobenius_norm();
}

}  // namespace

TEST_CASE("eig of identity") {
  const CMatrix h = CMatrix::identity(2);
  const EigResult eig = eig_hermitian(h);
  CHECK(eig.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(eig.eigenvalues[1] == doctest::Approx(1.0));
  CHECK((eig.vectors - CMatrix::identity(2)).frobenius_norm() ==
        doctest::Approx(0.0));
}

TEST_CASE("eig of pauli x") {
  const CMatrix h = mat2(0, 1, 1, 0);
  const EigResult eig = eig_hermitian(h);
  CHECK(eig.eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(eig.eigenvalues[1] == doctest::Approx(1.0));
  CHECK(reconstruction_error(h, eig) < 1e-14);
}

TEST_CASE("eig reconstruction on random hermitian") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(40);
    const CMatrix h = random_hermitian(rng, n);
    const EigResult eig = eig_hermitian(h);
    const double scale = h.frobenius_norm();
    CHECK(reconstruction_error(h, eig) / (1.0 + scale) < 1e-12);
    // unitarity
    const CMatrix gram = eig.vectors.adjoint() * eig.vectors;
    CHECK((gram - CMatrix::identity(n)).frobenius_norm() < 1e-12 * (1.0 + n));
    // ascending
    for (std::size_t i = 0; i + 1 < n; ++i)
      CHECK(eig.eigenvalues[i] <= eig.eigenvalues[i + 1]);
  }
}

TEST_CASE("eig matches the closed form for 2x2 hermitian") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = rng.normal(), d = rng.normal();
    const cplx b = rng.cnormal();
    CMatrix h(2, 2);
    h(0, 0) = a;
    h(0, 1) = b;
    h(1, 0) = std::conj(b);
    h(1, 1) = d;
    const double mid = 0.5 * (a + d);
    const double rad = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
    const EigResult eig = eig_hermitian(h);
    CHECK(eig.eigenvalues[0] == doctest::Approx(mid - rad).epsilon(1e-12));
    CHECK(eig.eigenvalues[1] == doctest::Approx(mid + rad).epsilon(1e-12));
  }
}

TEST_CASE("eig determinism") {
  Rng rng(7);
  const CMatrix h = random_hermitian(rng, 17);
  const EigResult a = eig_hermitian(h);
  const EigResult b = eig_hermitian(h);
  REQUIRE(a.eigenvalues == b.eigenvalues);
  REQUIRE(a.vectors.data() == b.vectors.data());
  // phase convention: first entry of largest modulus is real nonnegative
  for (std::size_t j = 0; j < 17; ++j) {
    std::size_t best = 0;
    double mag = -1.0;
    for (std::size_t r = 0; r < 17; ++r)
      if (std::abs(a.vectors(r, j)) > mag) {
        mag = std::abs(a.vectors(r, j));
        best = r;
      }
    CHECK(a.vectors(best, j).imag() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(a.vectors(best, j).real() >= 0.0);
  }
}

TEST_CASE("eig rejects non-hermitian") {
  const CMatrix h = mat2(0, 2, 0, 0);
  CHECK_THROWS_AS(eig_hermitian(h), OpkError);
}

TEST_CASE("eig rejects non-finite") {
  CMatrix h(1, 1);
  h(0, 0) = std::nan("");
  CHECK_THROWS_AS(eig_hermitian(h), OpkError);
}

TEST_CASE("eig of empty matrix") {
  const EigResult eig = eig_hermitian(CMatrix());
  CHECK(eig.eigenvalues.empty());
  CHECK(eig.vectors.rows() == 0);
}

TEST_CASE("psd_factor of rank-1 outer product") {
  const CMatrix h = mat2(1, 1, 1, 1);
  const CMatrix l = psd_factor(h);
  REQUIRE(l.rows() == 1);
  REQUIRE(l.cols() == 2);
  CHECK((l.adjoint() * l - h).frobenius_norm() < 1e-12);
  // deterministic convention gives the real positive representative
  CHECK(l(0, 0).real() == doctest::Approx(1.0));
  CHECK(l(0, 1).real() == doctest::Approx(1.0));
}

TEST_CASE("psd_factor of diagonal") {
  CMatrix h(2, 2);
  h(0, 0) = 2.0;
  h(1, 1) = 3.0;
  const CMatrix l = psd_factor(h);
  REQUIRE(l.rows() == 2);
  CHECK((l.adjoint() * l - h).frobenius_norm() < 1e-12);
}

TEST_CASE("psd_factor rejects indefinite") {
  const CMatrix h = mat2(1, 2, 2, 1);  // eigenvalues 3, -1
  try {
    psd_factor(h);
    FAIL("expected NotPSD");
  } catch (const OpkError &err) {
    CHECK(err.code() == ErrorCode::NotPSD);
    CHECK(std::string(err.what()).find("-1") != std::string::npos);
  }
}

TEST_CASE("psd_factor rank equals eigenvalue count above threshold") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(8);
    const std::size_t r = rng.uniform_index(n + 1);
    const CMatrix x = random_matrix(rng, r, n);
    const CMatrix h = x.adjoint() * x;
    const CMatrix l = psd_factor(h);
    CHECK(l.rows() <= std::min(r, n));
    CHECK((l.adjoint() * l - h).frobenius_norm() / (1.0 + h.frobenius_norm()) <
          1e-11);
  }
}

TEST_CASE("kron identity") {
  const CMatrix k = kron(CMatrix::identity(2), CMatrix::identity(2));
  CHECK((k - CMatrix::identity(4)).frobenius_norm() == doctest::Approx(0.0));
}

TEST_CASE("vec convention fixture") {
  const CMatrix a = mat2(1, 2, 3, 4);
  const CMatrix v = vec(a);
  REQUIRE(v.rows() == 4);
  CHECK(v(0, 0).real() == 1.0);
  CHECK(v(1, 0).real() == 2.0);
  CHECK(v(2, 0).real() == 3.0);
  CHECK(v(3, 0).real() == 4.0);
  CHECK((unvec(v, 2, 2) - a).frobenius_norm() == 0.0);
}

TEST_CASE("vec identity vec(AXB) = kron(A, B^T) vec(X)") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t p = 1 + rng.uniform_index(4);
    const std::size_t q = 1 + rng.uniform_index(4);
    const std::size_t r = 1 + rng.uniform_index(4);
    const std::size_t s = 1 + rng.uniform_index(4);
    const CMatrix a = random_matrix(rng, p, q);
    const CMatrix x = random_matrix(rng, q, r);
    const CMatrix b = random_matrix(rng, r, s);
    const CMatrix lhs = vec(a * x * b);
    const CMatrix rhs = kron(a, b.transpose()) * vec(x);
    CHECK((lhs - rhs).frobenius_norm() / (1.0 + lhs.frobenius_norm()) < 1e-12);
  }
}

TEST_CASE("solve_lu and solve_hpd") {
  Rng rng(5);
  const std::size_t n = 8;
  CMatrix a = random_matrix(rng, n, n);
  const CMatrix b = random_matrix(rng, n, 3);
  const CMatrix x = solve_lu(a, b);
  CHECK((a * x - b).frobenius_norm() < 1e-10);

  const CMatrix g = a.adjoint() * a + CMatrix::identity(n);
  const CMatrix y = solve_hpd(g, b);
  CHECK((g * y - b).frobenius_norm() < 1e-10);

  const CMatrix m = random_matrix(rng, 3, 7);
  const CMatrix pinv = right_pseudo_inverse(m);
  CHECK((m * pinv - CMatrix::identity(3)).frobenius_norm() < 1e-10);
}

TEST_CASE("expm closed forms") {
  // nilpotent: exp([[0,a],[0,0]]) = [[1,a],[0,1]]
  CMatrix n(2, 2);
  n(0, 1) = cplx(2.5, -1.0);
  const CMatrix en = expm(n);
  CHECK(std::abs(en(0, 0) - cplx(1.0, 0.0)) < 1e-14);
  CHECK(std::abs(en(0, 1) - cplx(2.5, -1.0)) < 1e-13);
  CHECK(std::abs(en(1, 0)) < 1e-14);

  // rotation generator: exp(theta [[0,-1],[1,0]]) is the rotation matrix
  const double theta = 0.7;
  CMatrix r(2, 2);
  r(0, 1) = -theta;
  r(1, 0) = theta;
  const CMatrix er = expm(r);
  CHECK(std::abs(er(0, 0) - cplx(std::cos(theta), 0.0)) < 1e-13);
  CHECK(std::abs(er(1, 0) - cplx(std::sin(theta), 0.0)) < 1e-13);
}

TEST_CASE("expm basics") {
  // expm of zero is the identity
  CHECK((expm(CMatrix(3, 3)) - CMatrix::identity(3)).frobenius_norm() <
        1e-14);
  // diagonal exponent
  CMatrix d(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = cplx(0.0, 1.0);
  const CMatrix e = expm(d);
  CHECK(std::abs(e(0, 0) - cplx(std::exp(1.0), 0.0)) < 1e-13);
  CHECK(std::abs(e(1, 1) - std::exp(cplx(0.0, 1.0))) < 1e-13);
  // semigroup property on a random generator
  Rng rng(9);
  const CMatrix g = random_matrix(rng, 5, 5);
  const CMatrix half = expm(g * cplx(0.5, 0.0));
  const CMatrix full = expm(g);
  CHECK((half * half - full).frobenius_norm() / (1.0 + full.frobenius_norm()) <
        1e-11);
}

TEST_CASE("zero-dimensional matrices are legal") {
  const CMatrix z(0, 3);
  const CMatrix w(3, 0);
  CHECK((z * w).rows() == 0);
  const CMatrix wz = w * z;  // 3x3 zero
  CHECK(wz.frobenius_norm() == 0.0);
  CHECK(psd_factor(CMatrix()).rows() == 0);
  CHECK(kron(z, w).size() == 0);
}
