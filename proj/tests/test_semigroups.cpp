#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "opkernel/random_objects.hpp"
#include "opkernel/semigroups.hpp"

using namespace opkernel;

namespace {

ScalarGenerator gen2(cplx a, cplx b, cplx c, cplx d) {
  CMatrix m(2, 2);
  m(0, 0) = a;
  m(0, 1) = b;
  m(1, 0) = c;
  m(1, 1) = d;
  return ScalarGenerator{{"a", "b"}, m};
}

}  // namespace

TEST_CASE("conditional positive definiteness verdicts") {
  // the all-ones matrix: the quadratic form vanishes on the hyperplane
  CMatrix ones(3, 3);
  for (auto &v : ones.data()) v = 1.0;
  CHECK(is_cond_pd(ScalarGenerator{{"a", "b", "c"}, ones}).cond_pd);

  // PSD implies conditionally PD
  Rng rng(70);
  const CMatrix x = random_matrix(rng, 2, 4);
  CHECK(is_cond_pd(ScalarGenerator{{"a", "b", "c", "d"}, x.adjoint() * x})
            .cond_pd);

  CHECK(is_cond_pd(gen2(0, -1, -1, 0)).cond_pd);
  const CondPdReport bad = is_cond_pd(gen2(0, 1, 1, 0));
  CHECK_FALSE(bad.cond_pd);
  CHECK(bad.min_eigenvalue == doctest::Approx(-1.0));

  CHECK_THROWS_AS(is_cond_pd(gen2(0, 1, 0, 0)), OpkError);
}

TEST_CASE("schoenberg normalization of the hand example") {
  const SchoenbergData sd = schoenberg_normalize(gen2(0, -1, -1, 0), 0);
  CHECK(std::abs(sd.shifts[0]) < 1e-15);
  CHECK(std::abs(sd.shifts[1] - cplx(1.0, 0.0)) < 1e-15);
  CHECK(std::abs(sd.normalized(1, 1) - cplx(2.0, 0.0)) < 1e-15);
  CHECK(sd.normalized(0, 0) == cplx(0.0, 0.0));
  CHECK(sd.normalized(0, 1) == cplx(0.0, 0.0));
  CHECK(sd.normalized(1, 0) == cplx(0.0, 0.0));
  CHECK(sd.one_particle.module.ambient == std::vector<std::size_t>{1});
  CHECK(std::abs(sd.one_particle.point_map[1].block(0)(0, 0)) ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK(sd.one_particle.point_map[0].norm() == 0.0);
}

TEST_CASE("schoenberg normalization is trivial on a normalized input") {
  // PSD generator with vanishing base row already
  CMatrix m(2, 2);
  m(1, 1) = 2.0;
  const SchoenbergData sd =
      schoenberg_normalize(ScalarGenerator{{"a", "b"}, m}, 0);
  CHECK(std::abs(sd.shifts[0]) < 1e-15);
  CHECK(std::abs(sd.shifts[1]) < 1e-15);
  CHECK((sd.normalized - m).frobenius_norm() < 1e-15);
}

TEST_CASE("all-ones generator normalizes to zero") {
  CMatrix ones(2, 2);
  for (auto &v : ones.data()) v = 1.0;
  const SchoenbergData sd =
      schoenberg_normalize(ScalarGenerator{{"a", "b"}, ones}, 0);
  CHECK(sd.normalized.frobenius_norm() == 0.0);
  CHECK(sd.one_particle.module.ambient == std::vector<std::size_t>{0});
}

TEST_CASE("schoenberg rejects non-cond-pd generators") {
  try {
    schoenberg_normalize(gen2(0, 1, 1, 0), 0);
    FAIL("expected NotCondPD");
  } catch (const OpkError &err) {
    CHECK(err.code() == ErrorCode::NotCondPD);
  }
}

TEST_CASE("schur exponential basics") {
  const ScalarGenerator zero = gen2(0, 0, 0, 0);
  const CMatrix at1 = schur_exp(zero, 1.0);
  for (const auto &v : at1.data()) CHECK(std::abs(v - cplx(1.0, 0.0)) < 1e-15);
  CHECK(is_pd(scalar_kernel(zero.points, at1)).pd);

  const ScalarGenerator g = gen2(0, -1, -1, 0);
  const CMatrix t0 = schur_exp(g, 0.0);
  for (const auto &v : t0.data()) CHECK(std::abs(v - cplx(1.0, 0.0)) < 1e-15);
  const CMatrix t2 = schur_exp(g, 2.0);
  CHECK(std::abs(t2(0, 1) - cplx(std::exp(-2.0), 0.0)) < 1e-15);
  CHECK(is_pd(scalar_kernel(g.points, t2)).pd);
  // closed-form determinant 1 - e^{-2t} stays nonnegative on the grid
  for (double t : default_time_grid()) {
    const CMatrix tt = schur_exp(g, t);
    const cplx det = tt(0, 0) * tt(1, 1) - tt(0, 1) * tt(1, 0);
    CHECK(det.real() == doctest::Approx(1.0 - std::exp(-2.0 * t)));
    CHECK(det.real() >= -1e-15);
  }
  CHECK_THROWS_AS(schur_exp(g, -1.0), OpkError);
}

TEST_CASE("schur semigroup law") {
  Rng rng(71);
  const ScalarGenerator g = random_cond_pd_generator(rng, 4);
  const CMatrix ts = schur_exp(g, 0.7);
  const CMatrix tt = schur_exp(g, 1.6);
  const CMatrix tsum = schur_exp(g, 2.3);
  CMatrix pointwise(4, 4);
  for (std::size_t i = 0; i < pointwise.size(); ++i)
    pointwise.data()[i] = ts.data()[i] * tt.data()[i];
  CHECK((pointwise - tsum).frobenius_norm() /
            (1.0 + tsum.frobenius_norm()) <
        1e-12);
}

TEST_CASE("schoenberg soundness on random generators") {
  Rng rng(72);
  const std::vector<double> grid = default_time_grid();
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t npts = 2 + rng.uniform_index(4);
    const ScalarGenerator good = random_cond_pd_generator(rng, npts);
    for (double t : grid)
      CHECK(is_pd(scalar_kernel(good.points, schur_exp(good, t))).pd);

    const ScalarGenerator bad = random_non_cond_pd_generator(rng, npts);
    bool failed_somewhere = false;
    for (double t : grid)
      if (!is_pd(scalar_kernel(bad.points, schur_exp(bad, t))).pd)
        failed_somewhere = true;
    CHECK(failed_somewhere);
  }
}

TEST_CASE("normalization reconstruction identity") {
  Rng rng(73);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t npts = 2 + rng.uniform_index(3);
    const ScalarGenerator g = random_cond_pd_generator(rng, npts);
    const SchoenbergData sd = schoenberg_normalize(g, 0);
    for (double t : {0.25, 1.0, 4.0}) {
      const CMatrix target = schur_exp(g, t);
      double worst = 0.0;
      for (std::size_t s = 0; s < npts; ++s)
        for (std::size_t u = 0; u < npts; ++u) {
          const cplx recon = std::exp(-std::conj(sd.shifts[s]) * t) *
                             std::exp(sd.normalized(s, u) * t) *
                             std::exp(-sd.shifts[u] * t);
          worst = std::max(worst, std::abs(recon - target(s, u)) /
                                      (1.0 + std::abs(target(s, u))));
        }
      CHECK(worst < 1e-12);
    }
  }
}

TEST_CASE("fock check with a zero one-particle space is exact") {
  CMatrix ones(2, 2);
  for (auto &v : ones.data()) v = 1.0;
  const SchoenbergData sd =
      schoenberg_normalize(ScalarGenerator{{"a", "b"}, ones}, 0);
  const FockReport rep = fock_exponential_check(sd, 3.0, 5);
  CHECK(rep.fock_dim == 1);
  CHECK(rep.max_error < 1e-13);
  CHECK(rep.within_bound);
}

TEST_CASE("fock check reproduces the 2x2 closed form") {
  const SchoenbergData sd = schoenberg_normalize(gen2(0, -1, -1, 0), 0);
  const FockReport rep = fock_exponential_check(sd, 1.0, 20);
  CHECK(rep.within_bound);
  CHECK(rep.max_error <= 1e-12);
  // independent oracle: the partial exponential series against exp
  double expected_err = 0.0;
  {
    // the (b,b) entry compares exp(-2t) sum_{m<=20} (2t)^m/m! with 1
    double partial = 0.0, term = 1.0;
    for (int m = 0; m <= 20; ++m) {
      partial += term;
      term *= 2.0 / (m + 1.0);
    }
    expected_err = std::abs(std::exp(-2.0) * partial - 1.0);
  }
  CHECK(rep.max_error == doctest::Approx(expected_err).epsilon(1e-3));
}

TEST_CASE("fock dimension cap pre-declares insufficiency") {
  Rng rng(74);
  const ScalarGenerator g = random_cond_pd_generator(rng, 5);
  const SchoenbergData sd = schoenberg_normalize(g, 0);
  if (sd.one_particle.module.ambient[0] >= 2) {
    try {
      fock_exponential_check(sd, 1.0, 200, Tolerance{}, 1000);
      FAIL("expected TruncationInsufficient");
    } catch (const OpkError &err) {
      CHECK(err.code() == ErrorCode::TruncationInsufficient);
    }
  }
}

TEST_CASE("fock convergence beats the tail bound on random generators") {
  Rng rng(75);
  for (int trial = 0; trial < 10; ++trial) {
    const ScalarGenerator g = random_cond_pd_generator(rng, 3);
    const SchoenbergData sd = schoenberg_normalize(g, 0);
    for (double t : {0.25, 1.0}) {
      const FockReport rep = fock_exponential_check(sd, t, 20);
      CHECK(rep.within_bound);
    }
  }
}

TEST_CASE("subproduct check for an automorphism semigroup") {
  Rng rng(76);
  const AlgebraShape m2{{2}};
  const LinMap gen = automorphism_generator(m2, random_hermitian_element(rng, m2));
  const SubproductReport rep = subproduct_check(gen, 0.25, 0.5);
  CHECK(rep.cp_at_s);
  CHECK(rep.cp_at_sum);
  CHECK(rep.unit_residual < 1e-9);
  CHECK(rep.embed_residual < 1e-9);
  // endomorphism GNS spaces all have the dimension of B; embedding unitary
  CHECK(rep.dim_s == 2);
  CHECK(rep.dim_t == 2);
  CHECK(rep.dim_sum == 2);
  CHECK(rep.dim_tensor == 2);
  CHECK(rep.embedding_unitary);
}

TEST_CASE("subproduct check at time zero is trivial") {
  Rng rng(77);
  const AlgebraShape m2{{2}};
  const LinMap gen = random_cp_generator(rng, m2);
  const SubproductReport rep = subproduct_check(gen, 0.0, 0.5);
  CHECK(rep.unit_residual < 1e-9);
  CHECK(rep.dim_s == 2);  // GNS of the identity map is B itself
}

TEST_CASE("generic cp semigroups show strict dimension growth") {
  Rng rng(78);
  int strict = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const AlgebraShape m2{{2}};
    const LinMap gen = random_cp_generator(rng, m2);
    const SubproductReport rep = subproduct_check(gen, 0.5, 1.0);
    CHECK(rep.unit_residual < 1e-9);
    CHECK(rep.embed_residual < 1e-9);
    CHECK(rep.dim_sum <= rep.dim_tensor);
    if (rep.dim_tensor > rep.dim_sum) ++strict;
  }
  CHECK(strict >= 1);
}

TEST_CASE("subproduct check rejects a non-cp flow") {
  // L(b) = -transpose flips positivity instantly
  const AlgebraShape m2{{2}};
  LinMap gen = LinMap::zero(m2, m2);
  // b -> -b - 0.45 trace(b) 1 drives the Choi matrix indefinite
  for (std::size_t u = 0; u < 4; ++u) {
    const AlgElement unit = alg_unit_element(m2, u);
    AlgElement img = alg_scale(-1.0, unit);
    const cplx tr = unit.block(0).trace();
    AlgElement eye = alg_unit(m2);
    img = alg_sub(img, alg_scale(tr * cplx(0.45, 0.0), eye));
    const CMatrix col = alg_to_coords(img);
    for (std::size_t r = 0; r < col.rows(); ++r) gen.action(r, u) = col(r, 0);
  }
  try {
    subproduct_check(gen, 2.0, 4.0);
    FAIL("expected NotCPAtTime");
  } catch (const OpkError &err) {
    CHECK(err.code() == ErrorCode::NotCPAtTime);
  }
}

TEST_CASE("one-point cpd semigroup check matches the subproduct check") {
  Rng rng(79);
  const AlgebraShape m2{{2}};
  const LinMap gen = random_cp_generator(rng, m2);
  const MapKernel kernel({"w"}, {gen});
  const CpdSemigroupReport rep = cpd_semigroup_check(kernel, 0.5, 0.25);
  const SubproductReport sub = subproduct_check(gen, 0.5, 0.25);
  CHECK(rep.unit_residual < 1e-9);
  CHECK(rep.dim_s == sub.dim_s);
  CHECK(rep.dim_sum == sub.dim_sum);
  CHECK(rep.dim_tensor == sub.dim_tensor);
}

TEST_CASE("two-point cpd semigroup from a schur-multiplier structure") {
  // L^{s,s'}(b) = L0(b) + mu(s,s') b with a cond-PD scalar part: the
  // exponentials are exp(t mu(s,s')) exp(t L0), Schur products of a PD
  // scalar kernel with a CP map
  Rng rng(80);
  const AlgebraShape m2{{2}};
  const LinMap base = random_cp_generator(rng, m2);
  const ScalarGenerator mu = random_cond_pd_generator(rng, 2);
  std::vector<LinMap> entries;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      entries.push_back(
          linmap_add(base, linmap_scale(mu.matrix(i, j), LinMap::identity(m2))));
  const MapKernel gen(mu.points, entries);
  const CpdSemigroupReport rep = cpd_semigroup_check(gen, 0.5, 0.5);
  CHECK(rep.cpd_at_s);
  CHECK(rep.cpd_at_sum);
  CHECK(rep.unit_residual < 1e-9);
  CHECK(rep.embed_residual < 1e-9);

  // refinement monotonicity: dim GNS(T_t) <= dim of the (t/2, t/2) tensor
  CHECK(rep.dim_sum <= rep.dim_tensor);
}
