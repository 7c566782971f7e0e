#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "opkernel/kernels.hpp"
#include "opkernel/random_objects.hpp"

using namespace opkernel;

namespace {

const AlgebraShape kScalar{{1}};

AlgElement scalar(cplx z) {
  CMatrix m(1, 1);
  m(0, 0) = z;
  return AlgElement(kScalar, {m});
}

OpKernel scalar_kernel_2x2(cplx a, cplx b, cplx c, cplx d) {
  return OpKernel({"x", "y"}, kScalar,
                  {scalar(a), scalar(b), scalar(c), scalar(d)});
}

double rel(double err, double scale) { return err / (1.0 + scale); }

}  // namespace

TEST_CASE("scalar pd verdicts") {
  const OpKernel good = scalar_kernel_2x2(1.0, 0.5, 0.5, 1.0);
  const PdReport ok = is_pd(good);
  CHECK(ok.pd);

  const OpKernel bad = scalar_kernel_2x2(1.0, 2.0, 2.0, 1.0);
  const PdReport fail = is_pd(bad);
  CHECK_FALSE(fail.pd);
  CHECK(fail.min_eigenvalue == doctest::Approx(-1.0));
}

TEST_CASE("non-hermitian kernel raises") {
  const OpKernel k = scalar_kernel_2x2(1.0, 2.0, 0.0, 1.0);
  CHECK_THROWS_AS(is_pd(k), OpkError);
  // symmetrized ingestion repairs a drifted kernel
  const OpKernel sym = OpKernel::symmetrized(
      {"x", "y"}, kScalar,
      {scalar(1.0), scalar(cplx(0.5, 1e-13)), scalar(cplx(0.5, 1e-13)),
       scalar(1.0)});
  CHECK(is_pd(sym).pd);
}

TEST_CASE("point cap is enforced") {
  std::vector<std::string> points;
  std::vector<AlgElement> entries;
  for (int i = 0; i < 17; ++i) points.push_back("p" + std::to_string(i));
  for (int i = 0; i < 17 * 17; ++i) entries.push_back(scalar(0.0));
  const OpKernel k(points, kScalar, entries);
  CHECK_THROWS_AS(is_pd(k), OpkError);
}

TEST_CASE("gram kernels are pd") {
  Rng rng(40);
  for (int trial = 0; trial < 50; ++trial) {
    const AlgebraShape shape = random_shape(rng, 2, 3, 9);
    const OpKernel k =
        random_pd_kernel(rng, 1 + rng.uniform_index(4), shape, 3);
    CHECK(is_pd(k).pd);
  }
}

TEST_CASE("kolmogorov of an orthogonal scalar kernel") {
  const OpKernel k = scalar_kernel_2x2(2.0, 0.0, 0.0, 3.0);
  const Decomposition d = kolmogorov(k);
  CHECK(d.module.ambient == std::vector<std::size_t>{2});
  CHECK(d.minimal);
  CHECK(decomposition_residual(d, k) < 1e-12);
  // the two point vectors are orthogonal with norms sqrt(2), sqrt(3)
  const AlgElement cross = inner(d.point_map[0], d.point_map[1]);
  CHECK(std::abs(cross.block(0)(0, 0)) < 1e-12);
}

TEST_CASE("one-point kernel over M2 gives the right-ideal module") {
  const AlgebraShape m2{{2}};
  CMatrix b(2, 2);
  b(0, 0) = 1.0;
  const OpKernel k({"w"}, m2, {AlgElement(m2, {b})});
  const Decomposition d = kolmogorov(k);
  // ambient = rank(b) = 1 and <i(w), i(w)> = b
  CHECK(d.module.ambient == std::vector<std::size_t>{1});
  CHECK(rel(alg_sub(inner(d.point_map[0], d.point_map[0]),
                    AlgElement(m2, {b}))
                .frobenius_norm(),
            1.0) < 1e-12);
}

TEST_CASE("zero kernel yields the zero module") {
  const OpKernel k = scalar_kernel_2x2(0.0, 0.0, 0.0, 0.0);
  const Decomposition d = kolmogorov(k);
  CHECK(d.module.ambient == std::vector<std::size_t>{0});
  CHECK(d.point_map[0].norm() == 0.0);
}

TEST_CASE("kolmogorov rejects non-pd kernels") {
  const OpKernel bad = scalar_kernel_2x2(1.0, 2.0, 2.0, 1.0);
  try {
    kolmogorov(bad);
    FAIL("expected NotPD");
  } catch (const OpkError &err) {
    CHECK(err.code() == ErrorCode::NotPD);
  }
}

TEST_CASE("kolmogorov round trip on random kernels") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const AlgebraShape shape = random_shape(rng, 2, 3, 13);
    const std::size_t npoints = 1 + rng.uniform_index(5);
    const OpKernel k = random_pd_kernel(rng, npoints, shape, 3);
    const Decomposition d = kolmogorov(k);
    CHECK(decomposition_residual(d, k) < 1e-10);
    // minimality: ambient equals the rank of the per-block Gram
    for (std::size_t blk = 0; blk < shape.num_blocks(); ++blk) {
      const std::size_t n = shape.block_dims[blk];
      CMatrix big(npoints * n, npoints * n);
      for (std::size_t i = 0; i < npoints; ++i)
        for (std::size_t j = 0; j < npoints; ++j)
          big.set_block(i * n, j * n, k.at(i, j).block(blk));
      CHECK(d.module.ambient[blk] == psd_factor(big).rows());
    }
  }
}

TEST_CASE("universal isometry from a decomposition to itself") {
  Rng rng(42);
  const OpKernel k = random_pd_kernel(rng, 3, AlgebraShape{{2}}, 3);
  const Decomposition d = kolmogorov(k);
  const AdjointableOp v = universal_isometry(d, d);
  for (std::size_t kk = 0; kk < v.blocks.size(); ++kk)
    CHECK((v.blocks[kk] - CMatrix::identity(d.module.ambient[kk]))
              .frobenius_norm() < 1e-9);
}

TEST_CASE("universal isometry onto a conjugated decomposition") {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const AlgebraShape shape = random_shape(rng, 2, 2, 8);
    const OpKernel k = random_pd_kernel(rng, 3, shape, 2);
    const Decomposition d = kolmogorov(k);

    Decomposition conj = d;
    std::vector<CMatrix> us;
    for (std::size_t blk = 0; blk < shape.num_blocks(); ++blk)
      us.push_back(random_unitary(rng, d.module.ambient[blk]));
    for (auto &vec : conj.point_map) {
      std::vector<CMatrix> blocks;
      for (std::size_t blk = 0; blk < shape.num_blocks(); ++blk)
        blocks.push_back(us[blk] * vec.block(blk));
      vec = ModVector(d.module, std::move(blocks));
    }

    const AdjointableOp v = universal_isometry(d, conj);
    CHECK(v.isometry_defect() < 1e-9);
    for (std::size_t blk = 0; blk < shape.num_blocks(); ++blk)
      if (d.module.ambient[blk] > 0)
        CHECK((v.blocks[blk] - us[blk]).frobenius_norm() /
                  (1.0 + us[blk].frobenius_norm()) <
              1e-8);

    // both-direction composition is the identity (uniqueness up to unitary)
    Decomposition conj_min = conj;
    const AdjointableOp w = universal_isometry(conj_min, d);
    const AdjointableOp round = w.compose(v);
    for (std::size_t blk = 0; blk < shape.num_blocks(); ++blk)
      CHECK((round.blocks[blk] -
             CMatrix::identity(d.module.ambient[blk]))
                .frobenius_norm() < 1e-9);
  }
}

TEST_CASE("universal isometry into a padded decomposition") {
  Rng rng(44);
  const AlgebraShape shape{{2}};
  const OpKernel k = random_pd_kernel(rng, 3, shape, 2);
  const Decomposition d = kolmogorov(k);
  const std::size_t dim = d.module.ambient[0];

  // embed in a larger ambient with two extra zero rows
  HilbertModule padded{shape, {dim + 2}};
  Decomposition big;
  big.module = padded;
  big.minimal = false;
  for (const auto &vec : d.point_map) {
    CMatrix blk(dim + 2, 2);
    blk.set_block(0, 0, vec.block(0));
    big.point_map.emplace_back(padded, std::vector<CMatrix>{blk});
  }

  const AdjointableOp v = universal_isometry(d, big);
  CHECK(v.isometry_defect() < 1e-9);
  // v v^* is a proper projection, not the identity
  const CMatrix vv = v.blocks[0] * v.blocks[0].adjoint();
  CHECK((vv - CMatrix::identity(dim + 2)).frobenius_norm() > 0.5);
}

TEST_CASE("universal isometry detects a kernel mismatch") {
  Rng rng(45);
  const OpKernel k1 = random_pd_kernel(rng, 3, AlgebraShape{{2}}, 2);
  const OpKernel k2 = random_pd_kernel(rng, 3, AlgebraShape{{2}}, 2);
  const Decomposition d1 = kolmogorov(k1);
  const Decomposition d2 = kolmogorov(k2);
  try {
    universal_isometry(d1, d2);
    FAIL("expected KernelMismatch");
  } catch (const OpkError &err) {
    CHECK(err.code() == ErrorCode::KernelMismatch);
  }
}
