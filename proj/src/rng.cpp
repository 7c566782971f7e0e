#include "opkernel/rng.hpp"

#include <cmath>

#include "opkernel/random_objects.hpp"

namespace opkernel {

namespace {

std::uint64_t splitmix64(std::uint64_t &x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) {
  return (v << k) | (v >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto &word : state_) word = splitmix64(s);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() {
  // 53 uniform bits in [0,1)
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) return 0;
  return static_cast<std::size_t>(next() % n);
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

cplx Rng::cnormal() {
  const double re = normal();
  const double im = normal();
  return cplx(re * 0.7071067811865476, im * 0.7071067811865476);
}

CMatrix random_matrix(Rng &rng, std::size_t rows, std::size_t cols) {
  CMatrix m(rows, cols);
  for (auto &v : m.data()) v = rng.cnormal();
  return m;
}

CMatrix random_hermitian(Rng &rng, std::size_t n) {
  const CMatrix m = random_matrix(rng, n, n);
  return (m + m.adjoint()) * cplx(0.5, 0.0);
}

CMatrix random_unitary(Rng &rng, std::size_t n) {
  // modified Gram-Schmidt on a random matrix
  CMatrix m = random_matrix(rng, n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      cplx dot(0.0, 0.0);
      for (std::size_t r = 0; r < n; ++r)
        dot += std::conj(m(r, k)) * m(r, j);
      for (std::size_t r = 0; r < n; ++r) m(r, j) -= dot * m(r, k);
    }
    double nrm = 0.0;
    for (std::size_t r = 0; r < n; ++r) nrm += std::norm(m(r, j));
    nrm = std::sqrt(nrm);
    if (nrm < 1e-12) {
      // astronomically unlikely; fall back to a unit vector
      for (std::size_t r = 0; r < n; ++r) m(r, j) = (r == j) ? 1.0 : 0.0;
      continue;
    }
    for (std::size_t r = 0; r < n; ++r) m(r, j) /= nrm;
  }
  return m;
}

CMatrix random_psd(Rng &rng, std::size_t n, std::size_t rank) {
  const std::size_t r = rank > n ? n : rank;
  const CMatrix x = random_matrix(rng, r, n);
  return x.adjoint() * x;
}

AlgElement random_element(Rng &rng, const AlgebraShape &shape) {
  std::vector<CMatrix> blocks;
  blocks.reserve(shape.num_blocks());
  for (std::size_t n : shape.block_dims) blocks.push_back(random_matrix(rng, n, n));
  return AlgElement(shape, std::move(blocks));
}

AlgElement random_hermitian_element(Rng &rng, const AlgebraShape &shape) {
  const AlgElement a = random_element(rng, shape);
  return alg_scale(0.5, alg_add(a, alg_adjoint(a)));
}

AlgElement random_positive_element(Rng &rng, const AlgebraShape &shape) {
  const AlgElement a = random_element(rng, shape);
  return alg_mul(alg_adjoint(a), a);
}

HilbertModule random_module(Rng &rng, const AlgebraShape &shape,
                            std::size_t max_ambient) {
  HilbertModule mod{shape, {}};
  for (std::size_t k = 0; k < shape.num_blocks(); ++k)
    mod.ambient.push_back(1 + rng.uniform_index(max_ambient));
  return mod;
}

ModVector random_vector(Rng &rng, const HilbertModule &module) {
  std::vector<CMatrix> blocks;
  for (std::size_t k = 0; k < module.right.num_blocks(); ++k)
    blocks.push_back(
        random_matrix(rng, module.ambient[k], module.right.block_dims[k]));
  return ModVector(module, std::move(blocks));
}

Correspondence random_correspondence(Rng &rng, const AlgebraShape &left,
                                     const AlgebraShape &right,
                                     std::size_t max_mult) {
  const std::size_t kcount = right.num_blocks();
  const std::size_t jcount = left.num_blocks();
  std::vector<std::vector<std::size_t>> mult(kcount,
                                             std::vector<std::size_t>(jcount));
  std::size_t total = 0;
  for (auto &row : mult)
    for (auto &m : row) {
      m = rng.uniform_index(max_mult + 1);
      total += m;
    }
  if (total == 0) mult[rng.uniform_index(kcount)][rng.uniform_index(jcount)] = 1;

  HilbertModule mod{right, std::vector<std::size_t>(kcount, 0)};
  LeftAction action;
  action.left = left;
  action.mats.resize(kcount);
  const std::size_t dim = left.dim();
  for (std::size_t k = 0; k < kcount; ++k) {
    std::size_t d = 0;
    for (std::size_t j = 0; j < jcount; ++j) d += left.block_dims[j] * mult[k][j];
    mod.ambient[k] = d;
    const CMatrix u = random_unitary(rng, d);
    const CMatrix uadj = u.adjoint();
    action.mats[k].reserve(dim);
    for (std::size_t idx = 0; idx < dim; ++idx) {
      std::size_t blk, row, col;
      alg_unit_position(left, idx, blk, row, col);
      CMatrix canonical(d, d);
      std::size_t base = 0;
      for (std::size_t j = 0; j < blk; ++j)
        base += left.block_dims[j] * mult[k][j];
      const std::size_t m = mult[k][blk];
      for (std::size_t s = 0; s < m; ++s)
        canonical(base + row * m + s, base + col * m + s) = cplx(1.0, 0.0);
      action.mats[k].push_back(u * canonical * uadj);
    }
  }
  return Correspondence{mod, std::move(action)};
}

std::vector<std::string> default_point_labels(std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back("p" + std::to_string(i));
  return out;
}

OpKernel random_pd_kernel(Rng &rng, std::size_t npoints,
                          const AlgebraShape &shape, std::size_t max_ambient) {
  const HilbertModule mod = random_module(rng, shape, max_ambient);
  std::vector<ModVector> vecs;
  vecs.reserve(npoints);
  for (std::size_t i = 0; i < npoints; ++i)
    vecs.push_back(random_vector(rng, mod));
  std::vector<AlgElement> entries;
  entries.reserve(npoints * npoints);
  for (std::size_t i = 0; i < npoints; ++i)
    for (std::size_t j = 0; j < npoints; ++j)
      entries.push_back(inner(vecs[i], vecs[j]));
  return OpKernel(default_point_labels(npoints), shape, std::move(entries));
}

AlgebraShape random_shape(Rng &rng, std::size_t max_blocks,
                          std::size_t max_block_dim, std::size_t max_dim) {
  AlgebraShape shape;
  const std::size_t blocks = 1 + rng.uniform_index(max_blocks);
  std::size_t dim = 0;
  for (std::size_t i = 0; i < blocks; ++i) {
    std::size_t n = 1 + rng.uniform_index(max_block_dim);
    while (dim + n * n > max_dim && n > 1) --n;
    if (dim + n * n > max_dim) break;
    shape.block_dims.push_back(n);
    dim += n * n;
  }
  if (shape.block_dims.empty()) shape.block_dims.push_back(1);
  return shape;
}

LinMap random_cp_linmap(Rng &rng, const AlgebraShape &from,
                        const AlgebraShape &to, std::size_t nkraus) {
  LinMap t = LinMap::zero(from, to);
  const std::size_t dima = from.dim();
  for (std::size_t j = 0; j < from.num_blocks(); ++j)
    for (std::size_t k = 0; k < to.num_blocks(); ++k) {
      std::vector<CMatrix> kraus;
      for (std::size_t s = 0; s < nkraus; ++s)
        kraus.push_back(
            random_matrix(rng, from.block_dims[j], to.block_dims[k]));
      for (std::size_t u = 0; u < dima; ++u) {
        std::size_t ub, ur, uc;
        alg_unit_position(from, u, ub, ur, uc);
        if (ub != j) continue;
        const AlgElement unit = alg_unit_element(from, u);
        AlgElement img = AlgElement::zero(to);
        for (const auto &v : kraus)
          img.block(k) += v.adjoint() * unit.block(j) * v;
        const CMatrix col = alg_to_coords(img);
        for (std::size_t r = 0; r < col.rows(); ++r) t.action(r, u) += col(r, 0);
      }
    }
  return t;
}

MapKernel random_cpd_kernel(Rng &rng, std::size_t npoints,
                            const AlgebraShape &from, const AlgebraShape &to,
                            std::size_t max_mult) {
  const Correspondence corr = random_correspondence(rng, from, to, max_mult);
  std::vector<ModVector> vecs;
  for (std::size_t i = 0; i < npoints; ++i)
    vecs.push_back(random_vector(rng, corr.module));
  return kernel_from_correspondence(corr, vecs,
                                    default_point_labels(npoints));
}

LinMap automorphism_generator(const AlgebraShape &shape, const AlgElement &h) {
  const std::size_t dim = shape.dim();
  LinMap gen = LinMap::zero(shape, shape);
  for (std::size_t u = 0; u < dim; ++u) {
    const AlgElement b = alg_unit_element(shape, u);
    const AlgElement img = alg_scale(cplx(0.0, 1.0),
                                     alg_sub(alg_mul(h, b), alg_mul(b, h)));
    const CMatrix col = alg_to_coords(img);
    for (std::size_t r = 0; r < col.rows(); ++r) gen.action(r, u) = col(r, 0);
  }
  return gen;
}

ScalarGenerator random_cond_pd_generator(Rng &rng, std::size_t npoints) {
  const std::size_t rank = 1 + rng.uniform_index(3);
  const CMatrix vecs = random_matrix(rng, rank, npoints);
  std::vector<cplx> beta(npoints);
  for (auto &b : beta) b = rng.cnormal();
  CMatrix gen(npoints, npoints);
  for (std::size_t s = 0; s < npoints; ++s)
    for (std::size_t t = 0; t < npoints; ++t) {
      cplx dot(0.0, 0.0);
      for (std::size_t r = 0; r < rank; ++r)
        dot += std::conj(vecs(r, s)) * vecs(r, t);
      gen(s, t) = dot + beta[t] + std::conj(beta[s]);
    }
  return ScalarGenerator{default_point_labels(npoints), gen};
}

ScalarGenerator random_non_cond_pd_generator(Rng &rng, std::size_t npoints) {
  if (npoints < 2)
    throw OpkError(ErrorCode::InvalidInput,
                   "need at least two points for a non-cond-PD generator");
  ScalarGenerator gen = random_cond_pd_generator(rng, npoints);
  // subtract a definitely-negative direction inside the hyperplane
  CMatrix w(npoints, 1);
  w(0, 0) = 0.7071067811865476;
  w(1, 0) = -0.7071067811865476;
  const double weight = 2.0 + gen.matrix.frobenius_norm();
  gen.matrix -= w * w.adjoint() * cplx(weight, 0.0);
  return gen;
}

LinMap random_cp_generator(Rng &rng, const AlgebraShape &shape) {
  const std::size_t dim = shape.dim();
  LinMap gen = LinMap::zero(shape, shape);
  AlgElement h = random_hermitian_element(rng, shape);
  AlgElement v = random_element(rng, shape);
  const AlgElement vv = alg_mul(alg_adjoint(v), v);
  for (std::size_t u = 0; u < dim; ++u) {
    const AlgElement b = alg_unit_element(shape, u);
    AlgElement img = alg_mul(alg_adjoint(v), alg_mul(b, v));
    img = alg_sub(img, alg_scale(0.5, alg_add(alg_mul(vv, b), alg_mul(b, vv))));
    img = alg_add(img, alg_scale(cplx(0.0, 1.0),
                                 alg_sub(alg_mul(h, b), alg_mul(b, h))));
    const CMatrix col = alg_to_coords(img);
    for (std::size_t r = 0; r < col.rows(); ++r) gen.action(r, u) = col(r, 0);
  }
  return gen;
}

}  // namespace opkernel
