#include "opkernel/kernels.hpp"

#include <cmath>
#include <sstream>

namespace opkernel {

OpKernel::OpKernel(std::vector<std::string> points, AlgebraShape shape,
                   std::vector<AlgElement> entries)
    : points_(std::move(points)), shape_(std::move(shape)),
      entries_(std::move(entries)) {
  if (points_.empty())
    throw OpkError(ErrorCode::InvalidInput, "kernel needs at least one point");
  if (entries_.size() != points_.size() * points_.size())
    throw OpkError(ErrorCode::InvalidInput, "kernel entry count mismatch");
  for (const auto &e : entries_)
    if (!(e.shape() == shape_))
      throw OpkError(ErrorCode::ShapeMismatch, "kernel entry shape mismatch");
}

OpKernel OpKernel::symmetrized(std::vector<std::string> points,
                               AlgebraShape shape,
                               std::vector<AlgElement> entries) {
  const std::size_t m = points.size();
  if (entries.size() != m * m)
    throw OpkError(ErrorCode::InvalidInput, "kernel entry count mismatch");
  std::vector<AlgElement> sym;
  sym.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      sym.push_back(alg_scale(
          0.5, alg_add(entries[i * m + j], alg_adjoint(entries[j * m + i]))));
  return OpKernel(std::move(points), std::move(shape), std::move(sym));
}

double OpKernel::frobenius_norm() const {
  double acc = 0.0;
  for (const auto &e : entries_) {
    const double f = e.frobenius_norm();
    acc += f * f;
  }
  return std::sqrt(acc);
}

namespace {

void check_point_cap(std::size_t m, std::size_t cap) {
  if (m > cap) {
    std::ostringstream msg;
    msg << "kernel has " << m << " points, configured cap is " << cap;
    throw OpkError(ErrorCode::CapExceeded, msg.str());
  }
}

/// The |S| n_k x |S| n_k block matrix [k(s_i, s_j)_k]_{ij} for block k.
CMatrix gram_block(const OpKernel &k, std::size_t blk) {
  const std::size_t m = k.size();
  const std::size_t n = k.shape().block_dims[blk];
  CMatrix big(m * n, m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      big.set_block(i * n, j * n, k.at(i, j).block(blk));
  return big;
}

double kernel_asymmetry(const OpKernel &k) {
  double worst = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = 0; j < k.size(); ++j) {
      const AlgElement diff =
          alg_sub(alg_adjoint(k.at(i, j)), k.at(j, i));
      worst = std::max(worst, diff.frobenius_norm());
    }
  return worst * 0.5;
}

}  // namespace

PdReport is_pd(const OpKernel &k, const Tolerance &tol,
               std::size_t max_points) {
  check_point_cap(k.size(), max_points);

  PdReport rep;
  rep.scale = k.frobenius_norm();
  rep.asymmetry = kernel_asymmetry(k);
  const double thr0 = tol.threshold(rep.scale);
  rep.hermitian = rep.asymmetry <= thr0;
  if (!rep.hermitian) {
    std::ostringstream msg;
    msg << "kernel asymmetry " << rep.asymmetry << " exceeds " << thr0;
    throw OpkError(ErrorCode::NotHermitianKernel, msg.str());
  }

  rep.pd = true;
  for (std::size_t blk = 0; blk < k.shape().num_blocks(); ++blk) {
    const CMatrix big = gram_block(k, blk);
    if (big.rows() == 0) continue;
    const CMatrix sym = (big + big.adjoint()) * cplx(0.5, 0.0);
    const EigResult eig = eig_hermitian(sym, tol);
    double spectral = 0.0;
    for (double v : eig.eigenvalues) spectral = std::max(spectral, std::abs(v));
    const double thr = tol.threshold(spectral);
    const double lo = eig.eigenvalues.front();
    if (lo < rep.min_eigenvalue) {
      rep.min_eigenvalue = lo;
      rep.witness_block = blk;
    }
    if (lo < -thr) rep.pd = false;
  }
  return rep;
}

Decomposition kolmogorov(const OpKernel &k, const Tolerance &tol,
                         std::size_t max_points) {
  const PdReport rep = is_pd(k, tol, max_points);
  if (!rep.pd) {
    std::ostringstream msg;
    msg << "kernel is not positive definite (witness eigenvalue "
        << rep.min_eigenvalue << " in block " << rep.witness_block << ")";
    throw OpkError(ErrorCode::NotPD, msg.str());
  }

  const std::size_t m = k.size();
  const std::size_t kcount = k.shape().num_blocks();
  HilbertModule module{k.shape(), std::vector<std::size_t>(kcount, 0)};
  std::vector<CMatrix> factors(kcount);
  for (std::size_t blk = 0; blk < kcount; ++blk) {
    const CMatrix big = gram_block(k, blk);
    const CMatrix sym = (big + big.adjoint()) * cplx(0.5, 0.0);
    factors[blk] = psd_factor(sym, tol);
    module.ambient[blk] = factors[blk].rows();
  }

  Decomposition out;
  out.module = module;
  out.minimal = true;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<CMatrix> blocks;
    for (std::size_t blk = 0; blk < kcount; ++blk) {
      const std::size_t n = k.shape().block_dims[blk];
      blocks.push_back(factors[blk].columns(i * n, n));
    }
    out.point_map.emplace_back(module, std::move(blocks));
  }
  return out;
}

double decomposition_residual(const Decomposition &d, const OpKernel &k) {
  double worst = 0.0;
  const double scale = k.frobenius_norm();
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = 0; j < k.size(); ++j) {
      const AlgElement got = inner(d.point_map[i], d.point_map[j]);
      worst = std::max(worst,
                       alg_sub(got, k.at(i, j)).frobenius_norm());
    }
  return worst / (1.0 + scale);
}

AdjointableOp universal_isometry(const Decomposition &from,
                                 const Decomposition &to,
                                 const Tolerance &tol) {
  if (from.point_map.size() != to.point_map.size())
    throw OpkError(ErrorCode::KernelMismatch,
                   "decompositions have different point counts");
  if (!from.minimal)
    throw OpkError(ErrorCode::InvalidInput,
                   "universal isometry requires a minimal source");
  if (!(from.module.right == to.module.right))
    throw OpkError(ErrorCode::KernelMismatch,
                   "decompositions over different algebras");

  // identical Gram matrices = same kernel
  double scale = 0.0, mismatch = 0.0;
  for (std::size_t i = 0; i < from.point_map.size(); ++i)
    for (std::size_t j = 0; j < from.point_map.size(); ++j) {
      const AlgElement a = inner(from.point_map[i], from.point_map[j]);
      const AlgElement b = inner(to.point_map[i], to.point_map[j]);
      scale = std::max(scale, a.frobenius_norm());
      mismatch = std::max(mismatch, alg_sub(a, b).frobenius_norm());
    }
  if (mismatch > 1e2 * tol.threshold(scale))
    throw OpkError(ErrorCode::KernelMismatch,
                   "decompositions do not share a kernel (Gram mismatch " +
                       std::to_string(mismatch) + ")");

  double residual = 0.0;
  const AdjointableOp v =
      solve_intertwiner(from.point_map, to.point_map, &residual);
  if (residual > 1e2 * tol.threshold(1.0 + scale))
    throw OpkError(ErrorCode::KernelMismatch,
                   "universal isometry residual " + std::to_string(residual));
  return v;
}

}  // namespace opkernel
