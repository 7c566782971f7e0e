#include "opkernel/algebra.hpp"

#include <cmath>
#include <sstream>

namespace opkernel {

std::string AlgebraShape::describe() const {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < block_dims.size(); ++i) {
    if (i) out << ",";
    out << block_dims[i];
  }
  out << ")";
  return out.str();
}

AlgElement::AlgElement(AlgebraShape shape, std::vector<CMatrix> blocks)
    : shape_(std::move(shape)), blocks_(std::move(blocks)) {
  if (blocks_.size() != shape_.num_blocks())
    throw OpkError(ErrorCode::ShapeMismatch, "element block count mismatch");
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (blocks_[k].rows() != shape_.block_dims[k] ||
        blocks_[k].cols() != shape_.block_dims[k])
      throw OpkError(ErrorCode::ShapeMismatch,
                     "element block size mismatch at block " + std::to_string(k));
  }
}

AlgElement AlgElement::zero(const AlgebraShape &shape) {
  std::vector<CMatrix> blocks;
  blocks.reserve(shape.num_blocks());
  for (std::size_t n : shape.block_dims) blocks.emplace_back(n, n);
  return AlgElement(shape, std::move(blocks));
}

AlgElement AlgElement::unit(const AlgebraShape &shape) {
  std::vector<CMatrix> blocks;
  blocks.reserve(shape.num_blocks());
  for (std::size_t n : shape.block_dims) blocks.push_back(CMatrix::identity(n));
  return AlgElement(shape, std::move(blocks));
}

double AlgElement::frobenius_norm() const {
  double acc = 0.0;
  for (const auto &b : blocks_) {
    const double f = b.frobenius_norm();
    acc += f * f;
  }
  return std::sqrt(acc);
}

static void require_same_algebra(const AlgElement &a, const AlgElement &b) {
  if (!(a.shape() == b.shape()))
    throw OpkError(ErrorCode::ShapeMismatch,
                   "algebra shapes differ: " + a.shape().describe() + " vs " +
                       b.shape().describe());
}

AlgElement alg_mul(const AlgElement &a, const AlgElement &b) {
  require_same_algebra(a, b);
  std::vector<CMatrix> blocks;
  blocks.reserve(a.blocks().size());
  for (std::size_t k = 0; k < a.blocks().size(); ++k)
    blocks.push_back(a.block(k) * b.block(k));
  return AlgElement(a.shape(), std::move(blocks));
}

AlgElement alg_add(const AlgElement &a, const AlgElement &b) {
  require_same_algebra(a, b);
  std::vector<CMatrix> blocks;
  blocks.reserve(a.blocks().size());
  for (std::size_t k = 0; k < a.blocks().size(); ++k)
    blocks.push_back(a.block(k) + b.block(k));
  return AlgElement(a.shape(), std::move(blocks));
}

AlgElement alg_sub(const AlgElement &a, const AlgElement &b) {
  require_same_algebra(a, b);
  std::vector<CMatrix> blocks;
  blocks.reserve(a.blocks().size());
  for (std::size_t k = 0; k < a.blocks().size(); ++k)
    blocks.push_back(a.block(k) - b.block(k));
  return AlgElement(a.shape(), std::move(blocks));
}

AlgElement alg_scale(cplx s, const AlgElement &a) {
  std::vector<CMatrix> blocks;
  blocks.reserve(a.blocks().size());
  for (const auto &blk : a.blocks()) blocks.push_back(blk * s);
  return AlgElement(a.shape(), std::move(blocks));
}

AlgElement alg_adjoint(const AlgElement &a) {
  std::vector<CMatrix> blocks;
  blocks.reserve(a.blocks().size());
  for (const auto &blk : a.blocks()) blocks.push_back(blk.adjoint());
  return AlgElement(a.shape(), std::move(blocks));
}

AlgElement alg_unit(const AlgebraShape &shape) { return AlgElement::unit(shape); }

PositivityReport is_positive(const AlgElement &a, const Tolerance &tol) {
  PositivityReport rep;
  rep.hermitian = true;
  rep.positive = true;
  rep.min_eigenvalue = 0.0;

  for (std::size_t k = 0; k < a.blocks().size(); ++k) {
    const CMatrix &blk = a.block(k);
    if (blk.rows() == 0) continue;
    const CMatrix adj = blk.adjoint();
    const CMatrix sym = (blk + adj) * cplx(0.5, 0.0);
    const double asym = (blk - adj).frobenius_norm() * 0.5;
    const EigResult eig = eig_hermitian(sym, tol);
    double spectral = 0.0;
    for (double v : eig.eigenvalues) spectral = std::max(spectral, std::abs(v));
    const double thr = tol.threshold(spectral);
    if (asym > thr) {
      rep.hermitian = false;
      rep.positive = false;
      if (asym > rep.asymmetry) {
        rep.asymmetry = asym;
        rep.witness_block = k;
      }
      continue;
    }
    const double lo = eig.eigenvalues.front();
    if (lo < rep.min_eigenvalue) {
      rep.min_eigenvalue = lo;
      rep.witness_block = k;
    }
    if (lo < -thr) rep.positive = false;
  }
  return rep;
}

AlgElement sqrt_positive(const AlgElement &a, const Tolerance &tol) {
  const PositivityReport rep = is_positive(a, tol);
  if (!rep.positive) {
    std::ostringstream msg;
    msg << "element is not positive (min eigenvalue " << rep.min_eigenvalue
        << " in block " << rep.witness_block << ")";
    throw OpkError(ErrorCode::NotPositive, msg.str());
  }
  std::vector<CMatrix> blocks;
  blocks.reserve(a.blocks().size());
  for (const auto &blk : a.blocks()) {
    const std::size_t n = blk.rows();
    const CMatrix sym = (blk + blk.adjoint()) * cplx(0.5, 0.0);
    const EigResult eig = eig_hermitian(sym, tol);
    CMatrix root(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      const double lam = eig.eigenvalues[j] > 0.0 ? eig.eigenvalues[j] : 0.0;
      const double s = std::sqrt(lam);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
          root(r, c) += s * eig.vectors(r, j) * std::conj(eig.vectors(c, j));
    }
    blocks.push_back(std::move(root));
  }
  return AlgElement(a.shape(), std::move(blocks));
}

cplx functional_apply(const Functional &phi, const AlgElement &b) {
  if (!(phi.shape == b.shape()))
    throw OpkError(ErrorCode::ShapeMismatch,
                   "functional/element shape mismatch");
  cplx acc(0.0, 0.0);
  for (std::size_t k = 0; k < phi.densities.size(); ++k)
    acc += (phi.densities[k] * b.block(k)).trace();
  return acc;
}

void validate_functional(const Functional &phi, const Tolerance &tol) {
  if (phi.densities.size() != phi.shape.num_blocks())
    throw OpkError(ErrorCode::ShapeMismatch, "functional block count mismatch");
  for (std::size_t k = 0; k < phi.densities.size(); ++k) {
    const std::size_t n = phi.shape.block_dims[k];
    if (phi.densities[k].rows() != n || phi.densities[k].cols() != n)
      throw OpkError(ErrorCode::ShapeMismatch,
                     "functional density size mismatch at block " +
                         std::to_string(k));
    try {
      psd_factor(phi.densities[k], tol);
    } catch (const OpkError &) {
      throw OpkError(ErrorCode::NotPositiveFunctional,
                     "density block " + std::to_string(k) + " is not PSD");
    }
  }
}

CMatrix alg_to_coords(const AlgElement &a) {
  CMatrix out(a.shape().dim(), 1);
  std::size_t off = 0;
  for (const auto &blk : a.blocks()) {
    for (std::size_t i = 0; i < blk.size(); ++i) out(off + i, 0) = blk.data()[i];
    off += blk.size();
  }
  return out;
}

AlgElement alg_from_coords(const AlgebraShape &shape, const CMatrix &coords) {
  if (coords.rows() != shape.dim() || coords.cols() != 1)
    throw OpkError(ErrorCode::ShapeMismatch, "coordinate vector size mismatch");
  std::vector<CMatrix> blocks;
  blocks.reserve(shape.num_blocks());
  std::size_t off = 0;
  for (std::size_t n : shape.block_dims) {
    CMatrix blk(n, n);
    for (std::size_t i = 0; i < n * n; ++i) blk.data()[i] = coords(off + i, 0);
    off += n * n;
    blocks.push_back(std::move(blk));
  }
  return AlgElement(shape, std::move(blocks));
}

AlgElement alg_unit_element(const AlgebraShape &shape, std::size_t index) {
  CMatrix coords(shape.dim(), 1);
  coords(index, 0) = cplx(1.0, 0.0);
  return alg_from_coords(shape, coords);
}

void alg_unit_position(const AlgebraShape &shape, std::size_t index,
                       std::size_t &block, std::size_t &row, std::size_t &col) {
  std::size_t off = 0;
  for (std::size_t k = 0; k < shape.num_blocks(); ++k) {
    const std::size_t n = shape.block_dims[k];
    if (index < off + n * n) {
      block = k;
      row = (index - off) / n;
      col = (index - off) % n;
      return;
    }
    off += n * n;
  }
  throw OpkError(ErrorCode::InvalidInput, "unit index out of range");
}

}  // namespace opkernel
