#include "opkernel/modcorr.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>

namespace opkernel {

ModVector::ModVector(HilbertModule module, std::vector<CMatrix> blocks)
    : module_(std::move(module)), blocks_(std::move(blocks)) {
  if (blocks_.size() != module_.right.num_blocks())
    throw OpkError(ErrorCode::ShapeMismatch, "vector block count mismatch");
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (blocks_[k].rows() != module_.ambient[k] ||
        blocks_[k].cols() != module_.right.block_dims[k])
      throw OpkError(ErrorCode::ShapeMismatch,
                     "vector block size mismatch at block " + std::to_string(k));
  }
}

ModVector ModVector::zero(const HilbertModule &module) {
  std::vector<CMatrix> blocks;
  blocks.reserve(module.right.num_blocks());
  for (std::size_t k = 0; k < module.right.num_blocks(); ++k)
    blocks.emplace_back(module.ambient[k], module.right.block_dims[k]);
  return ModVector(module, std::move(blocks));
}

double ModVector::norm() const {
  double acc = 0.0;
  for (const auto &b : blocks_) {
    const double f = b.frobenius_norm();
    acc += f * f;
  }
  return std::sqrt(acc);
}

static void require_same_module(const ModVector &x, const ModVector &y) {
  if (!(x.module() == y.module()))
    throw OpkError(ErrorCode::ShapeMismatch, "vectors live in different modules");
}

AlgElement inner(const ModVector &x, const ModVector &y) {
  require_same_module(x, y);
  std::vector<CMatrix> blocks;
  blocks.reserve(x.blocks().size());
  for (std::size_t k = 0; k < x.blocks().size(); ++k)
    blocks.push_back(x.block(k).adjoint() * y.block(k));
  return AlgElement(x.module().right, std::move(blocks));
}

ModVector mod_add(const ModVector &x, const ModVector &y) {
  require_same_module(x, y);
  std::vector<CMatrix> blocks;
  for (std::size_t k = 0; k < x.blocks().size(); ++k)
    blocks.push_back(x.block(k) + y.block(k));
  return ModVector(x.module(), std::move(blocks));
}

ModVector mod_sub(const ModVector &x, const ModVector &y) {
  require_same_module(x, y);
  std::vector<CMatrix> blocks;
  for (std::size_t k = 0; k < x.blocks().size(); ++k)
    blocks.push_back(x.block(k) - y.block(k));
  return ModVector(x.module(), std::move(blocks));
}

ModVector mod_scale(cplx s, const ModVector &x) {
  std::vector<CMatrix> blocks;
  for (const auto &b : x.blocks()) blocks.push_back(b * s);
  return ModVector(x.module(), std::move(blocks));
}

ModVector mod_right(const ModVector &x, const AlgElement &b) {
  if (!(x.module().right == b.shape()))
    throw OpkError(ErrorCode::ShapeMismatch, "right action shape mismatch");
  std::vector<CMatrix> blocks;
  for (std::size_t k = 0; k < x.blocks().size(); ++k)
    blocks.push_back(x.block(k) * b.block(k));
  return ModVector(x.module(), std::move(blocks));
}

CMatrix mod_coords(const ModVector &x) {
  CMatrix out(x.module().linear_dim(), 1);
  std::size_t off = 0;
  for (const auto &b : x.blocks()) {
    for (std::size_t i = 0; i < b.size(); ++i) out(off + i, 0) = b.data()[i];
    off += b.size();
  }
  return out;
}

ModVector mod_from_coords(const HilbertModule &module, const CMatrix &coords) {
  if (coords.rows() != module.linear_dim() || coords.cols() != 1)
    throw OpkError(ErrorCode::ShapeMismatch, "module coordinate size mismatch");
  std::vector<CMatrix> blocks;
  std::size_t off = 0;
  for (std::size_t k = 0; k < module.right.num_blocks(); ++k) {
    CMatrix b(module.ambient[k], module.right.block_dims[k]);
    for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = coords(off + i, 0);
    off += b.size();
    blocks.push_back(std::move(b));
  }
  return ModVector(module, std::move(blocks));
}

std::vector<ModVector> module_basis(const HilbertModule &module) {
  std::vector<ModVector> basis;
  const std::size_t dim = module.linear_dim();
  basis.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    CMatrix coords(dim, 1);
    coords(i, 0) = cplx(1.0, 0.0);
    basis.push_back(mod_from_coords(module, coords));
  }
  return basis;
}

CMatrix LeftAction::block_of(std::size_t k, const AlgElement &a) const {
  if (!(a.shape() == left))
    throw OpkError(ErrorCode::ShapeMismatch, "left action algebra mismatch");
  const CMatrix coords = alg_to_coords(a);
  if (mats[k].empty()) return CMatrix();
  CMatrix out(mats[k][0].rows(), mats[k][0].cols());
  for (std::size_t u = 0; u < mats[k].size(); ++u) {
    const cplx c = coords(u, 0);
    if (c == cplx(0.0, 0.0)) continue;
    out += mats[k][u] * c;
  }
  return out;
}

ModVector left_act(const Correspondence &corr, const AlgElement &a,
                   const ModVector &x) {
  if (!(x.module() == corr.module))
    throw OpkError(ErrorCode::ShapeMismatch, "vector not in correspondence");
  std::vector<CMatrix> blocks;
  for (std::size_t k = 0; k < x.blocks().size(); ++k)
    blocks.push_back(corr.action.block_of(k, a) * x.block(k));
  return ModVector(x.module(), std::move(blocks));
}

void validate_left_action(const LeftAction &action,
                          const std::vector<std::size_t> &ambient,
                          const Tolerance &tol) {
  const AlgebraShape &a = action.left;
  const std::size_t dim = a.dim();
  if (action.mats.size() != ambient.size())
    throw OpkError(ErrorCode::ShapeMismatch, "left action block count mismatch");

  for (std::size_t k = 0; k < ambient.size(); ++k) {
    if (action.mats[k].size() != dim)
      throw OpkError(ErrorCode::ShapeMismatch,
                     "left action unit count mismatch at block " +
                         std::to_string(k));
    double scale = 1.0;
    for (const auto &m : action.mats[k]) {
      if (m.rows() != ambient[k] || m.cols() != ambient[k])
        throw OpkError(ErrorCode::ShapeMismatch,
                       "left action matrix size mismatch");
      scale = std::max(scale, m.frobenius_norm());
    }
    const double thr = tol.threshold(scale) * 10.0;

    // involution
    for (std::size_t u = 0; u < dim; ++u) {
      std::size_t blk, row, col;
      alg_unit_position(a, u, blk, row, col);
      std::size_t off = 0;
      for (std::size_t j = 0; j < blk; ++j)
        off += a.block_dims[j] * a.block_dims[j];
      const std::size_t ustar = off + col * a.block_dims[blk] + row;
      if ((action.mats[k][u].adjoint() - action.mats[k][ustar])
              .frobenius_norm() > thr)
        throw OpkError(ErrorCode::NotRepresentation,
                       "left action is not *-preserving");
    }
    // multiplicativity on matrix units; for large ambient spaces the
    // matrix-product check is downgraded to fixed probe vectors
    const bool exact = ambient[k] <= 32;
    CMatrix probes;
    if (!exact) {
      probes = CMatrix(ambient[k], 4);
      std::uint64_t state = 0x243f6a8885a308d3ULL;  // fixed, deterministic
      for (auto &v : probes.data()) {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        const double re = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        const double im = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
        v = cplx(re, im);
      }
    }
    for (std::size_t u = 0; u < dim; ++u) {
      std::size_t ublk, urow, ucol;
      alg_unit_position(a, u, ublk, urow, ucol);
      for (std::size_t v = 0; v < dim; ++v) {
        std::size_t vblk, vrow, vcol;
        alg_unit_position(a, v, vblk, vrow, vcol);
        CMatrix expected(ambient[k], ambient[k]);
        bool has_expected = false;
        std::size_t exp_index = 0;
        if (ublk == vblk && ucol == vrow) {
          std::size_t off = 0;
          for (std::size_t j = 0; j < ublk; ++j)
            off += a.block_dims[j] * a.block_dims[j];
          exp_index = off + urow * a.block_dims[ublk] + vcol;
          has_expected = true;
        }
        double defect;
        if (exact) {
          if (has_expected) expected = action.mats[k][exp_index];
          defect = (action.mats[k][u] * action.mats[k][v] - expected)
                       .frobenius_norm();
        } else {
          CMatrix rhs = action.mats[k][u] * (action.mats[k][v] * probes);
          if (has_expected) rhs -= action.mats[k][exp_index] * probes;
          defect = rhs.frobenius_norm();
        }
        if (defect > thr)
          throw OpkError(ErrorCode::NotRepresentation,
                         "left action is not multiplicative");
      }
    }
    // nondegeneracy: the unit acts as the identity
    CMatrix unit_image(ambient[k], ambient[k]);
    std::size_t off = 0;
    for (std::size_t j = 0; j < a.num_blocks(); ++j) {
      const std::size_t p = a.block_dims[j];
      for (std::size_t r = 0; r < p; ++r)
        unit_image += action.mats[k][off + r * p + r];
      off += p * p;
    }
    if ((unit_image - CMatrix::identity(ambient[k])).frobenius_norm() > thr)
      throw OpkError(ErrorCode::NotNondegenerate,
                     "unit does not act as identity");
  }
}

AdjointableOp AdjointableOp::identity(const HilbertModule &m) {
  std::vector<CMatrix> blocks;
  for (std::size_t d : m.ambient) blocks.push_back(CMatrix::identity(d));
  return AdjointableOp{m, m, std::move(blocks)};
}

ModVector AdjointableOp::apply(const ModVector &x) const {
  if (!(x.module() == domain))
    throw OpkError(ErrorCode::ShapeMismatch, "operator domain mismatch");
  std::vector<CMatrix> out;
  for (std::size_t k = 0; k < blocks.size(); ++k)
    out.push_back(blocks[k] * x.block(k));
  return ModVector(codomain, std::move(out));
}

AdjointableOp AdjointableOp::adjoint() const {
  std::vector<CMatrix> out;
  for (const auto &b : blocks) out.push_back(b.adjoint());
  return AdjointableOp{codomain, domain, std::move(out)};
}

AdjointableOp AdjointableOp::compose(const AdjointableOp &first) const {
  if (!(first.codomain == domain))
    throw OpkError(ErrorCode::ShapeMismatch, "operator composition mismatch");
  std::vector<CMatrix> out;
  for (std::size_t k = 0; k < blocks.size(); ++k)
    out.push_back(blocks[k] * first.blocks[k]);
  return AdjointableOp{first.domain, codomain, std::move(out)};
}

double AdjointableOp::isometry_defect() const {
  double worst = 0.0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const CMatrix gram = blocks[k].adjoint() * blocks[k];
    worst = std::max(
        worst,
        (gram - CMatrix::identity(domain.ambient[k])).frobenius_norm());
  }
  return worst;
}

//=========================================================================
// Constructions
//=========================================================================

Submodule submodule_from_generators(const std::vector<ModVector> &gens,
                                    const Tolerance &tol) {
  if (gens.empty())
    throw OpkError(ErrorCode::InvalidInput, "no generators supplied");
  const HilbertModule &parent = gens.front().module();
  for (const auto &g : gens)
    if (!(g.module() == parent))
      throw OpkError(ErrorCode::ShapeMismatch, "generators in different modules");

  const std::size_t kcount = parent.right.num_blocks();
  HilbertModule sub{parent.right, std::vector<std::size_t>(kcount, 0)};
  std::vector<CMatrix> coords_stacks(kcount), inclusions(kcount);

  for (std::size_t k = 0; k < kcount; ++k) {
    std::vector<CMatrix> cols;
    for (const auto &g : gens) cols.push_back(g.block(k));
    const CMatrix stacked = hcat(cols);
    const CMatrix gram = stacked.adjoint() * stacked;
    const CMatrix l = psd_factor(gram, tol);
    sub.ambient[k] = l.rows();
    coords_stacks[k] = l;
    if (l.rows() == 0) {
      inclusions[k] = CMatrix(parent.ambient[k], 0);
    } else {
      inclusions[k] = stacked * right_pseudo_inverse(l);
    }
  }

  Submodule out;
  out.module = sub;
  out.inclusion = AdjointableOp{sub, parent, std::move(inclusions)};
  const std::size_t nk_total = kcount;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    std::vector<CMatrix> blocks;
    for (std::size_t k = 0; k < nk_total; ++k) {
      const std::size_t n = parent.right.block_dims[k];
      blocks.push_back(coords_stacks[k].columns(i * n, n));
    }
    out.coords.emplace_back(sub, std::move(blocks));
  }
  return out;
}

AlgebraShape compacts_shape(const HilbertModule &e) {
  return AlgebraShape{e.ambient};
}

Correspondence dual_module(const HilbertModule &e) {
  const std::size_t kcount = e.right.num_blocks();
  HilbertModule dual{compacts_shape(e), e.right.block_dims};
  LeftAction action;
  action.left = e.right;
  action.mats.resize(kcount);
  const std::size_t dim = e.right.dim();
  for (std::size_t k = 0; k < kcount; ++k) {
    action.mats[k].reserve(dim);
    for (std::size_t u = 0; u < dim; ++u) {
      std::size_t blk, row, col;
      alg_unit_position(e.right, u, blk, row, col);
      CMatrix m(e.right.block_dims[k], e.right.block_dims[k]);
      if (blk == k) m(row, col) = cplx(1.0, 0.0);
      action.mats[k].push_back(std::move(m));
    }
  }
  return Correspondence{dual, std::move(action)};
}

ModVector dual_vector(const HilbertModule &e, const ModVector &x) {
  if (!(x.module() == e))
    throw OpkError(ErrorCode::ShapeMismatch, "vector not in module");
  const Correspondence dual = dual_module(e);
  std::vector<CMatrix> blocks;
  for (const auto &b : x.blocks()) blocks.push_back(b.adjoint());
  return ModVector(dual.module, std::move(blocks));
}

AlgebraShape linking_shape(const HilbertModule &e) {
  AlgebraShape out;
  for (std::size_t k = 0; k < e.right.num_blocks(); ++k)
    out.block_dims.push_back(e.right.block_dims[k] + e.ambient[k]);
  return out;
}

AlgElement linking_embed(const HilbertModule &e, const AlgElement &b,
                         const ModVector &x, const ModVector &y,
                         const AlgElement &a) {
  if (!(b.shape() == e.right) || !(x.module() == e) || !(y.module() == e) ||
      !(a.shape() == compacts_shape(e)))
    throw OpkError(ErrorCode::ShapeMismatch, "linking embed shape mismatch");
  std::vector<CMatrix> blocks;
  for (std::size_t k = 0; k < e.right.num_blocks(); ++k) {
    const std::size_t n = e.right.block_dims[k];
    const std::size_t d = e.ambient[k];
    CMatrix m(n + d, n + d);
    m.set_block(0, 0, b.block(k));
    m.set_block(0, n, x.block(k).adjoint());
    m.set_block(n, 0, y.block(k));
    m.set_block(n, n, a.block(k));
    blocks.push_back(std::move(m));
  }
  return AlgElement(linking_shape(e), std::move(blocks));
}

HilbertModule direct_sum(const std::vector<HilbertModule> &parts) {
  if (parts.empty())
    throw OpkError(ErrorCode::InvalidInput, "empty direct sum");
  HilbertModule out{parts.front().right,
                    std::vector<std::size_t>(parts.front().right.num_blocks(), 0)};
  for (const auto &p : parts) {
    if (!(p.right == out.right))
      throw OpkError(ErrorCode::ShapeMismatch,
                     "direct sum over different algebras");
    for (std::size_t k = 0; k < p.ambient.size(); ++k)
      out.ambient[k] += p.ambient[k];
  }
  return out;
}

ModVector direct_sum_embed(const std::vector<HilbertModule> &parts,
                           std::size_t which, const ModVector &x) {
  const HilbertModule sum = direct_sum(parts);
  ModVector out = ModVector::zero(sum);
  for (std::size_t k = 0; k < sum.right.num_blocks(); ++k) {
    std::size_t off = 0;
    for (std::size_t i = 0; i < which; ++i) off += parts[i].ambient[k];
    out.block(k).set_block(off, 0, x.block(k));
  }
  return out;
}

AlgebraShape matrix_amplification(const AlgebraShape &shape, std::size_t n) {
  AlgebraShape out;
  for (std::size_t d : shape.block_dims) out.block_dims.push_back(n * d);
  return out;
}

AlgElement amplification_embed(const AlgebraShape &shape, std::size_t n,
                               const std::vector<AlgElement> &entries) {
  if (entries.size() != n * n)
    throw OpkError(ErrorCode::ShapeMismatch, "amplification needs n*n entries");
  const AlgebraShape big = matrix_amplification(shape, n);
  AlgElement out = AlgElement::zero(big);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const AlgElement &entry = entries[i * n + j];
      if (!(entry.shape() == shape))
        throw OpkError(ErrorCode::ShapeMismatch, "amplification entry shape");
      for (std::size_t k = 0; k < shape.num_blocks(); ++k) {
        const std::size_t nk = shape.block_dims[k];
        out.block(k).set_block(i * nk, j * nk, entry.block(k));
      }
    }
  return out;
}

HilbertModule row_space(const HilbertModule &e, std::size_t n) {
  return HilbertModule{matrix_amplification(e.right, n), e.ambient};
}

ModVector row_vector(const HilbertModule &e,
                     const std::vector<ModVector> &xs) {
  const std::size_t n = xs.size();
  if (n == 0) throw OpkError(ErrorCode::InvalidInput, "empty row vector");
  const HilbertModule row = row_space(e, n);
  std::vector<CMatrix> blocks;
  for (std::size_t k = 0; k < e.right.num_blocks(); ++k) {
    std::vector<CMatrix> parts;
    for (const auto &x : xs) {
      if (!(x.module() == e))
        throw OpkError(ErrorCode::ShapeMismatch, "row entry not in module");
      parts.push_back(x.block(k));
    }
    blocks.push_back(hcat(parts));
  }
  return ModVector(row, std::move(blocks));
}

HilbertModule column_space(const HilbertModule &e, std::size_t n) {
  return direct_sum(std::vector<HilbertModule>(n, e));
}

//=========================================================================
// Representation decomposition
//=========================================================================

RepDecomposition decompose_rep(const LeftAction &action,
                               const std::vector<std::size_t> &ambient,
                               const Tolerance &tol) {
  validate_left_action(action, ambient, tol);
  const AlgebraShape &a = action.left;

  RepDecomposition out;
  out.mult.resize(ambient.size());
  out.w.resize(ambient.size());

  for (std::size_t k = 0; k < ambient.size(); ++k) {
    const std::size_t d = ambient[k];
    out.mult[k].assign(a.num_blocks(), 0);
    CMatrix basis(d, d);  // columns of W^*
    std::size_t colpos = 0;
    std::size_t off = 0;
    for (std::size_t j = 0; j < a.num_blocks(); ++j) {
      const std::size_t p = a.block_dims[j];
      const CMatrix &proj = action.mats[k][off];  // rho(E^{(j)}_{00})
      const EigResult eig = eig_hermitian(
          (proj + proj.adjoint()) * cplx(0.5, 0.0), tol);
      std::size_t m = 0;
      for (double lam : eig.eigenvalues) {
        if (lam > 0.5) {
          ++m;
        } else if (lam > 0.25) {
          throw OpkError(ErrorCode::NonIntegralMultiplicity,
                         "projection spectrum is not 0/1");
        }
      }
      out.mult[k][j] = m;
      // columns u_{(r,s)} = rho(E^{(j)}_{r0}) w_s, ordered r-major
      for (std::size_t r = 0; r < p; ++r) {
        const CMatrix &shift = action.mats[k][off + r * p + 0];
        for (std::size_t s = 0; s < m; ++s) {
          const std::size_t src = d - m + s;  // eigenvalue-1 columns are last
          for (std::size_t row = 0; row < d; ++row) {
            cplx acc(0.0, 0.0);
            for (std::size_t t = 0; t < d; ++t)
              acc += shift(row, t) * eig.vectors(t, src);
            if (colpos + r * m + s >= d)
              throw OpkError(ErrorCode::NonIntegralMultiplicity,
                             "multiplicities exceed ambient dimension");
            basis(row, colpos + r * m + s) = acc;
          }
        }
      }
      colpos += p * m;
      off += p * p;
    }
    if (colpos != d)
      throw OpkError(ErrorCode::NonIntegralMultiplicity,
                     "multiplicities do not fill the ambient space");
    // W = basis^*, validate unitarity
    const double defect =
        (basis.adjoint() * basis - CMatrix::identity(d)).frobenius_norm();
    if (defect > tol.threshold(1.0) * 100.0 + 1e-8)
      throw OpkError(ErrorCode::NotRepresentation,
                     "decomposition basis is not orthonormal");
    out.w[k] = basis.adjoint();
  }
  return out;
}

//=========================================================================
// Tensor product
//=========================================================================

TensorProduct::TensorProduct(HilbertModule e,
                             std::optional<LeftAction> e_action,
                             Correspondence f, const Tolerance &tol)
    : e_(std::move(e)), e_action_(std::move(e_action)), f_(std::move(f)) {
  if (!(f_.action.left == e_.right))
    throw OpkError(ErrorCode::MiddleAlgebraMismatch,
                   "tensor middle algebras differ: " + e_.right.describe() +
                       " vs " + f_.action.left.describe());
  dec_ = decompose_rep(f_.action, f_.module.ambient, tol);

  const std::size_t ccount = f_.module.right.num_blocks();
  const std::size_t kcount = e_.right.num_blocks();
  result_.right = f_.module.right;
  result_.ambient.assign(ccount, 0);
  offsets_.assign(ccount, std::vector<std::size_t>(kcount, 0));
  for (std::size_t c = 0; c < ccount; ++c) {
    std::size_t pos = 0;
    for (std::size_t k = 0; k < kcount; ++k) {
      offsets_[c][k] = pos;
      pos += e_.ambient[k] * dec_.mult[c][k];
    }
    result_.ambient[c] = pos;
  }

  if (e_action_) {
    LeftAction res;
    res.left = e_action_->left;
    res.mats.resize(ccount);
    const std::size_t dim = res.left.dim();
    for (std::size_t c = 0; c < ccount; ++c) {
      res.mats[c].reserve(dim);
      for (std::size_t u = 0; u < dim; ++u) {
        CMatrix m(result_.ambient[c], result_.ambient[c]);
        for (std::size_t k = 0; k < kcount; ++k) {
          const std::size_t mult = dec_.mult[c][k];
          if (mult == 0) continue;
          const CMatrix &rho = e_action_->mats[k][u];
          const std::size_t base = offsets_[c][k];
          for (std::size_t r = 0; r < rho.rows(); ++r)
            for (std::size_t t = 0; t < rho.cols(); ++t) {
              const cplx v = rho(r, t);
              if (v == cplx(0.0, 0.0)) continue;
              for (std::size_t s = 0; s < mult; ++s)
                m(base + r * mult + s, base + t * mult + s) = v;
            }
        }
        res.mats[c].push_back(std::move(m));
      }
    }
    result_action_ = std::move(res);
  }
}

Correspondence TensorProduct::corr() const {
  if (!result_action_)
    throw OpkError(ErrorCode::InternalError,
                   "tensor has no left action to expose");
  return Correspondence{result_, *result_action_};
}

ModVector TensorProduct::embed(const ModVector &x, const ModVector &y) const {
  if (!(x.module() == e_))
    throw OpkError(ErrorCode::ShapeMismatch, "tensor left factor mismatch");
  if (!(y.module() == f_.module))
    throw OpkError(ErrorCode::ShapeMismatch, "tensor right factor mismatch");

  const std::size_t ccount = f_.module.right.num_blocks();
  const std::size_t kcount = e_.right.num_blocks();
  std::vector<CMatrix> blocks;
  blocks.reserve(ccount);
  for (std::size_t c = 0; c < ccount; ++c) {
    const std::size_t pc = f_.module.right.block_dims[c];
    CMatrix out(result_.ambient[c], pc);
    const CMatrix z = dec_.w[c] * y.block(c);
    std::size_t woff = 0;
    for (std::size_t k = 0; k < kcount; ++k) {
      const std::size_t nk = e_.right.block_dims[k];
      const std::size_t mult = dec_.mult[c][k];
      const std::size_t dk = e_.ambient[k];
      const CMatrix &xk = x.block(k);
      for (std::size_t col = 0; col < pc; ++col)
        for (std::size_t r = 0; r < dk; ++r)
          for (std::size_t s = 0; s < mult; ++s) {
            cplx acc(0.0, 0.0);
            for (std::size_t t = 0; t < nk; ++t)
              acc += xk(r, t) * z(woff + t * mult + s, col);
            out(offsets_[c][k] + r * mult + s, col) = acc;
          }
      woff += nk * mult;
    }
    blocks.push_back(std::move(out));
  }
  return ModVector(result_, std::move(blocks));
}

AdjointableOp TensorProduct::lift_left(const AdjointableOp &t,
                                       const TensorProduct &dst) const {
  if (!(t.domain == e_) || !(t.codomain == dst.e_))
    throw OpkError(ErrorCode::ShapeMismatch, "lift_left operator mismatch");
  if (!(dst.f_.module == f_.module) || !(dec_.mult == dst.dec_.mult))
    throw OpkError(ErrorCode::ShapeMismatch,
                   "lift_left requires the same right factor");

  const std::size_t ccount = f_.module.right.num_blocks();
  const std::size_t kcount = e_.right.num_blocks();
  std::vector<CMatrix> blocks;
  for (std::size_t c = 0; c < ccount; ++c) {
    CMatrix m(dst.result_.ambient[c], result_.ambient[c]);
    for (std::size_t k = 0; k < kcount; ++k) {
      const std::size_t mult = dec_.mult[c][k];
      if (mult == 0) continue;
      const CMatrix &tk = t.blocks[k];
      for (std::size_t r = 0; r < tk.rows(); ++r)
        for (std::size_t q = 0; q < tk.cols(); ++q) {
          const cplx v = tk(r, q);
          if (v == cplx(0.0, 0.0)) continue;
          for (std::size_t s = 0; s < mult; ++s)
            m(dst.offsets_[c][k] + r * mult + s,
              offsets_[c][k] + q * mult + s) = v;
        }
    }
    blocks.push_back(std::move(m));
  }
  return AdjointableOp{result_, dst.result_, std::move(blocks)};
}

TensorProduct tensor(const Correspondence &e, const Correspondence &f,
                     const Tolerance &tol) {
  return TensorProduct(e.module, e.action, f, tol);
}

TensorProduct tensor_module(const HilbertModule &e, const Correspondence &f,
                            const Tolerance &tol) {
  return TensorProduct(e, std::nullopt, f, tol);
}

Correspondence trivial_correspondence(const AlgebraShape &shape) {
  HilbertModule mod{shape, shape.block_dims};
  LeftAction action;
  action.left = shape;
  action.mats.resize(shape.num_blocks());
  const std::size_t dim = shape.dim();
  for (std::size_t k = 0; k < shape.num_blocks(); ++k) {
    for (std::size_t u = 0; u < dim; ++u) {
      std::size_t blk, row, col;
      alg_unit_position(shape, u, blk, row, col);
      CMatrix m(shape.block_dims[k], shape.block_dims[k]);
      if (blk == k) m(row, col) = cplx(1.0, 0.0);
      action.mats[k].push_back(std::move(m));
    }
  }
  return Correspondence{mod, std::move(action)};
}

Correspondence identity_representation(const AlgebraShape &shape) {
  std::size_t total = 0;
  for (std::size_t n : shape.block_dims) total += n;
  HilbertModule mod{AlgebraShape{{1}}, {total}};
  LeftAction action;
  action.left = shape;
  action.mats.resize(1);
  const std::size_t dim = shape.dim();
  action.mats[0].reserve(dim);
  for (std::size_t u = 0; u < dim; ++u) {
    std::size_t blk, row, col;
    alg_unit_position(shape, u, blk, row, col);
    std::size_t off = 0;
    for (std::size_t j = 0; j < blk; ++j) off += shape.block_dims[j];
    CMatrix m(total, total);
    m(off + row, off + col) = cplx(1.0, 0.0);
    action.mats[0].push_back(std::move(m));
  }
  return Correspondence{mod, std::move(action)};
}

Correspondence tautological_correspondence(const HilbertModule &e) {
  const AlgebraShape ke = compacts_shape(e);
  LeftAction action;
  action.left = ke;
  action.mats.resize(e.right.num_blocks());
  const std::size_t dim = ke.dim();
  for (std::size_t k = 0; k < e.right.num_blocks(); ++k) {
    for (std::size_t u = 0; u < dim; ++u) {
      std::size_t blk, row, col;
      alg_unit_position(ke, u, blk, row, col);
      CMatrix m(e.ambient[k], e.ambient[k]);
      if (blk == k) m(row, col) = cplx(1.0, 0.0);
      action.mats[k].push_back(std::move(m));
    }
  }
  return Correspondence{e, std::move(action)};
}

AdjointableOp solve_intertwiner(const std::vector<ModVector> &from_gens,
                                const std::vector<ModVector> &to_gens,
                                double *residual_out) {
  if (from_gens.empty() || from_gens.size() != to_gens.size())
    throw OpkError(ErrorCode::InvalidInput, "intertwiner generator mismatch");
  const HilbertModule &dom = from_gens.front().module();
  const HilbertModule &cod = to_gens.front().module();
  if (!(dom.right == cod.right))
    throw OpkError(ErrorCode::ShapeMismatch,
                   "intertwiner right algebras differ");

  double residual = 0.0;
  double scale = 0.0;
  std::vector<CMatrix> blocks;
  for (std::size_t k = 0; k < dom.right.num_blocks(); ++k) {
    std::vector<CMatrix> src_cols, dst_cols;
    for (const auto &g : from_gens) src_cols.push_back(g.block(k));
    for (const auto &g : to_gens) dst_cols.push_back(g.block(k));
    const CMatrix src = hcat(src_cols);
    const CMatrix dst = hcat(dst_cols);
    scale = std::max(scale, std::max(src.max_abs(), dst.max_abs()));
    if (dom.ambient[k] == 0) {
      blocks.push_back(CMatrix(cod.ambient[k], 0));
      residual = std::max(residual, dst.frobenius_norm());
      continue;
    }
    CMatrix v;
    try {
      v = dst * right_pseudo_inverse(src);
    } catch (const OpkError &) {
      throw OpkError(ErrorCode::InternalError,
                     "intertwiner source family does not span its module");
    }
    residual = std::max(residual, (v * src - dst).frobenius_norm());
    blocks.push_back(std::move(v));
  }
  if (residual_out) *residual_out = residual / (1.0 + scale);
  return AdjointableOp{dom, cod, std::move(blocks)};
}

}  // namespace opkernel
