#include "opkernel/cpd.hpp"

#include <cmath>
#include <sstream>

namespace opkernel {

//=========================================================================
// LinMap
//=========================================================================

AlgElement LinMap::apply(const AlgElement &a) const {
  if (!(a.shape() == from))
    throw OpkError(ErrorCode::ShapeMismatch, "map applied to wrong algebra");
  return alg_from_coords(to, action * alg_to_coords(a));
}

LinMap LinMap::identity(const AlgebraShape &shape) {
  return LinMap{shape, shape, CMatrix::identity(shape.dim())};
}

LinMap LinMap::zero(const AlgebraShape &from, const AlgebraShape &to) {
  return LinMap{from, to, CMatrix(to.dim(), from.dim())};
}

LinMap compose(const LinMap &l, const LinMap &k) {
  if (!(l.from == k.to))
    throw OpkError(ErrorCode::MiddleAlgebraMismatch,
                   "map composition middle algebras differ");
  return LinMap{k.from, l.to, l.action * k.action};
}

LinMap linmap_add(const LinMap &a, const LinMap &b) {
  if (!(a.from == b.from) || !(a.to == b.to))
    throw OpkError(ErrorCode::ShapeMismatch, "map addition shape mismatch");
  return LinMap{a.from, a.to, a.action + b.action};
}

LinMap linmap_scale(cplx s, const LinMap &a) {
  return LinMap{a.from, a.to, a.action * s};
}

double hermiticity_defect(const LinMap &t) {
  double worst = 0.0;
  const std::size_t dim = t.from.dim();
  for (std::size_t u = 0; u < dim; ++u) {
    const AlgElement unit = alg_unit_element(t.from, u);
    const AlgElement lhs = t.apply(alg_adjoint(unit));
    const AlgElement rhs = alg_adjoint(t.apply(unit));
    worst = std::max(worst, alg_sub(lhs, rhs).frobenius_norm());
  }
  return worst;
}

std::vector<CMatrix> choi(const LinMap &t) {
  const std::size_t jcount = t.from.num_blocks();
  const std::size_t kcount = t.to.num_blocks();
  std::vector<CMatrix> out;
  out.reserve(jcount * kcount);
  std::size_t joff = 0;
  for (std::size_t j = 0; j < jcount; ++j) {
    const std::size_t p = t.from.block_dims[j];
    for (std::size_t k = 0; k < kcount; ++k) {
      const std::size_t q = t.to.block_dims[k];
      CMatrix c(p * q, p * q);
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t l = 0; l < p; ++l) {
          const AlgElement img =
              t.apply(alg_unit_element(t.from, joff + i * p + l));
          const CMatrix &blk = img.block(k);
          for (std::size_t r = 0; r < q; ++r)
            for (std::size_t s = 0; s < q; ++s)
              c(i * q + r, l * q + s) = blk(r, s);
        }
      out.push_back(std::move(c));
    }
    joff += p * p;
  }
  return out;
}

LinMap choi_inverse(const AlgebraShape &from, const AlgebraShape &to,
                    const std::vector<CMatrix> &blocks) {
  if (blocks.size() != from.num_blocks() * to.num_blocks())
    throw OpkError(ErrorCode::ShapeMismatch, "choi block count mismatch");
  LinMap t = LinMap::zero(from, to);
  std::size_t joff = 0;
  for (std::size_t j = 0; j < from.num_blocks(); ++j) {
    const std::size_t p = from.block_dims[j];
    std::size_t tooff = 0;
    for (std::size_t k = 0; k < to.num_blocks(); ++k) {
      const std::size_t q = to.block_dims[k];
      const CMatrix &c = blocks[j * to.num_blocks() + k];
      if (c.rows() != p * q || c.cols() != p * q)
        throw OpkError(ErrorCode::ShapeMismatch, "choi block size mismatch");
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t l = 0; l < p; ++l)
          for (std::size_t r = 0; r < q; ++r)
            for (std::size_t s = 0; s < q; ++s)
              t.action(tooff + r * q + s, joff + i * p + l) =
                  c(i * q + r, l * q + s);
      tooff += q * q;
    }
    joff += p * p;
  }
  return t;
}

CpReport is_cp(const LinMap &t, const Tolerance &tol) {
  CpReport rep;
  rep.asymmetry = hermiticity_defect(t);
  rep.scale = t.action.frobenius_norm();
  rep.hermitian = rep.asymmetry <= tol.threshold(1.0 + rep.scale);
  if (!rep.hermitian) {
    rep.cp = false;
    return rep;
  }
  rep.cp = true;
  const std::vector<CMatrix> blocks = choi(t);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].rows() == 0) continue;
    const CMatrix sym = (blocks[b] + blocks[b].adjoint()) * cplx(0.5, 0.0);
    const EigResult eig = eig_hermitian(sym, tol);
    double spectral = 0.0;
    for (double v : eig.eigenvalues) spectral = std::max(spectral, std::abs(v));
    const double thr = tol.threshold(spectral);
    if (eig.eigenvalues.front() < rep.min_eigenvalue) {
      rep.min_eigenvalue = eig.eigenvalues.front();
      rep.witness_block = b;
    }
    if (eig.eigenvalues.front() < -thr) rep.cp = false;
  }
  return rep;
}

//=========================================================================
// MapKernel
//=========================================================================

MapKernel::MapKernel(std::vector<std::string> points,
                     std::vector<LinMap> entries)
    : points_(std::move(points)), entries_(std::move(entries)) {
  if (points_.empty())
    throw OpkError(ErrorCode::InvalidInput, "kernel needs at least one point");
  if (entries_.size() != points_.size() * points_.size())
    throw OpkError(ErrorCode::InvalidInput, "kernel entry count mismatch");
  for (const auto &e : entries_)
    if (!(e.from == entries_.front().from) || !(e.to == entries_.front().to))
      throw OpkError(ErrorCode::ShapeMismatch, "kernel entry shape mismatch");
}

MapKernel MapKernel::symmetrized(std::vector<std::string> points,
                                 std::vector<LinMap> entries) {
  const std::size_t m = points.size();
  if (entries.size() != m * m)
    throw OpkError(ErrorCode::InvalidInput, "kernel entry count mismatch");
  // K(s,t)(a) <- (K(s,t)(a) + K(t,s)(a*)^*)/2, computed on the action matrix
  std::vector<LinMap> sym = entries;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const LinMap &fwd = entries[i * m + j];
      const LinMap &rev = entries[j * m + i];
      const std::size_t dim = fwd.from.dim();
      CMatrix adj_action(fwd.action.rows(), fwd.action.cols());
      for (std::size_t u = 0; u < dim; ++u) {
        const AlgElement img = alg_adjoint(
            rev.apply(alg_adjoint(alg_unit_element(fwd.from, u))));
        const CMatrix col = alg_to_coords(img);
        for (std::size_t r = 0; r < col.rows(); ++r) adj_action(r, u) = col(r, 0);
      }
      sym[i * m + j].action =
          (fwd.action + adj_action) * cplx(0.5, 0.0);
    }
  return MapKernel(std::move(points), std::move(sym));
}

double MapKernel::hermiticity_defect() const {
  const std::size_t m = points_.size();
  const std::size_t dim = from().dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t u = 0; u < dim; ++u) {
        const AlgElement unit = alg_unit_element(from(), u);
        const AlgElement lhs = alg_adjoint(at(i, j).apply(unit));
        const AlgElement rhs = at(j, i).apply(alg_adjoint(unit));
        worst = std::max(worst, alg_sub(lhs, rhs).frobenius_norm());
      }
  return worst;
}

double MapKernel::frobenius_norm() const {
  double acc = 0.0;
  for (const auto &e : entries_) {
    const double f = e.action.frobenius_norm();
    acc += f * f;
  }
  return std::sqrt(acc);
}

LinMap lifted_map(const MapKernel &k) {
  const std::size_t n = k.size();
  const AlgebraShape big_from = matrix_amplification(k.from(), n);
  const AlgebraShape big_to = matrix_amplification(k.to(), n);
  LinMap lift = LinMap::zero(big_from, big_to);

  const std::size_t jcount = k.from().num_blocks();
  const std::size_t kcount = k.to().num_blocks();
  std::size_t from_off = 0;
  for (std::size_t j = 0; j < jcount; ++j) {
    const std::size_t p = k.from().block_dims[j];
    const std::size_t np = n * p;
    std::size_t small_off = 0;
    for (std::size_t jj = 0; jj < j; ++jj)
      small_off += k.from().block_dims[jj] * k.from().block_dims[jj];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t ip = 0; ip < n; ++ip)
        for (std::size_t r = 0; r < p; ++r)
          for (std::size_t rp = 0; rp < p; ++rp) {
            // unit E^n_{i,ip} (x) E^{(j)}_{r,rp} of M_n(A)
            const std::size_t unit_col =
                from_off + (i * p + r) * np + (ip * p + rp);
            const AlgElement img = k.at(i, ip).apply(
                alg_unit_element(k.from(), small_off + r * p + rp));
            // place as E^n_{i,ip} (x) img in M_n(B)
            std::size_t to_off = 0;
            for (std::size_t kk = 0; kk < kcount; ++kk) {
              const std::size_t q = k.to().block_dims[kk];
              const std::size_t nq = n * q;
              const CMatrix &blk = img.block(kk);
              for (std::size_t a = 0; a < q; ++a)
                for (std::size_t b = 0; b < q; ++b)
                  lift.action(to_off + (i * q + a) * nq + (ip * q + b),
                              unit_col) = blk(a, b);
              to_off += nq * nq;
            }
          }
    from_off += np * np;
  }
  return lift;
}

CpReport is_cpd(const MapKernel &k, const Tolerance &tol,
                std::size_t max_points) {
  if (k.size() > max_points)
    throw OpkError(ErrorCode::CapExceeded,
                   "kernel has too many points for the configured cap");
  const double herm = k.hermiticity_defect();
  const double thr = tol.threshold(1.0 + k.frobenius_norm());
  if (herm > thr) {
    std::ostringstream msg;
    msg << "kernel hermiticity defect " << herm << " exceeds " << thr;
    throw OpkError(ErrorCode::NotHermitianKernel, msg.str());
  }
  return is_cp(lifted_map(k), tol);
}

//=========================================================================
// GNS construction
//=========================================================================

/// Cap on the per-block Gram size of the GNS generator family.
inline constexpr std::size_t kMaxGnsGramSize = 4096;

GnsData gns(const MapKernel &k, const Tolerance &tol,
            std::size_t max_points) {
  const CpReport rep = is_cpd(k, tol, max_points);
  if (!rep.cp) {
    std::ostringstream msg;
    msg << "kernel is not CPD (witness eigenvalue " << rep.min_eigenvalue
        << ")";
    throw OpkError(ErrorCode::NotCPD, msg.str());
  }

  const AlgebraShape &a = k.from();
  const AlgebraShape &b = k.to();
  const std::size_t npoints = k.size();
  const std::size_t dima = a.dim();
  const std::size_t ngen = npoints * dima;  // generators a_u (x) e_s (x) 1
  for (std::size_t q : b.block_dims)
    if (ngen * q > kMaxGnsGramSize)
      throw OpkError(ErrorCode::CapExceeded,
                     "GNS generator family exceeds the configured Gram cap");

  // B-valued Gram of the generators
  std::vector<AlgElement> gram;
  gram.reserve(ngen * ngen);
  for (std::size_t g = 0; g < ngen; ++g) {
    const std::size_t s = g / dima, u = g % dima;
    const AlgElement au = alg_unit_element(a, u);
    for (std::size_t h = 0; h < ngen; ++h) {
      const std::size_t t = h / dima, w = h % dima;
      const AlgElement aw = alg_unit_element(a, w);
      gram.push_back(
          k.at(s, t).apply(alg_mul(alg_adjoint(au), aw)));
    }
  }

  const std::size_t kcount = b.num_blocks();
  HilbertModule module{b, std::vector<std::size_t>(kcount, 0)};
  std::vector<CMatrix> factors(kcount);
  for (std::size_t blk = 0; blk < kcount; ++blk) {
    const std::size_t q = b.block_dims[blk];
    CMatrix big(ngen * q, ngen * q);
    for (std::size_t g = 0; g < ngen; ++g)
      for (std::size_t h = 0; h < ngen; ++h)
        big.set_block(g * q, h * q, gram[g * ngen + h].block(blk));
    const CMatrix sym = (big + big.adjoint()) * cplx(0.5, 0.0);
    factors[blk] = psd_factor(sym, tol);
    module.ambient[blk] = factors[blk].rows();
  }

  // coordinate blocks of each generator
  auto generator_block = [&](std::size_t g, std::size_t blk) {
    const std::size_t q = b.block_dims[blk];
    return factors[blk].columns(g * q, q);
  };

  // left action: rho(e_w) sends generator (s, u) to (s, w.u)
  LeftAction action;
  action.left = a;
  action.mats.resize(kcount);
  for (std::size_t blk = 0; blk < kcount; ++blk) {
    const std::size_t q = b.block_dims[blk];
    const std::size_t r = module.ambient[blk];
    CMatrix pinv;
    if (r > 0) pinv = right_pseudo_inverse(factors[blk]);
    for (std::size_t w = 0; w < dima; ++w) {
      if (r == 0) {
        action.mats[blk].push_back(CMatrix(0, 0));
        continue;
      }
      std::size_t wb, wr, wc;
      alg_unit_position(a, w, wb, wr, wc);
      CMatrix z(r, ngen * q);
      for (std::size_t g = 0; g < ngen; ++g) {
        const std::size_t s = g / dima, u = g % dima;
        std::size_t ub, ur, uc;
        alg_unit_position(a, u, ub, ur, uc);
        if (ub != wb || wc != ur) continue;  // e_w e_u = 0
        // e_w e_u = E_{wr, uc} in block wb
        std::size_t off = 0;
        for (std::size_t jj = 0; jj < wb; ++jj)
          off += a.block_dims[jj] * a.block_dims[jj];
        const std::size_t target = s * dima + off + wr * a.block_dims[wb] + uc;
        z.set_block(0, g * q, generator_block(target, blk));
      }
      action.mats[blk].push_back(z * pinv);
    }
  }

  GnsData out;
  out.corr = Correspondence{module, std::move(action)};
  out.minimal = true;

  // cyclic map i(s) = unit (x) e_s (x) unit
  const CMatrix unit_coords = alg_to_coords(alg_unit(a));
  for (std::size_t s = 0; s < npoints; ++s) {
    ModVector vec = ModVector::zero(module);
    for (std::size_t u = 0; u < dima; ++u) {
      const cplx c = unit_coords(u, 0);
      if (c == cplx(0.0, 0.0)) continue;
      for (std::size_t blk = 0; blk < kcount; ++blk)
        vec.block(blk) += generator_block(s * dima + u, blk) * c;
    }
    out.point_map.push_back(std::move(vec));
  }

  validate_left_action(out.corr.action, module.ambient, tol);
  out.residual = gns_residual(out, k);
  return out;
}

double gns_residual(const GnsData &g, const MapKernel &k) {
  double worst = 0.0;
  const double scale = k.frobenius_norm();
  const std::size_t dima = k.from().dim();
  for (std::size_t s = 0; s < k.size(); ++s)
    for (std::size_t t = 0; t < k.size(); ++t)
      for (std::size_t u = 0; u < dima; ++u) {
        const AlgElement au = alg_unit_element(k.from(), u);
        const AlgElement got =
            inner(g.point_map[s], left_act(g.corr, au, g.point_map[t]));
        const AlgElement expect = k.at(s, t).apply(au);
        worst = std::max(worst, alg_sub(got, expect).frobenius_norm());
      }
  return worst / (1.0 + scale);
}

MapKernel schur_compose(const MapKernel &l, const MapKernel &k) {
  if (l.points() != k.points())
    throw OpkError(ErrorCode::PointSetMismatch,
                   "kernels are over different point sets");
  if (!(l.from() == k.to()))
    throw OpkError(ErrorCode::MiddleAlgebraMismatch,
                   "middle algebras differ: " + l.from().describe() + " vs " +
                       k.to().describe());
  const std::size_t m = l.size();
  std::vector<LinMap> entries;
  entries.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      entries.push_back(compose(l.at(i, j), k.at(i, j)));
  return MapKernel(l.points(), std::move(entries));
}

MapKernel kernel_from_correspondence(const Correspondence &corr,
                                     const std::vector<ModVector> &vectors,
                                     const std::vector<std::string> &points) {
  if (vectors.size() != points.size())
    throw OpkError(ErrorCode::InvalidInput, "point/vector count mismatch");
  const AlgebraShape &a = corr.action.left;
  const AlgebraShape &b = corr.module.right;
  const std::size_t dima = a.dim();
  std::vector<LinMap> entries;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < points.size(); ++j) {
      LinMap t = LinMap::zero(a, b);
      for (std::size_t u = 0; u < dima; ++u) {
        const AlgElement au = alg_unit_element(a, u);
        const CMatrix col = alg_to_coords(
            inner(vectors[i], left_act(corr, au, vectors[j])));
        for (std::size_t r = 0; r < col.rows(); ++r) t.action(r, u) = col(r, 0);
      }
      entries.push_back(std::move(t));
    }
  return MapKernel(points, std::move(entries));
}

ComposeEmbedding compose_embedding(const MapKernel &l, const MapKernel &k,
                                   const Tolerance &tol) {
  const MapKernel composed = schur_compose(l, k);
  ComposeEmbedding out;
  out.gns_composed = gns(composed, tol);
  const GnsData gk = gns(k, tol);
  const GnsData gl = gns(l, tol);
  const TensorProduct t = tensor(gk.corr, gl.corr, tol);

  const AlgebraShape &a = k.from();
  const std::size_t dima = a.dim();
  std::vector<ModVector> src, dst;
  for (std::size_t s = 0; s < composed.size(); ++s) {
    const ModVector target = t.embed(gk.point_map[s], gl.point_map[s]);
    for (std::size_t u = 0; u < dima; ++u) {
      const AlgElement au = alg_unit_element(a, u);
      src.push_back(left_act(out.gns_composed.corr, au,
                             out.gns_composed.point_map[s]));
      dst.push_back(left_act(t.corr(), au, target));
    }
  }
  out.isometry = solve_intertwiner(src, dst, &out.residual);
  out.residual = std::max(out.residual, out.isometry.isometry_defect());
  out.dim_gns = out.gns_composed.corr.module.total_ambient();
  out.dim_tensor = t.module().total_ambient();
  out.strict = out.dim_gns < out.dim_tensor;
  return out;
}

StinespringData stinespring(const MapKernel &k,
                            const std::optional<Correspondence> &f,
                            const Tolerance &tol) {
  const Correspondence rep_module =
      f ? *f : identity_representation(k.to());
  if (!(rep_module.action.left == k.to()))
    throw OpkError(ErrorCode::MiddleAlgebraMismatch,
                   "representation module does not carry B");

  const GnsData g = gns(k, tol);
  const TensorProduct t = tensor(g.corr, rep_module, tol);

  StinespringData out;
  out.h = t.corr();

  // V_s = L_{i(s)}: F -> H, y |-> i(s) (.) y
  const std::size_t ccount = rep_module.module.right.num_blocks();
  for (std::size_t s = 0; s < k.size(); ++s) {
    std::vector<CMatrix> blocks;
    for (std::size_t c = 0; c < ccount; ++c) {
      const std::size_t fc = rep_module.module.ambient[c];
      CMatrix m(t.module().ambient[c], fc);
      // column col of V_s is embed(i(s), e_col) read off the first algebra
      // column of the image block
      for (std::size_t col = 0; col < fc; ++col) {
        ModVector y = ModVector::zero(rep_module.module);
        y.block(c)(col, 0) = cplx(1.0, 0.0);
        const ModVector image = t.embed(g.point_map[s], y);
        for (std::size_t r = 0; r < m.rows(); ++r) m(r, col) = image.block(c)(r, 0);
      }
      blocks.push_back(std::move(m));
    }
    out.v.push_back(
        AdjointableOp{rep_module.module, t.module(), std::move(blocks)});
  }

  // validate V_s^* rho(a) V_t = K^{s,t}(a) as operators on F
  double worst = 0.0;
  const double scale = k.frobenius_norm();
  const std::size_t dima = k.from().dim();
  for (std::size_t s = 0; s < k.size(); ++s)
    for (std::size_t tt = 0; tt < k.size(); ++tt)
      for (std::size_t u = 0; u < dima; ++u) {
        const AlgElement au = alg_unit_element(k.from(), u);
        const AlgElement img = k.at(s, tt).apply(au);
        for (std::size_t c = 0; c < ccount; ++c) {
          const CMatrix lhs = out.v[s].blocks[c].adjoint() *
                              out.h.action.block_of(c, au) *
                              out.v[tt].blocks[c];
          const CMatrix rhs = rep_module.action.block_of(c, img);
          worst = std::max(worst, (lhs - rhs).frobenius_norm());
        }
      }
  out.residual = worst / (1.0 + scale);
  return out;
}

//=========================================================================
// phi-maps
//=========================================================================

namespace {

CMatrix value_of(const CMatrix &t_matrix, const HilbertModule &e,
                 const ModVector &x, std::size_t d1, std::size_t d2) {
  (void)e;
  return unvec(t_matrix * mod_coords(x), d2, d1);
}

}  // namespace

AdjointableOp PhiMapData::psi(const ModVector &x) const {
  // Psi(x) = L_x: K1 -> K2
  const HilbertModule &k1m = e_k1.right_factor().module;
  std::vector<CMatrix> blocks;
  const std::size_t fdim = k1m.ambient[0];
  CMatrix m(k2.ambient[0], fdim);
  for (std::size_t col = 0; col < fdim; ++col) {
    ModVector y = ModVector::zero(k1m);
    y.block(0)(col, 0) = cplx(1.0, 0.0);
    const ModVector image = e_k1.embed(x, y);
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, col) = image.block(0)(r, 0);
  }
  blocks.push_back(std::move(m));
  return AdjointableOp{k1m, k2, std::move(blocks)};
}

PhiMapData phi_map_sextuple(const HilbertModule &e, const CMatrix &t_matrix,
                            const LinMap &phi, const Tolerance &tol) {
  if (!(phi.from == e.right))
    throw OpkError(ErrorCode::ShapeMismatch, "phi domain must be E's algebra");
  if (phi.to.num_blocks() != 1)
    throw OpkError(ErrorCode::InvalidInput,
                   "phi must map into a full matrix algebra B(H1)");
  const std::size_t d1 = phi.to.block_dims[0];
  if (t_matrix.cols() != e.linear_dim() || t_matrix.rows() % d1 != 0)
    throw OpkError(ErrorCode::ShapeMismatch, "T matrix has wrong size");
  const std::size_t d2 = t_matrix.rows() / d1;

  // phi-map identity on the module basis
  const std::vector<ModVector> basis = module_basis(e);
  double defect = 0.0, scale = 1.0;
  for (const auto &x : basis)
    for (const auto &y : basis) {
      const CMatrix tx = value_of(t_matrix, e, x, d1, d2);
      const CMatrix ty = value_of(t_matrix, e, y, d1, d2);
      const CMatrix lhs = tx.adjoint() * ty;
      const CMatrix rhs = phi.apply(inner(x, y)).block(0);
      scale = std::max(scale, rhs.frobenius_norm());
      defect = std::max(defect, (lhs - rhs).frobenius_norm());
    }
  if (defect > 1e3 * tol.threshold(scale))
    throw OpkError(ErrorCode::NotPhiMap,
                   "the phi-map identity fails on the generators (defect " +
                       std::to_string(defect) + ")");

  const CpReport cp = is_cp(phi, tol);
  if (!cp.cp)
    throw OpkError(ErrorCode::NotCP, "phi is not completely positive");

  // GNS of phi: correspondence from B to B(H1), cyclic vector zeta
  const MapKernel phik({"w"}, {phi});
  const GnsData gphi = gns(phik, tol);
  const ModVector &zeta = gphi.point_map[0];

  // v: E (.) F_gns -> F with v(x (.) zeta c) = T(x) c
  const TensorProduct et = tensor_module(e, gphi.corr, tol);
  const HilbertModule f_mod{phi.to, {d2}};
  std::vector<ModVector> src, dst;
  for (const auto &x : basis) {
    for (std::size_t u = 0; u < phi.to.dim(); ++u) {
      const AlgElement cu = alg_unit_element(phi.to, u);
      src.push_back(et.embed(x, mod_right(zeta, cu)));
      const CMatrix val = value_of(t_matrix, e, x, d1, d2) * cu.block(0);
      dst.emplace_back(f_mod, std::vector<CMatrix>{val});
    }
  }
  double vres = 0.0;
  const AdjointableOp v_iso = solve_intertwiner(src, dst, &vres);
  if (vres > 1e2 * tol.threshold(1.0 + scale))
    throw OpkError(ErrorCode::NotPhiMap,
                   "the factorization v(x (.) zeta c) = T(x)c does not close");

  PhiMapData out;
  out.phi_map_defect = defect / (1.0 + scale);
  out.h1 = HilbertModule{AlgebraShape{{1}}, {d1}};
  out.h2 = HilbertModule{AlgebraShape{{1}}, {d2}};

  // K1 = F_gns (.) H1 with the Stinespring representation rho of B
  const Correspondence h1rep = identity_representation(phi.to);
  const TensorProduct k1t = tensor(gphi.corr, h1rep, tol);
  out.k1 = k1t.corr();

  // V = L_zeta: H1 -> K1
  {
    CMatrix m(k1t.module().ambient[0], d1);
    for (std::size_t col = 0; col < d1; ++col) {
      ModVector y = ModVector::zero(h1rep.module);
      y.block(0)(col, 0) = cplx(1.0, 0.0);
      const ModVector image = k1t.embed(zeta, y);
      for (std::size_t r = 0; r < m.rows(); ++r) m(r, col) = image.block(0)(r, 0);
    }
    out.v_op = AdjointableOp{out.h1, out.k1.module, {std::move(m)}};
  }

  // K2 = E (.) K1
  const TensorProduct k2t = tensor_module(e, Correspondence{k1t.module(),
                                          *k1t.action()}, tol);
  out.e_k1 = k2t;
  out.k2 = k2t.module();

  // associator alpha: E (.) (F (.) H1) -> (E (.) F) (.) H1
  const TensorProduct eth1 = tensor_module(et.module(), h1rep, tol);
  if (eth1.module().total_ambient() != out.k2.total_ambient())
    throw OpkError(ErrorCode::InternalError,
                   "associator dimensions disagree");
  std::vector<ModVector> lhs_gens, rhs_gens;
  const std::vector<ModVector> fbasis = module_basis(gphi.corr.module);
  for (const auto &x : basis)
    for (const auto &fb : fbasis)
      for (std::size_t p = 0; p < d1; ++p) {
        ModVector h = ModVector::zero(h1rep.module);
        h.block(0)(p, 0) = cplx(1.0, 0.0);
        lhs_gens.push_back(k2t.embed(x, k1t.embed(fb, h)));
        rhs_gens.push_back(eth1.embed(et.embed(x, fb), h));
      }
  double ares = 0.0;
  const AdjointableOp alpha = solve_intertwiner(lhs_gens, rhs_gens, &ares);
  if (ares > 1e2 * tol.threshold(1.0 + scale))
    throw OpkError(ErrorCode::InternalError,
                   "tensor associator failed to close on the generators");

  // W = ((v (.) id) alpha)^*: H2 -> K2
  const TensorProduct fh1 = tensor_module(f_mod, h1rep, tol);
  const AdjointableOp vlift = eth1.lift_left(v_iso, fh1);
  AdjointableOp w_adj = vlift.compose(alpha);  // K2 -> F (.) H1 = H2
  w_adj.codomain = out.h2;                     // canonical coordinates
  out.w_op = w_adj.adjoint();

  // validations
  double r1 = 0.0, r2 = 0.0;
  std::vector<AdjointableOp> psis;
  for (const auto &x : basis) psis.push_back(out.psi(x));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const CMatrix got =
        w_adj.blocks[0] * psis[i].blocks[0] * out.v_op.blocks[0];
    const CMatrix expect = value_of(t_matrix, e, basis[i], d1, d2);
    r1 = std::max(r1, (got - expect).frobenius_norm());
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const CMatrix lhs = psis[i].blocks[0].adjoint() * psis[j].blocks[0];
      const CMatrix rhs =
          out.k1.action.block_of(0, inner(basis[i], basis[j]));
      r2 = std::max(r2, (lhs - rhs).frobenius_norm());
    }
  }
  out.residual_factorization = r1 / (1.0 + scale);
  out.residual_inner = r2 / (1.0 + scale);
  out.residual_coisometry =
      (out.w_op.blocks[0] * out.w_op.blocks[0].adjoint() -
       CMatrix::identity(out.k2.ambient[0]))
          .frobenius_norm();
  return out;
}

MoritaSandwich morita_sandwich(const HilbertModule &e,
                               const Correspondence &ftilde,
                               const Tolerance &tol) {
  if (!(ftilde.action.left == compacts_shape(e)))
    throw OpkError(ErrorCode::MiddleAlgebraMismatch,
                   "correspondence is not over the operator algebra of E");
  const Correspondence edual = dual_module(e);
  const TensorProduct t1 = tensor(edual, ftilde, tol);
  const Correspondence taut = tautological_correspondence(e);
  const TensorProduct t2 = tensor(t1.corr(), taut, tol);
  return MoritaSandwich{t1, t2, t2.corr()};
}

}  // namespace opkernel
