#include "opkernel/starpos.hpp"

#include <cmath>
#include <sstream>

namespace opkernel {

CMatrix StarAlgebra::multiply(const CMatrix &x, const CMatrix &y) const {
  if (x.rows() != dim || y.rows() != dim || x.cols() != 1 || y.cols() != 1)
    throw OpkError(ErrorCode::ShapeMismatch, "coordinate size mismatch");
  CMatrix out(dim, 1);
  for (std::size_t i = 0; i < dim; ++i) {
    const cplx xi = x(i, 0);
    if (xi == cplx(0.0, 0.0)) continue;
    for (std::size_t j = 0; j < dim; ++j) {
      const cplx c = xi * y(j, 0);
      if (c == cplx(0.0, 0.0)) continue;
      for (std::size_t k = 0; k < dim; ++k) out(k, 0) += c * mult[i][j](k, 0);
    }
  }
  return out;
}

CMatrix StarAlgebra::star_of(const CMatrix &x) const {
  return star * x.conjugate();
}

void validate_star_algebra(const StarAlgebra &a, const Tolerance &tol) {
  if (a.dim == 0 || a.mult.size() != a.dim)
    throw OpkError(ErrorCode::InvalidInput, "structure constants missing");
  for (const auto &row : a.mult) {
    if (row.size() != a.dim)
      throw OpkError(ErrorCode::InvalidInput, "structure constants missing");
    for (const auto &col : row)
      if (col.rows() != a.dim || col.cols() != 1)
        throw OpkError(ErrorCode::InvalidInput, "structure constant shape");
  }
  if (a.star.rows() != a.dim || a.star.cols() != a.dim ||
      a.unit.rows() != a.dim || a.unit.cols() != 1)
    throw OpkError(ErrorCode::InvalidInput, "star/unit shape mismatch");

  double scale = 1.0;
  for (const auto &row : a.mult)
    for (const auto &col : row) scale = std::max(scale, col.frobenius_norm());
  const double thr = tol.threshold(scale) * 10.0;

  auto basis = [&](std::size_t i) {
    CMatrix e(a.dim, 1);
    e(i, 0) = cplx(1.0, 0.0);
    return e;
  };

  // associativity on basis triples
  for (std::size_t i = 0; i < a.dim; ++i)
    for (std::size_t j = 0; j < a.dim; ++j) {
      const CMatrix eij = a.mult[i][j];
      for (std::size_t k = 0; k < a.dim; ++k) {
        const CMatrix lhs = a.multiply(eij, basis(k));
        const CMatrix rhs = a.multiply(basis(i), a.mult[j][k]);
        if ((lhs - rhs).frobenius_norm() > thr)
          throw OpkError(ErrorCode::InvalidInput,
                         "product is not associative on basis triples");
      }
    }
  // unit
  for (std::size_t i = 0; i < a.dim; ++i) {
    if ((a.multiply(a.unit, basis(i)) - basis(i)).frobenius_norm() > thr ||
        (a.multiply(basis(i), a.unit) - basis(i)).frobenius_norm() > thr)
      throw OpkError(ErrorCode::InvalidInput, "unit does not act as identity");
  }
  // involution: a** = a and (e_i e_j)* = e_j* e_i*
  for (std::size_t i = 0; i < a.dim; ++i) {
    if ((a.star_of(a.star_of(basis(i))) - basis(i)).frobenius_norm() > thr)
      throw OpkError(ErrorCode::InvalidInput, "involution does not square to id");
    for (std::size_t j = 0; j < a.dim; ++j) {
      const CMatrix lhs = a.star_of(a.mult[i][j]);
      const CMatrix rhs = a.multiply(a.star_of(basis(j)), a.star_of(basis(i)));
      if ((lhs - rhs).frobenius_norm() > thr)
        throw OpkError(ErrorCode::InvalidInput,
                       "involution is not an antihomomorphism");
    }
  }
}

StarAlgebra matrix_star_algebra(const AlgebraShape &shape) {
  StarAlgebra out;
  out.dim = shape.dim();
  out.mult.assign(out.dim, std::vector<CMatrix>(out.dim, CMatrix(out.dim, 1)));
  out.star = CMatrix(out.dim, out.dim);
  out.unit = alg_to_coords(alg_unit(shape));
  for (std::size_t i = 0; i < out.dim; ++i) {
    std::size_t bi, ri, ci;
    alg_unit_position(shape, i, bi, ri, ci);
    std::size_t off = 0;
    for (std::size_t k = 0; k < bi; ++k)
      off += shape.block_dims[k] * shape.block_dims[k];
    // E_{ri,ci}^* = E_{ci,ri}
    out.star(off + ci * shape.block_dims[bi] + ri, i) = cplx(1.0, 0.0);
    for (std::size_t j = 0; j < out.dim; ++j) {
      std::size_t bj, rj, cj;
      alg_unit_position(shape, j, bj, rj, cj);
      if (bi != bj || ci != rj) continue;
      out.mult[i][j](off + ri * shape.block_dims[bi] + cj, 0) = cplx(1.0, 0.0);
    }
  }
  return out;
}

CMatrix functional_gram(const StarAlgebra &a, const StarFunctional &phi) {
  CMatrix gram(a.dim, a.dim);
  auto basis = [&](std::size_t i) {
    CMatrix e(a.dim, 1);
    e(i, 0) = cplx(1.0, 0.0);
    return e;
  };
  for (std::size_t i = 0; i < a.dim; ++i) {
    const CMatrix istar = a.star_of(basis(i));
    for (std::size_t j = 0; j < a.dim; ++j) {
      const CMatrix prod = a.multiply(istar, basis(j));
      cplx value(0.0, 0.0);
      for (std::size_t k = 0; k < a.dim; ++k)
        value += phi.covector(0, k) * prod(k, 0);
      gram(i, j) = value;
    }
  }
  return gram;
}

StarFunctional functional_from_densities(const AlgebraShape &shape,
                                         const std::vector<CMatrix> &densities) {
  StarFunctional phi;
  phi.covector = CMatrix(1, shape.dim());
  for (std::size_t u = 0; u < shape.dim(); ++u) {
    std::size_t blk, row, col;
    alg_unit_position(shape, u, blk, row, col);
    phi.covector(0, u) = densities[blk](col, row);  // tr(rho E_{row,col})
  }
  return phi;
}

StarGnsRep gns_functional(const StarAlgebra &a, const StarFunctional &phi,
                          const Tolerance &tol) {
  const CMatrix gram = functional_gram(a, phi);
  const CMatrix sym = (gram + gram.adjoint()) * cplx(0.5, 0.0);
  const double herm_defect = (gram - gram.adjoint()).frobenius_norm() * 0.5;
  CMatrix factor;
  try {
    factor = psd_factor(sym, tol);
  } catch (const OpkError &) {
    throw OpkError(ErrorCode::NotPositiveFunctional,
                   "functional Gram matrix is not PSD");
  }
  if (herm_defect > tol.threshold(1.0 + gram.frobenius_norm()))
    throw OpkError(ErrorCode::NotPositiveFunctional,
                   "functional Gram matrix is not hermitian");

  StarGnsRep rep;
  rep.dim = factor.rows();
  rep.coord_map = factor;
  rep.cyclic = factor * a.unit;

  CMatrix pinv;
  if (rep.dim > 0) pinv = right_pseudo_inverse(factor);
  for (std::size_t i = 0; i < a.dim; ++i) {
    if (rep.dim == 0) {
      rep.left_mult.push_back(CMatrix(0, 0));
      continue;
    }
    // pi(e_i) [e_j] = [e_i e_j]
    CMatrix target(rep.dim, a.dim);
    for (std::size_t j = 0; j < a.dim; ++j) {
      const CMatrix col = factor * a.mult[i][j];
      for (std::size_t r = 0; r < rep.dim; ++r) target(r, j) = col(r, 0);
    }
    rep.left_mult.push_back(target * pinv);
  }
  return rep;
}

CMatrix JointRep::represent(const CMatrix &coords) const {
  CMatrix out(total_dim, total_dim);
  std::size_t off = 0;
  for (const auto &part : parts) {
    CMatrix blk(part.dim, part.dim);
    for (std::size_t i = 0; i < coords.rows(); ++i) {
      const cplx c = coords(i, 0);
      if (c == cplx(0.0, 0.0)) continue;
      blk += part.left_mult[i] * c;
    }
    out.set_block(off, off, blk);
    off += part.dim;
  }
  return out;
}

JointRep joint_representation(const StarAlgebra &a,
                              const std::vector<StarFunctional> &s,
                              const Tolerance &tol) {
  JointRep joint;
  for (const auto &phi : s) {
    joint.parts.push_back(gns_functional(a, phi, tol));
    joint.total_dim += joint.parts.back().dim;
  }
  return joint;
}

SeparationReport is_s_separated(const StarAlgebra &a,
                                const std::vector<StarFunctional> &s,
                                const Tolerance &tol) {
  const JointRep joint = joint_representation(a, s, tol);
  std::size_t rows = 0;
  for (const auto &part : joint.parts) rows += part.dim * part.dim;

  CMatrix stacked(rows == 0 ? 1 : rows, a.dim);
  std::size_t off = 0;
  for (const auto &part : joint.parts) {
    for (std::size_t i = 0; i < a.dim; ++i) {
      const CMatrix v = vec(part.left_mult[i]);
      for (std::size_t r = 0; r < v.rows(); ++r) stacked(off + r, i) = v(r, 0);
    }
    off += part.dim * part.dim;
  }

  const CMatrix gram = stacked.adjoint() * stacked;
  const EigResult eig = eig_hermitian(gram, tol);
  double spectral = 0.0;
  for (double v : eig.eigenvalues) spectral = std::max(spectral, std::abs(v));
  const double thr = tol.threshold(spectral);

  SeparationReport rep;
  for (std::size_t j = 0; j < a.dim; ++j) {
    if (eig.eigenvalues[j] <= thr) {
      CMatrix basis_vec(a.dim, 1);
      for (std::size_t r = 0; r < a.dim; ++r)
        basis_vec(r, 0) = eig.vectors(r, j);
      rep.kernel_basis.push_back(std::move(basis_vec));
    } else {
      ++rep.joint_rank;
    }
  }
  rep.separated = rep.joint_rank == a.dim;
  return rep;
}

SPositivityReport is_s_positive(const CMatrix &b_coords, const StarAlgebra &a,
                                const std::vector<StarFunctional> &s,
                                const Tolerance &tol) {
  const JointRep joint = joint_representation(a, s, tol);
  SPositivityReport rep;
  rep.hermitian = true;
  rep.positive = true;
  for (std::size_t which = 0; which < joint.parts.size(); ++which) {
    const StarGnsRep &part = joint.parts[which];
    if (part.dim == 0) continue;
    CMatrix m(part.dim, part.dim);
    for (std::size_t i = 0; i < a.dim; ++i) {
      const cplx c = b_coords(i, 0);
      if (c == cplx(0.0, 0.0)) continue;
      m += part.left_mult[i] * c;
    }
    const CMatrix sym = (m + m.adjoint()) * cplx(0.5, 0.0);
    const double asym = (m - m.adjoint()).frobenius_norm() * 0.5;
    const EigResult eig = eig_hermitian(sym, tol);
    double spectral = 0.0;
    for (double v : eig.eigenvalues) spectral = std::max(spectral, std::abs(v));
    const double thr = tol.threshold(spectral);
    if (asym > thr * 10.0) {
      rep.hermitian = false;
      rep.positive = false;
      if (asym > rep.asymmetry) {
        rep.asymmetry = asym;
        rep.witness_functional = which;
      }
      continue;
    }
    if (eig.eigenvalues.front() < rep.min_eigenvalue) {
      rep.min_eigenvalue = eig.eigenvalues.front();
      rep.witness_functional = which;
    }
    if (eig.eigenvalues.front() < -thr) rep.positive = false;
  }
  return rep;
}

SSquareRoot s_square_root(const CMatrix &b_coords, const StarAlgebra &a,
                          const std::vector<StarFunctional> &s,
                          const Tolerance &tol) {
  const SPositivityReport rep = is_s_positive(b_coords, a, s, tol);
  if (!rep.positive) {
    std::ostringstream msg;
    msg << "element is not S-positive (witness " << rep.min_eigenvalue
        << " at functional " << rep.witness_functional << ")";
    throw OpkError(ErrorCode::NotSPositive, msg.str());
  }
  const JointRep joint = joint_representation(a, s, tol);
  const CMatrix pib = joint.represent(b_coords);
  const CMatrix sym = (pib + pib.adjoint()) * cplx(0.5, 0.0);
  SSquareRoot out;
  out.beta = psd_factor(sym, tol);
  out.h_dim = out.beta.rows();
  out.residual = (out.beta.adjoint() * out.beta - pib).frobenius_norm() /
                 (1.0 + pib.frobenius_norm());
  return out;
}

StarKolmogorov kolmogorov_star(const StarAlgebra &cal_a,
                               const StarMapKernel &kernel,
                               const StarAlgebra &a,
                               const std::vector<StarFunctional> &s,
                               const Tolerance &tol) {
  const std::size_t npoints = kernel.points.size();
  if (npoints == 0 || kernel.entries.size() != npoints * npoints)
    throw OpkError(ErrorCode::InvalidInput, "kernel entry count mismatch");
  for (const auto &e : kernel.entries)
    if (e.rows() != a.dim || e.cols() != cal_a.dim)
      throw OpkError(ErrorCode::ShapeMismatch, "kernel action matrix size");

  const JointRep joint = joint_representation(a, s, tol);
  const std::size_t g = joint.total_dim;
  const std::size_t ngen = npoints * cal_a.dim;

  auto cal_basis = [&](std::size_t u) {
    CMatrix e(cal_a.dim, 1);
    e(u, 0) = cplx(1.0, 0.0);
    return e;
  };

  // Gram on the generators (e_u (x) e_s) (.) gamma_p of (calA (x) S (x) A) (.) G
  CMatrix big(ngen * g, ngen * g);
  for (std::size_t gidx = 0; gidx < ngen; ++gidx) {
    const std::size_t sp = gidx / cal_a.dim, u = gidx % cal_a.dim;
    const CMatrix ustar = cal_a.star_of(cal_basis(u));
    for (std::size_t hidx = 0; hidx < ngen; ++hidx) {
      const std::size_t tp = hidx / cal_a.dim, w = hidx % cal_a.dim;
      const CMatrix prod = cal_a.multiply(ustar, cal_basis(w));
      const CMatrix value = kernel.at(sp, tp) * prod;  // coords in A
      big.set_block(gidx * g, hidx * g, joint.represent(value));
    }
  }

  const CMatrix sym = (big + big.adjoint()) * cplx(0.5, 0.0);
  CMatrix factor;
  try {
    factor = psd_factor(sym, tol);
  } catch (const OpkError &err) {
    throw OpkError(ErrorCode::NotSPositiveKernel,
                   std::string("the kernel Gram fails S-positivity (") +
                       err.what() + ")");
  }

  StarKolmogorov out;
  out.g_dim = g;
  out.h_dim = factor.rows();
  out.probe_family = ngen * g;

  auto slice = [&](std::size_t gidx) { return factor.columns(gidx * g, g); };

  for (std::size_t sp = 0; sp < npoints; ++sp) {
    CMatrix op(out.h_dim, g);
    for (std::size_t u = 0; u < cal_a.dim; ++u) {
      const cplx c = cal_a.unit(u, 0);
      if (c == cplx(0.0, 0.0)) continue;
      op += slice(sp * cal_a.dim + u) * c;
    }
    out.point_ops.push_back(std::move(op));
  }

  // left action of calA on H
  CMatrix pinv;
  if (out.h_dim > 0) pinv = right_pseudo_inverse(factor);
  for (std::size_t w = 0; w < cal_a.dim; ++w) {
    if (out.h_dim == 0) {
      out.left_action.push_back(CMatrix(0, 0));
      continue;
    }
    CMatrix target(out.h_dim, ngen * g);
    for (std::size_t gidx = 0; gidx < ngen; ++gidx) {
      const std::size_t sp = gidx / cal_a.dim, u = gidx % cal_a.dim;
      const CMatrix wu = cal_a.multiply(cal_basis(w), cal_basis(u));
      CMatrix dst(out.h_dim, g);
      for (std::size_t x = 0; x < cal_a.dim; ++x) {
        const cplx c = wu(x, 0);
        if (c == cplx(0.0, 0.0)) continue;
        dst += slice(sp * cal_a.dim + x) * c;
      }
      target.set_block(0, gidx * g, dst);
    }
    out.left_action.push_back(target * pinv);
  }

  // display: i(s)^* a i(s') = pi(K^{s,s'}(a)) on the basis of calA
  double worst = 0.0, scale = 1.0;
  for (std::size_t sp = 0; sp < npoints; ++sp)
    for (std::size_t tp = 0; tp < npoints; ++tp)
      for (std::size_t u = 0; u < cal_a.dim; ++u) {
        const CMatrix lhs = out.point_ops[sp].adjoint() *
                            out.left_action[u] * out.point_ops[tp];
        const CMatrix rhs = joint.represent(kernel.at(sp, tp) * cal_basis(u));
        scale = std::max(scale, rhs.frobenius_norm());
        worst = std::max(worst, (lhs - rhs).frobenius_norm());
      }
  out.residual = worst / (1.0 + scale);
  return out;
}

}  // namespace opkernel
