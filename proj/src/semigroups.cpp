#include "opkernel/semigroups.hpp"

#include <cmath>
#include <sstream>

namespace opkernel {

std::vector<double> default_time_grid() {
  std::vector<double> grid;
  for (int p = -6; p <= 4; ++p) grid.push_back(std::ldexp(1.0, p));
  return grid;
}

namespace {

void require_square_gen(const ScalarGenerator &gen) {
  const std::size_t m = gen.points.size();
  if (m == 0 || gen.matrix.rows() != m || gen.matrix.cols() != m)
    throw OpkError(ErrorCode::InvalidInput,
                   "generator matrix does not match the point set");
}

}  // namespace

CondPdReport is_cond_pd(const ScalarGenerator &gen, const Tolerance &tol) {
  require_square_gen(gen);
  const std::size_t m = gen.points.size();

  CondPdReport rep;
  rep.asymmetry =
      (gen.matrix - gen.matrix.adjoint()).frobenius_norm() * 0.5;
  const double scale = gen.matrix.frobenius_norm();
  rep.hermitian = rep.asymmetry <= tol.threshold(1.0 + scale);
  if (!rep.hermitian)
    throw OpkError(ErrorCode::NotHermitian,
                   "generator is not hermitian (defect " +
                       std::to_string(rep.asymmetry) + ")");

  if (m == 1) {
    rep.cond_pd = true;
    return rep;
  }

  // orthonormal basis of {z : sum z_i = 0}: columns 1..m-1 of the
  // Householder reflection mapping e_0 to the normalized all-ones vector
  CMatrix h = CMatrix::identity(m);
  {
    CMatrix v(m, 1);
    const double inv = 1.0 / std::sqrt(static_cast<double>(m));
    v(0, 0) = 1.0 - inv;
    for (std::size_t i = 1; i < m; ++i) v(i, 0) = -inv;
    double vnorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) vnorm2 += std::norm(v(i, 0));
    if (vnorm2 > 0.0)
      h = h - v * v.adjoint() * cplx(2.0 / vnorm2, 0.0);
  }
  const CMatrix q = h.columns(1, m - 1);
  const CMatrix comp = q.adjoint() * gen.matrix * q;
  const CMatrix sym = (comp + comp.adjoint()) * cplx(0.5, 0.0);
  const EigResult eig = eig_hermitian(sym, tol);
  double spectral = 0.0;
  for (double v : eig.eigenvalues) spectral = std::max(spectral, std::abs(v));
  rep.min_eigenvalue = eig.eigenvalues.front();
  rep.cond_pd = rep.min_eigenvalue >= -tol.threshold(spectral);
  return rep;
}

SchoenbergData schoenberg_normalize(const ScalarGenerator &gen,
                                    std::size_t base_index,
                                    const Tolerance &tol) {
  require_square_gen(gen);
  const std::size_t m = gen.points.size();
  if (base_index >= m)
    throw OpkError(ErrorCode::InvalidInput, "base point index out of range");

  const CondPdReport rep = is_cond_pd(gen, tol);
  if (!rep.cond_pd)
    throw OpkError(ErrorCode::NotCondPD,
                   "generator is not conditionally positive definite "
                   "(compressed eigenvalue " +
                       std::to_string(rep.min_eigenvalue) + ")");

  SchoenbergData out;
  out.generator = gen;
  out.base_index = base_index;
  out.shifts.assign(m, cplx(0.0, 0.0));
  out.shifts[base_index] = -0.5 * gen.matrix(base_index, base_index).real();
  for (std::size_t s = 0; s < m; ++s) {
    if (s == base_index) continue;
    out.shifts[s] =
        -gen.matrix(base_index, s) - std::conj(out.shifts[base_index]);
  }

  out.normalized = CMatrix(m, m);
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t t = 0; t < m; ++t) {
      if (s == base_index || t == base_index) continue;  // exact zeros
      out.normalized(s, t) = gen.matrix(s, t) + out.shifts[t] +
                             std::conj(out.shifts[s]);
    }

  const OpKernel ltilde = scalar_kernel(gen.points, out.normalized);
  const PdReport pd = is_pd(ltilde, tol, m);
  if (!pd.pd)
    throw OpkError(ErrorCode::NormalizationNotPSD,
                   "normalized generator is not PSD (eigenvalue " +
                       std::to_string(pd.min_eigenvalue) + ")");
  out.one_particle = kolmogorov(ltilde, tol, m);
  // i(base) = 0 exactly
  out.one_particle.point_map[base_index] =
      ModVector::zero(out.one_particle.module);
  return out;
}

CMatrix schur_exp(const ScalarGenerator &gen, double t) {
  require_square_gen(gen);
  if (t < 0.0)
    throw OpkError(ErrorCode::InvalidInput, "schur_exp requires t >= 0");
  CMatrix out(gen.matrix.rows(), gen.matrix.cols());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = std::exp(gen.matrix.data()[i] * t);
  return out;
}

OpKernel scalar_kernel(const std::vector<std::string> &points,
                       const CMatrix &matrix) {
  const AlgebraShape scalar{{1}};
  std::vector<AlgElement> entries;
  entries.reserve(points.size() * points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < points.size(); ++j) {
      CMatrix v(1, 1);
      v(0, 0) = matrix(i, j);
      entries.emplace_back(scalar, std::vector<CMatrix>{v});
    }
  return OpKernel(points, scalar, std::move(entries));
}

namespace {

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t out = 1;
  for (std::size_t i = 0; i < k; ++i) out = out * (n - i) / (i + 1);
  return out;
}

// occupation vectors of total degree m over r modes, lexicographic
void enumerate_occupations(std::size_t r, std::size_t m,
                           std::vector<std::size_t> &current,
                           std::vector<std::vector<std::size_t>> &out) {
  if (current.size() + 1 == r) {
    current.push_back(m);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (std::size_t take = 0; take <= m; ++take) {
    current.push_back(take);
    enumerate_occupations(r, m - take, current, out);
    current.pop_back();
  }
}

double tail_sum(double x, std::size_t n) {
  // sum_{m > n} x^m / m!
  if (!(x >= 0.0)) return 0.0;
  double term = 1.0;
  for (std::size_t m = 1; m <= n + 1; ++m) {
    term *= x / static_cast<double>(m);
    if (!std::isfinite(term)) return term;
  }
  double acc = term;  // m = n+1
  for (std::size_t m = n + 2; m < n + 4000; ++m) {
    term *= x / static_cast<double>(m);
    acc += term;
    if (!std::isfinite(acc)) return acc;
    if (term < acc * 1e-18 && term < 1e-280) break;
  }
  return acc;
}

}  // namespace

FockReport fock_exponential_check(const SchoenbergData &sd, double t,
                                  std::size_t truncation, const Tolerance &tol,
                                  std::size_t sym_dim_cap) {
  if (t < 0.0)
    throw OpkError(ErrorCode::InvalidInput, "fock check requires t >= 0");
  const std::size_t m = sd.generator.points.size();
  const std::size_t r = sd.one_particle.module.ambient[0];

  FockReport rep;
  rep.time = t;
  rep.truncation = truncation;

  std::size_t fock_dim = 0;
  for (std::size_t deg = 0; deg <= truncation; ++deg) {
    fock_dim += r == 0 ? (deg == 0 ? 1 : 0) : binomial(r + deg - 1, deg);
    if (fock_dim > sym_dim_cap) {
      std::ostringstream msg;
      msg << "truncated Fock dimension exceeds the cap of " << sym_dim_cap;
      throw OpkError(ErrorCode::TruncationInsufficient, msg.str());
    }
  }
  rep.fock_dim = fock_dim;

  // exponential vectors psi_n(f_s), f_s = sqrt(t) i(s), in the occupation
  // basis e_alpha with coordinates prod f^alpha / sqrt(alpha!)
  const double sqrt_t = std::sqrt(t);
  std::vector<std::vector<cplx>> psi(m, std::vector<cplx>(fock_dim, cplx()));
  std::vector<double> fnorm(m, 0.0);
  {
    std::vector<std::vector<std::size_t>> occupations;
    for (std::size_t deg = 0; deg <= truncation && r > 0; ++deg) {
      std::vector<std::size_t> current;
      enumerate_occupations(r, deg, current, occupations);
    }
    for (std::size_t s = 0; s < m; ++s) {
      std::vector<cplx> f(r);
      double norm2 = 0.0;
      for (std::size_t i = 0; i < r; ++i) {
        f[i] = sqrt_t * sd.one_particle.point_map[s].block(0)(i, 0);
        norm2 += std::norm(f[i]);
      }
      fnorm[s] = std::sqrt(norm2);
      if (r == 0) {
        psi[s][0] = 1.0;  // vacuum only
        continue;
      }
      for (std::size_t idx = 0; idx < occupations.size(); ++idx) {
        cplx value(1.0, 0.0);
        double fact = 1.0;
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t p = 0; p < occupations[idx][i]; ++p)
            value *= f[i];
          for (std::size_t p = 2; p <= occupations[idx][i]; ++p)
            fact *= static_cast<double>(p);
        }
        psi[s][idx] = value / std::sqrt(fact);
      }
    }
  }

  const CMatrix target = schur_exp(sd.generator, t);
  double scale = target.max_abs();
  double worst_err = 0.0, worst_bound = 0.0;
  bool ok = true;
  for (std::size_t s = 0; s < m; ++s)
    for (std::size_t u = 0; u < m; ++u) {
      cplx dot(0.0, 0.0);
      for (std::size_t idx = 0; idx < fock_dim; ++idx)
        dot += std::conj(psi[s][idx]) * psi[u][idx];
      const cplx pre_l = std::exp(-std::conj(sd.shifts[s]) * t);
      const cplx pre_r = std::exp(-sd.shifts[u] * t);
      const cplx value = pre_l * dot * pre_r;
      const double err = std::abs(value - target(s, u));
      const double bound = std::abs(pre_l) * std::abs(pre_r) *
                           tail_sum(fnorm[s] * fnorm[u], truncation);
      worst_err = std::max(worst_err, err);
      worst_bound = std::max(worst_bound, bound);
      if (err > bound + 1e-12 * (1.0 + scale)) ok = false;
    }

  rep.max_error = worst_err;
  rep.tail_bound = worst_bound;
  rep.within_bound = ok;
  if (!ok) {
    std::ostringstream msg;
    msg << "observed error " << worst_err << " exceeds the tail bound "
        << worst_bound << " at truncation " << truncation;
    throw OpkError(ErrorCode::TruncationInsufficient, msg.str());
  }
  (void)tol;
  return rep;
}

//=========================================================================
// Semigroup checks
//=========================================================================

LinMap semigroup_at(const LinMap &generator, double t) {
  if (!(generator.from == generator.to))
    throw OpkError(ErrorCode::ShapeMismatch,
                   "semigroup generator must be an endomap");
  return LinMap{generator.from, generator.to,
                expm(generator.action * cplx(t, 0.0))};
}

SubproductReport subproduct_check(const LinMap &generator, double s, double t,
                                  const Tolerance &tol) {
  if (s < 0.0 || t < 0.0)
    throw OpkError(ErrorCode::InvalidInput, "times must be nonnegative");
  const AlgebraShape &b = generator.from;

  SubproductReport rep;
  rep.s = s;
  rep.t = t;
  const LinMap ts = semigroup_at(generator, s);
  const LinMap tt = semigroup_at(generator, t);
  const LinMap tsum = semigroup_at(generator, s + t);
  rep.cp_at_s = is_cp(ts, tol).cp;
  rep.cp_at_t = is_cp(tt, tol).cp;
  rep.cp_at_sum = is_cp(tsum, tol).cp;
  if (!rep.cp_at_s || !rep.cp_at_t || !rep.cp_at_sum) {
    std::ostringstream msg;
    msg << "exp(uL) fails complete positivity at u in {" << s << ", " << t
        << ", " << s + t << "}";
    throw OpkError(ErrorCode::NotCPAtTime, msg.str());
  }

  const MapKernel ks({"w"}, {ts});
  const MapKernel kt({"w"}, {tt});
  const GnsData gs = gns(ks, tol);
  const GnsData gt = gns(kt, tol);
  const TensorProduct prod = tensor(gs.corr, gt.corr, tol);
  const ModVector unit = prod.embed(gs.point_map[0], gt.point_map[0]);

  double worst = 0.0, scale = 1.0;
  for (std::size_t u = 0; u < b.dim(); ++u) {
    const AlgElement a = alg_unit_element(b, u);
    const AlgElement lhs = inner(unit, left_act(prod.corr(), a, unit));
    const AlgElement rhs = tsum.apply(a);
    scale = std::max(scale, rhs.frobenius_norm());
    worst = std::max(worst, alg_sub(lhs, rhs).frobenius_norm());
  }
  rep.unit_residual = worst / (1.0 + scale);

  const ComposeEmbedding emb = compose_embedding(kt, ks, tol);
  rep.embed_residual = emb.residual;
  rep.dim_s = gs.corr.module.total_ambient();
  rep.dim_t = gt.corr.module.total_ambient();
  rep.dim_sum = emb.dim_gns;
  rep.dim_tensor = emb.dim_tensor;
  const AdjointableOp vv = emb.isometry.compose(emb.isometry.adjoint());
  double defect = 0.0;
  for (std::size_t k = 0; k < vv.blocks.size(); ++k)
    defect = std::max(defect, (vv.blocks[k] -
                               CMatrix::identity(vv.blocks[k].rows()))
                                  .frobenius_norm());
  rep.embedding_unitary = defect < 1e-8 && rep.dim_sum == rep.dim_tensor;
  return rep;
}

MapKernel cpd_semigroup_at(const MapKernel &generator, double t) {
  const std::size_t m = generator.size();
  std::vector<LinMap> entries;
  entries.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      entries.push_back(semigroup_at(generator.at(i, j), t));
  return MapKernel(generator.points(), std::move(entries));
}

CpdSemigroupReport cpd_semigroup_check(const MapKernel &generator, double s,
                                       double t, const Tolerance &tol) {
  if (s < 0.0 || t < 0.0)
    throw OpkError(ErrorCode::InvalidInput, "times must be nonnegative");
  const AlgebraShape &b = generator.from();
  const std::size_t m = generator.size();

  CpdSemigroupReport rep;
  rep.s = s;
  rep.t = t;
  const MapKernel ks = cpd_semigroup_at(generator, s);
  const MapKernel kt = cpd_semigroup_at(generator, t);
  const MapKernel ksum = cpd_semigroup_at(generator, s + t);
  rep.cpd_at_s = is_cpd(ks, tol).cp;
  rep.cpd_at_t = is_cpd(kt, tol).cp;
  rep.cpd_at_sum = is_cpd(ksum, tol).cp;
  if (!rep.cpd_at_s || !rep.cpd_at_t || !rep.cpd_at_sum) {
    std::ostringstream msg;
    msg << "the exponentiated kernel fails CPD at a grid time (s=" << s
        << ", t=" << t << ")";
    throw OpkError(ErrorCode::NotCPDAtTime, msg.str());
  }

  const GnsData gs = gns(ks, tol);
  const GnsData gt = gns(kt, tol);
  const TensorProduct prod = tensor(gs.corr, gt.corr, tol);

  double worst = 0.0, scale = 1.0;
  for (std::size_t p = 0; p < m; ++p)
    for (std::size_t q = 0; q < m; ++q) {
      const ModVector up = prod.embed(gs.point_map[p], gt.point_map[p]);
      const ModVector uq = prod.embed(gs.point_map[q], gt.point_map[q]);
      for (std::size_t u = 0; u < b.dim(); ++u) {
        const AlgElement a = alg_unit_element(b, u);
        const AlgElement lhs = inner(up, left_act(prod.corr(), a, uq));
        const AlgElement rhs = ksum.at(p, q).apply(a);
        scale = std::max(scale, rhs.frobenius_norm());
        worst = std::max(worst, alg_sub(lhs, rhs).frobenius_norm());
      }
    }
  rep.unit_residual = worst / (1.0 + scale);

  const ComposeEmbedding emb = compose_embedding(kt, ks, tol);
  rep.embed_residual = emb.residual;
  rep.dim_s = gs.corr.module.total_ambient();
  rep.dim_t = gt.corr.module.total_ambient();
  rep.dim_sum = emb.dim_gns;
  rep.dim_tensor = emb.dim_tensor;
  return rep;
}

}  // namespace opkernel
