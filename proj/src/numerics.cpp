#include "opkernel/numerics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <sstream>

namespace opkernel {

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = cplx(1.0, 0.0);
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c)
      out(c, r) = std::conj((*this)(r, c));
  return out;
}

CMatrix CMatrix::transpose() const {
  CMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

CMatrix CMatrix::conjugate() const {
  CMatrix out(rows_, cols_);
  for (std::size_t i = 0; i < data_.size(); ++i)
    out.data_[i] = std::conj(data_[i]);
  return out;
}

static void require_same_shape(const CMatrix &a, const CMatrix &b,
                               const char *op) {
  if (!a.same_shape(b)) {
    std::ostringstream msg;
    msg << op << ": " << a.rows() << "x" << a.cols() << " vs " << b.rows()
        << "x" << b.cols();
    throw OpkError(ErrorCode::ShapeMismatch, msg.str());
  }
}

CMatrix CMatrix::operator+(const CMatrix &other) const {
  require_same_shape(*this, other, "matrix add");
  CMatrix out(*this);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += other.data_[i];
  return out;
}

CMatrix CMatrix::operator-(const CMatrix &other) const {
  require_same_shape(*this, other, "matrix sub");
  CMatrix out(*this);
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= other.data_[i];
  return out;
}

CMatrix &CMatrix::operator+=(const CMatrix &other) {
  require_same_shape(*this, other, "matrix add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

CMatrix &CMatrix::operator-=(const CMatrix &other) {
  require_same_shape(*this, other, "matrix sub");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

CMatrix CMatrix::operator*(const CMatrix &other) const {
  if (cols_ != other.rows_) {
    std::ostringstream msg;
    msg << "matrix mul: " << rows_ << "x" << cols_ << " times " << other.rows_
        << "x" << other.cols_;
    throw OpkError(ErrorCode::ShapeMismatch, msg.str());
  }
  CMatrix out(rows_, other.cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = 0; k < cols_; ++k) {
      const cplx a = (*this)(r, k);
      if (a == cplx(0.0, 0.0)) continue;
      const cplx *brow = &other.data_[k * other.cols_];
      cplx *orow = &out.data_[r * other.cols_];
      for (std::size_t c = 0; c < other.cols_; ++c) orow[c] += a * brow[c];
    }
  }
  return out;
}

CMatrix CMatrix::operator*(cplx scalar) const {
  CMatrix out(*this);
  for (auto &v : out.data_) v *= scalar;
  return out;
}

CMatrix CMatrix::columns(std::size_t begin, std::size_t count) const {
  CMatrix out(rows_, count);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = (*this)(r, begin + c);
  return out;
}

void CMatrix::set_block(std::size_t r0, std::size_t c0, const CMatrix &block) {
  for (std::size_t r = 0; r < block.rows(); ++r)
    for (std::size_t c = 0; c < block.cols(); ++c)
      (*this)(r0 + r, c0 + c) = block(r, c);
}

CMatrix CMatrix::block(std::size_t r0, std::size_t c0, std::size_t rows,
                       std::size_t cols) const {
  CMatrix out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = (*this)(r0 + r, c0 + c);
  return out;
}

double CMatrix::frobenius_norm() const {
  double acc = 0.0;
  for (const auto &v : data_) acc += std::norm(v);
  return std::sqrt(acc);
}

double CMatrix::max_abs() const {
  double m = 0.0;
  for (const auto &v : data_) m = std::max(m, std::abs(v));
  return m;
}

cplx CMatrix::trace() const {
  cplx t(0.0, 0.0);
  const std::size_t n = std::min(rows_, cols_);
  for (std::size_t i = 0; i < n; ++i) t += (*this)(i, i);
  return t;
}

bool CMatrix::is_finite() const {
  for (const auto &v : data_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

//=========================================================================
// Hermitian eigensolver: Householder tridiagonalization + implicit QL
//=========================================================================

namespace {

// Reduce the Hermitian matrix a (modified in place) to real symmetric
// tridiagonal form, accumulating the unitary into u.  On return d holds the
// diagonal and e the (real, nonnegative) subdiagonal.
void tridiagonalize(CMatrix &a, CMatrix &u, std::vector<double> &d,
                    std::vector<double> &e) {
  const std::size_t n = a.rows();
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  if (n == 0) return;

  std::vector<cplx> hv(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t m = n - k - 1;  // length of the column below row k
    double xnorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) xnorm2 += std::norm(a(k + 1 + i, k));
    const double xnorm = std::sqrt(xnorm2);
    if (xnorm == 0.0) continue;

    const cplx x0 = a(k + 1, k);
    const cplx phase =
        (x0 == cplx(0.0, 0.0)) ? cplx(1.0, 0.0) : x0 / std::abs(x0);
    const cplx alpha = -phase * xnorm;

    double unorm2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      hv[i] = a(k + 1 + i, k);
      if (i == 0) hv[i] -= alpha;
      unorm2 += std::norm(hv[i]);
    }
    if (unorm2 <= 0.0) continue;
    const double tau = 2.0 / unorm2;

    // a <- Q a Q with Q = diag(I, I - tau hv hv^*)
    for (std::size_t r = 0; r < n; ++r) {
      cplx s(0.0, 0.0);
      for (std::size_t j = 0; j < m; ++j) s += a(r, k + 1 + j) * hv[j];
      s *= tau;
      for (std::size_t j = 0; j < m; ++j)
        a(r, k + 1 + j) -= s * std::conj(hv[j]);
    }
    for (std::size_t c = 0; c < n; ++c) {
      cplx s(0.0, 0.0);
      for (std::size_t j = 0; j < m; ++j)
        s += std::conj(hv[j]) * a(k + 1 + j, c);
      s *= tau;
      for (std::size_t j = 0; j < m; ++j) a(k + 1 + j, c) -= hv[j] * s;
    }
    for (std::size_t r = 0; r < n; ++r) {
      cplx s(0.0, 0.0);
      for (std::size_t j = 0; j < m; ++j) s += u(r, k + 1 + j) * hv[j];
      s *= tau;
      for (std::size_t j = 0; j < m; ++j)
        u(r, k + 1 + j) -= s * std::conj(hv[j]);
    }
  }

  // Absorb residual off-diagonal phases into u so that the tridiagonal data
  // is real with nonnegative subdiagonal.
  cplx phi(1.0, 0.0);
  d[0] = a(0, 0).real();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const cplx t = a(i + 1, i);
    const double mag = std::abs(t);
    cplx phi_next;
    if (mag == 0.0) {
      e[i] = 0.0;
      phi_next = phi;
    } else {
      e[i] = mag;
      phi_next = t * phi / mag;
      phi_next /= std::abs(phi_next);  // keep unimodular under rounding
    }
    for (std::size_t r = 0; r < n; ++r) u(r, i + 1) *= phi_next;
    phi = phi_next;
    d[i + 1] = a(i + 1, i + 1).real();
  }
}

// Implicit-shift QL on the tridiagonal (d, e), rotations accumulated into
// the complex columns of u.  Classic tql2 recurrence.
void tql2(std::vector<double> &d, std::vector<double> &e, CMatrix &u) {
  const std::size_t n = d.size();
  if (n <= 1) return;

  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    while (true) {
      std::size_t m = l;
      while (m + 1 < n) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= DBL_EPSILON * dd) break;
        ++m;
      }
      if (m == l) break;
      if (++iter > 60)
        throw OpkError(ErrorCode::InternalError,
                       "hermitian eigensolver failed to converge");

      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
      double s = 1.0, c = 1.0, p = 0.0;

      bool underflow = false;
      for (std::size_t ii = m; ii-- > l;) {
        const std::size_t i = ii;
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;

        for (std::size_t k = 0; k < u.rows(); ++k) {
          const cplx tmp = u(k, i + 1);
          u(k, i + 1) = s * u(k, i) + c * tmp;
          u(k, i) = c * u(k, i) - s * tmp;
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

}  // namespace

EigResult eig_hermitian(const CMatrix &h, const Tolerance &tol) {
  if (h.rows() != h.cols())
    throw OpkError(ErrorCode::ShapeMismatch, "eig_hermitian requires square");
  if (!h.is_finite())
    throw OpkError(ErrorCode::NonFinite, "eig_hermitian input has NaN/Inf");

  const std::size_t n = h.rows();
  EigResult out;
  out.vectors = CMatrix::identity(n);
  if (n == 0) return out;

  const CMatrix hadj = h.adjoint();
  CMatrix sym = (h + hadj) * cplx(0.5, 0.0);
  const double asym = (h - hadj).frobenius_norm() * 0.5;

  CMatrix u = CMatrix::identity(n);
  std::vector<double> d, e;
  tridiagonalize(sym, u, d, e);
  // shift e so e[i] couples d[i], d[i+1]; tql2 wants e[n-1] spare
  std::vector<double> esub(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) esub[i] = e[i];
  tql2(d, esub, u);

  // ascending sort, stable in the original column order
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&d](std::size_t a, std::size_t b) { return d[a] < d[b]; });

  EigResult res;
  res.eigenvalues.resize(n);
  res.vectors = CMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    res.eigenvalues[j] = d[perm[j]];
    for (std::size_t r = 0; r < n; ++r) res.vectors(r, j) = u(r, perm[j]);
  }

  // phase convention: first entry of largest modulus made real nonnegative
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t best = 0;
    double bestmag = -1.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double mag = std::abs(res.vectors(r, j));
      if (mag > bestmag + 0.0) {
        // strict improvement keeps the first maximal entry
        if (mag > bestmag) {
          bestmag = mag;
          best = r;
        }
      }
    }
    if (bestmag <= 0.0) continue;
    const cplx z = res.vectors(best, j);
    const cplx scale = std::conj(z) / std::abs(z);
    for (std::size_t r = 0; r < n; ++r) res.vectors(r, j) *= scale;
  }

  double spectral = 0.0;
  for (double v : res.eigenvalues) spectral = std::max(spectral, std::abs(v));
  if (asym > tol.threshold(spectral)) {
    std::ostringstream msg;
    msg << "asymmetry " << asym << " exceeds threshold "
        << tol.threshold(spectral);
    throw OpkError(ErrorCode::NotHermitian, msg.str());
  }
  return res;
}

CMatrix psd_factor(const CMatrix &h, const Tolerance &tol) {
  const EigResult eig = eig_hermitian(h, tol);
  const std::size_t n = h.rows();
  double spectral = 0.0;
  for (double v : eig.eigenvalues) spectral = std::max(spectral, std::abs(v));
  const double thr = tol.threshold(spectral);

  if (!eig.eigenvalues.empty() && eig.eigenvalues.front() < -thr) {
    std::ostringstream msg;
    msg << "eigenvalue " << eig.eigenvalues.front() << " below -" << thr;
    throw OpkError(ErrorCode::NotPSD, msg.str());
  }

  std::size_t rank = 0;
  for (double v : eig.eigenvalues)
    if (v > thr) ++rank;

  CMatrix l(rank, n);
  std::size_t row = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (eig.eigenvalues[j] <= thr) continue;
    const double s = std::sqrt(eig.eigenvalues[j]);
    for (std::size_t c = 0; c < n; ++c)
      l(row, c) = s * std::conj(eig.vectors(c, j));
    ++row;
  }
  return l;
}

CMatrix kron(const CMatrix &a, const CMatrix &b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ra = 0; ra < a.rows(); ++ra)
    for (std::size_t ca = 0; ca < a.cols(); ++ca) {
      const cplx v = a(ra, ca);
      if (v == cplx(0.0, 0.0)) continue;
      for (std::size_t rb = 0; rb < b.rows(); ++rb)
        for (std::size_t cb = 0; cb < b.cols(); ++cb)
          out(ra * b.rows() + rb, ca * b.cols() + cb) = v * b(rb, cb);
    }
  return out;
}

CMatrix vec(const CMatrix &a) {
  CMatrix out(a.rows() * a.cols(), 1);
  for (std::size_t i = 0; i < a.size(); ++i) out(i, 0) = a.data()[i];
  return out;
}

CMatrix unvec(const CMatrix &v, std::size_t rows, std::size_t cols) {
  if (v.cols() != 1 || v.rows() != rows * cols)
    throw OpkError(ErrorCode::ShapeMismatch, "unvec: size mismatch");
  CMatrix out(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) out.data()[i] = v(i, 0);
  return out;
}

CMatrix solve_lu(CMatrix a, CMatrix b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n)
    throw OpkError(ErrorCode::ShapeMismatch, "solve_lu: size mismatch");

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(a(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      const double v = std::abs(a(r, k));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0)
      throw OpkError(ErrorCode::InternalError, "solve_lu: singular matrix");
    if (piv != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(piv, c));
      for (std::size_t c = 0; c < b.cols(); ++c) std::swap(b(k, c), b(piv, c));
    }
    const cplx inv = cplx(1.0, 0.0) / a(k, k);
    for (std::size_t r = k + 1; r < n; ++r) {
      const cplx f = a(r, k) * inv;
      if (f == cplx(0.0, 0.0)) continue;
      for (std::size_t c = k; c < n; ++c) a(r, c) -= f * a(k, c);
      for (std::size_t c = 0; c < b.cols(); ++c) b(r, c) -= f * b(k, c);
    }
  }
  // back substitution
  for (std::size_t kk = n; kk-- > 0;) {
    const cplx inv = cplx(1.0, 0.0) / a(kk, kk);
    for (std::size_t c = 0; c < b.cols(); ++c) {
      cplx acc = b(kk, c);
      for (std::size_t j = kk + 1; j < n; ++j) acc -= a(kk, j) * b(j, c);
      b(kk, c) = acc * inv;
    }
  }
  return b;
}

CMatrix solve_hpd(CMatrix a, CMatrix b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n)
    throw OpkError(ErrorCode::ShapeMismatch, "solve_hpd: size mismatch");

  // in-place Cholesky a = L L^*
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j).real();
    for (std::size_t k = 0; k < j; ++k) diag -= std::norm(a(j, k));
    if (diag <= 0.0)
      throw OpkError(ErrorCode::InternalError,
                     "solve_hpd: matrix not positive definite");
    const double ljj = std::sqrt(diag);
    a(j, j) = ljj;
    for (std::size_t r = j + 1; r < n; ++r) {
      cplx acc = a(r, j);
      for (std::size_t k = 0; k < j; ++k)
        acc -= a(r, k) * std::conj(a(j, k));
      a(r, j) = acc / ljj;
    }
  }
  // forward solve L y = b
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < b.cols(); ++c) {
      cplx acc = b(r, c);
      for (std::size_t k = 0; k < r; ++k) acc -= a(r, k) * b(k, c);
      b(r, c) = acc / a(r, r).real();
    }
  }
  // back solve L^* x = y
  for (std::size_t rr = n; rr-- > 0;) {
    for (std::size_t c = 0; c < b.cols(); ++c) {
      cplx acc = b(rr, c);
      for (std::size_t k = rr + 1; k < n; ++k)
        acc -= std::conj(a(k, rr)) * b(k, c);
      b(rr, c) = acc / a(rr, rr).real();
    }
  }
  return b;
}

CMatrix right_pseudo_inverse(const CMatrix &m) {
  // M^+ = M^* (M M^*)^{-1}; requires full row rank
  const CMatrix gram = m * m.adjoint();
  const CMatrix inv = solve_hpd(gram, CMatrix::identity(gram.rows()));
  return m.adjoint() * inv;
}

CMatrix expm(const CMatrix &a) {
  const std::size_t n = a.rows();
  if (a.cols() != n)
    throw OpkError(ErrorCode::ShapeMismatch, "expm requires square");
  if (n == 0) return CMatrix();

  double norm1 = 0.0;  // max column sum
  for (std::size_t c = 0; c < n; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += std::abs(a(r, c));
    norm1 = std::max(norm1, s);
  }
  const double theta13 = 5.371920351148152;
  int squarings = 0;
  if (norm1 > theta13)
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));

  CMatrix x = a * cplx(std::ldexp(1.0, -squarings), 0.0);

  static const double b[] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};

  const CMatrix eye = CMatrix::identity(n);
  const CMatrix x2 = x * x;
  const CMatrix x4 = x2 * x2;
  const CMatrix x6 = x4 * x2;

  CMatrix u_in = x6 * cplx(b[13], 0) + x4 * cplx(b[11], 0) + x2 * cplx(b[9], 0);
  CMatrix u = x * (x6 * u_in + x6 * cplx(b[7], 0) + x4 * cplx(b[5], 0) +
                   x2 * cplx(b[3], 0) + eye * cplx(b[1], 0));
  CMatrix v_in = x6 * cplx(b[12], 0) + x4 * cplx(b[10], 0) + x2 * cplx(b[8], 0);
  CMatrix v = x6 * v_in + x6 * cplx(b[6], 0) + x4 * cplx(b[4], 0) +
              x2 * cplx(b[2], 0) + eye * cplx(b[0], 0);

  CMatrix r = solve_lu(v - u, v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

CMatrix hcat(const std::vector<CMatrix> &parts) {
  if (parts.empty()) return CMatrix();
  std::size_t cols = 0;
  for (const auto &p : parts) {
    if (p.rows() != parts.front().rows())
      throw OpkError(ErrorCode::ShapeMismatch, "hcat: row count mismatch");
    cols += p.cols();
  }
  CMatrix out(parts.front().rows(), cols);
  std::size_t off = 0;
  for (const auto &p : parts) {
    out.set_block(0, off, p);
    off += p.cols();
  }
  return out;
}

}  // namespace opkernel
