#ifndef OPKERNEL_SEMIGROUPS_HPP
#define OPKERNEL_SEMIGROUPS_HPP

#include <string>
#include <vector>

#include "opkernel/cpd.hpp"

namespace opkernel {

/// Default geometric time grid 2^-6 .. 2^4.
std::vector<double> default_time_grid();

/// Cap on the truncated symmetric Fock dimension.
inline constexpr std::size_t kDefaultSymDimCap = 50000;
/// Default exponential-series truncation degree.
inline constexpr std::size_t kDefaultFockTruncation = 20;

/**
 * Hermitian generator of a Schur semigroup of scalar kernels: an |S| x |S|
 * complex matrix with l(s,t) = conj(l(t,s)).
 */
struct ScalarGenerator {
  std::vector<std::string> points;
  CMatrix matrix;
};

struct CondPdReport {
  bool cond_pd = false;
  bool hermitian = false;
  double min_eigenvalue = 0.0;  // of the hyperplane compression
  double asymmetry = 0.0;
};

/**
 * Conditional positive definiteness: the compression of the generator to
 * the hyperplane {z : sum z_i = 0} is PSD.  Throws NotHermitian.
 */
CondPdReport is_cond_pd(const ScalarGenerator &gen,
                        const Tolerance &tol = Tolerance{});

/**
 * Schoenberg normalization data: shifts beta with beta(base) real such that
 * the shifted generator has zero base row/column and is PSD, together with
 * the scalar Kolmogorov decomposition (K, i) of the shifted generator.
 */
struct SchoenbergData {
  ScalarGenerator generator;
  std::size_t base_index = 0;
  std::vector<cplx> shifts;
  CMatrix normalized;          // ltilde, exact zeros in the base row/column
  Decomposition one_particle;  // scalar Kolmogorov decomposition of ltilde
};

SchoenbergData schoenberg_normalize(const ScalarGenerator &gen,
                                    std::size_t base_index,
                                    const Tolerance &tol = Tolerance{});

/// Entrywise exponential exp(t * l); t >= 0.
CMatrix schur_exp(const ScalarGenerator &gen, double t);

/// Wraps a scalar matrix as an OpKernel over the one-dimensional algebra.
OpKernel scalar_kernel(const std::vector<std::string> &points,
                       const CMatrix &matrix);

struct FockReport {
  double time = 0.0;
  std::size_t truncation = 0;
  std::size_t fock_dim = 0;
  double max_error = 0.0;       // max |V_n - exp(t l)| over pairs
  double tail_bound = 0.0;      // analytic bound (prefactors included)
  bool within_bound = false;
};

/**
 * Materializes the truncated symmetric Fock space over the one-particle
 * space, builds truncated exponential vectors for f_s = sqrt(t) i(s), and
 * compares the normalized inner products against the Schur exponential.
 * Throws TruncationInsufficient when the observed error exceeds the tail
 * bound plus tolerance, or when the Fock dimension would exceed the cap.
 */
FockReport fock_exponential_check(const SchoenbergData &sd, double t,
                                  std::size_t truncation = kDefaultFockTruncation,
                                  const Tolerance &tol = Tolerance{},
                                  std::size_t sym_dim_cap = kDefaultSymDimCap);

struct SubproductReport {
  double s = 0.0, t = 0.0;
  bool cp_at_s = false, cp_at_t = false, cp_at_sum = false;
  double unit_residual = 0.0;    // <xi_s (.) xi_t, a (xi_s (.) xi_t)> vs T_{s+t}(a)
  double embed_residual = 0.0;   // GNS(T_{s+t}) -> GNS(T_s) (.) GNS(T_t)
  std::size_t dim_s = 0, dim_t = 0, dim_sum = 0, dim_tensor = 0;
  bool embedding_unitary = false;
};

/**
 * One-parameter subproduct check for a CP-semigroup generator L on B:
 * validates CP-ness of exp(uL) at u = s, t, s+t (NotCPAtTime otherwise),
 * the unit relation on the probe basis, and the canonical embedding of
 * GNS(T_{s+t}) into GNS(T_s) (.) GNS(T_t).
 */
SubproductReport subproduct_check(const LinMap &generator, double s, double t,
                                  const Tolerance &tol = Tolerance{});

/// exp(t L) as a map on the generator's algebra.
LinMap semigroup_at(const LinMap &generator, double t);

struct CpdSemigroupReport {
  double s = 0.0, t = 0.0;
  bool cpd_at_s = false, cpd_at_t = false, cpd_at_sum = false;
  double unit_residual = 0.0;  // worst over all point pairs
  double embed_residual = 0.0;
  std::size_t dim_s = 0, dim_t = 0, dim_sum = 0, dim_tensor = 0;
};

/**
 * Multi-point version: the generator kernel is exponentiated entrywise in
 * the Schur-composition sense, T_t^{s,s'} = exp(t L^{s,s'}), and the unit
 * relations are verified for every pair of points.  NotCPDAtTime when a
 * grid kernel fails is_cpd.
 */
CpdSemigroupReport cpd_semigroup_check(const MapKernel &generator, double s,
                                       double t,
                                       const Tolerance &tol = Tolerance{});

/// The kernel T_t of the CPD-semigroup generated by `generator`.
MapKernel cpd_semigroup_at(const MapKernel &generator, double t);

}  // namespace opkernel

#endif
