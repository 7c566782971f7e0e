#ifndef OPKERNEL_STARPOS_HPP
#define OPKERNEL_STARPOS_HPP

#include <string>
#include <vector>

#include "opkernel/algebra.hpp"

namespace opkernel {

/**
 * Abstract finite-dimensional unital *-algebra, given by structure
 * constants on a fixed linear basis:
 *   e_i e_j = sum_k mult[i][j](k), coords(a^*) = star . conj(coords(a)).
 */
struct StarAlgebra {
  std::size_t dim = 0;
  std::vector<std::vector<CMatrix>> mult;  // [i][j]: dim x 1 coordinate column
  CMatrix star;                            // dim x dim
  CMatrix unit;                            // dim x 1

  CMatrix multiply(const CMatrix &x, const CMatrix &y) const;
  CMatrix star_of(const CMatrix &x) const;
};

/// Associativity, involution, and unit laws; throws InvalidInput on failure.
void validate_star_algebra(const StarAlgebra &a,
                           const Tolerance &tol = Tolerance{});

/// The block algebra (+)_k M_{n_k} as an abstract *-algebra on matrix units.
StarAlgebra matrix_star_algebra(const AlgebraShape &shape);

/// Linear functional on a StarAlgebra, phi(a) = covector . coords(a).
struct StarFunctional {
  CMatrix covector;  // 1 x dim
};

/// The Gram matrix G[i,j] = phi(e_i^* e_j).
CMatrix functional_gram(const StarAlgebra &a, const StarFunctional &phi);

/// phi built from densities on a matrix algebra (phi(b) = sum tr(rho_k b_k)).
StarFunctional functional_from_densities(const AlgebraShape &shape,
                                         const std::vector<CMatrix> &densities);

/**
 * GNS representation of a positive functional: the quotient space G_phi,
 * the coordinate map A -> G_phi, left-multiplication matrices, and the
 * cyclic vector (the class of the unit).
 */
struct StarGnsRep {
  std::size_t dim = 0;                // dim of G_phi
  CMatrix coord_map;                  // dim x dim(A)
  std::vector<CMatrix> left_mult;     // [i]: pi(e_i), dim x dim
  CMatrix cyclic;                     // dim x 1
};

/// Throws NotPositiveFunctional when the Gram of phi is not PSD.
StarGnsRep gns_functional(const StarAlgebra &a, const StarFunctional &phi,
                          const Tolerance &tol = Tolerance{});

/// The joint representation on G = (+)_phi G_phi.
struct JointRep {
  std::vector<StarGnsRep> parts;
  std::size_t total_dim = 0;

  /// pi(a) as a block-diagonal matrix on G.
  CMatrix represent(const CMatrix &coords) const;
};

JointRep joint_representation(const StarAlgebra &a,
                              const std::vector<StarFunctional> &s,
                              const Tolerance &tol = Tolerance{});

struct SeparationReport {
  bool separated = false;
  std::size_t joint_rank = 0;
  std::vector<CMatrix> kernel_basis;  // coordinate columns killed by pi
};

/// S separates the points iff a |-> (+) pi_phi(a) is injective.
SeparationReport is_s_separated(const StarAlgebra &a,
                                const std::vector<StarFunctional> &s,
                                const Tolerance &tol = Tolerance{});

struct SPositivityReport {
  bool positive = false;
  bool hermitian = false;          // pi(b) hermitian within tolerance
  double min_eigenvalue = 0.0;
  std::size_t witness_functional = 0;
  double asymmetry = 0.0;
};

/**
 * S-positivity of b: pi(b) is PSD on every GNS space.  Non-hermitian
 * represented elements are reported (not thrown) with the asymmetry.
 */
SPositivityReport is_s_positive(const CMatrix &b_coords, const StarAlgebra &a,
                                const std::vector<StarFunctional> &s,
                                const Tolerance &tol = Tolerance{});

struct SSquareRoot {
  CMatrix beta;        // H x G with beta^* beta = pi(b)
  std::size_t h_dim = 0;
  double residual = 0.0;
};

/// Operator square root of an S-positive element; throws NotSPositive.
SSquareRoot s_square_root(const CMatrix &b_coords, const StarAlgebra &a,
                          const std::vector<StarFunctional> &s,
                          const Tolerance &tol = Tolerance{});

/**
 * CPD-kernel over S' from a *-algebra calA to (A, S): entries are linear
 * maps given by action matrices dim(A) x dim(calA) on the two bases.
 */
struct StarMapKernel {
  std::vector<std::string> points;
  std::vector<CMatrix> entries;  // row-major over point pairs

  const CMatrix &at(std::size_t i, std::size_t j) const {
    return entries[i * points.size() + j];
  }
};

struct StarKolmogorov {
  std::size_t g_dim = 0;              // dim of G
  std::size_t h_dim = 0;              // dim of H
  std::vector<CMatrix> point_ops;     // i(s): G -> H
  std::vector<CMatrix> left_action;   // [u]: action of calA basis on H
  double residual = 0.0;              // display defect on the bases
  std::size_t probe_family = 0;       // size of the S-positivity family
};

/**
 * The representation-space Kolmogorov decomposition of an S-positive
 * CPD-kernel: operators i(s): G -> H with i(s)^* a i(s') = pi(K^{s,s'}(a)).
 * Throws NotSPositiveKernel when the kernel's Gram fails S-positivity.
 */
StarKolmogorov kolmogorov_star(const StarAlgebra &cal_a,
                               const StarMapKernel &kernel,
                               const StarAlgebra &a,
                               const std::vector<StarFunctional> &s,
                               const Tolerance &tol = Tolerance{});

}  // namespace opkernel

#endif
