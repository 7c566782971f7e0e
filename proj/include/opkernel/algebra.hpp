#ifndef OPKERNEL_ALGEBRA_HPP
#define OPKERNEL_ALGEBRA_HPP

#include <string>
#include <vector>

#include "opkernel/numerics.hpp"

namespace opkernel {

/**
 * Shape of a finite-dimensional C*-algebra: a direct sum of full matrix
 * blocks M_{n1} (+) ... (+) M_{nK}.
 */
struct AlgebraShape {
  std::vector<std::size_t> block_dims;

  std::size_t num_blocks() const { return block_dims.size(); }

  /// Linear dimension, sum of n_k^2.
  std::size_t dim() const {
    std::size_t d = 0;
    for (std::size_t n : block_dims) d += n * n;
    return d;
  }

  bool operator==(const AlgebraShape &other) const = default;
  std::string describe() const;
};

/// An element of the block algebra: one square matrix per block.
class AlgElement {
 public:
  AlgElement() = default;
  AlgElement(AlgebraShape shape, std::vector<CMatrix> blocks);

  static AlgElement zero(const AlgebraShape &shape);
  static AlgElement unit(const AlgebraShape &shape);

  const AlgebraShape &shape() const { return shape_; }
  const std::vector<CMatrix> &blocks() const { return blocks_; }
  const CMatrix &block(std::size_t k) const { return blocks_[k]; }
  CMatrix &block(std::size_t k) { return blocks_[k]; }

  double frobenius_norm() const;

 private:
  AlgebraShape shape_;
  std::vector<CMatrix> blocks_;
};

AlgElement alg_mul(const AlgElement &a, const AlgElement &b);
AlgElement alg_add(const AlgElement &a, const AlgElement &b);
AlgElement alg_sub(const AlgElement &a, const AlgElement &b);
AlgElement alg_scale(cplx s, const AlgElement &a);
AlgElement alg_adjoint(const AlgElement &a);
AlgElement alg_unit(const AlgebraShape &shape);

struct PositivityReport {
  bool positive = false;
  bool hermitian = false;
  double min_eigenvalue = 0.0;   // most negative eigenvalue seen
  std::size_t witness_block = 0;  // block where it occurred
  double asymmetry = 0.0;         // Frobenius norm of the skew part
};

/**
 * Spectral positivity test: every block Hermitian within tolerance with all
 * eigenvalues >= -threshold.  Never throws; a non-Hermitian element reports
 * positive=false with the asymmetry as witness.
 */
PositivityReport is_positive(const AlgElement &a,
                             const Tolerance &tol = Tolerance{});

/// Canonical positive square root via spectral calculus; throws NotPositive.
AlgElement sqrt_positive(const AlgElement &a, const Tolerance &tol = Tolerance{});

/**
 * Positive linear functional represented by a density tuple:
 * phi(b) = sum_k trace(rho_k b_k).  phi is positive iff every rho_k is PSD.
 */
struct Functional {
  AlgebraShape shape;
  std::vector<CMatrix> densities;
};

cplx functional_apply(const Functional &phi, const AlgElement &b);

/// Validates block sizes and PSD densities; throws on failure.
void validate_functional(const Functional &phi, const Tolerance &tol = Tolerance{});

//=========================================================================
// Matrix-unit coordinates
//=========================================================================
// The basis of the algebra is the matrix units of each block, blocks in
// order, units row-major within a block: index = offset_k + i*n_k + j.

/// Coordinates of an element as a dim()x1 column.
CMatrix alg_to_coords(const AlgElement &a);
AlgElement alg_from_coords(const AlgebraShape &shape, const CMatrix &coords);
/// The basis element with the given flat unit index.
AlgElement alg_unit_element(const AlgebraShape &shape, std::size_t index);
/// (block, row, col) of a flat unit index.
void alg_unit_position(const AlgebraShape &shape, std::size_t index,
                       std::size_t &block, std::size_t &row, std::size_t &col);

}  // namespace opkernel

#endif
