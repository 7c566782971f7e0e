#ifndef OPKERNEL_KERNELS_HPP
#define OPKERNEL_KERNELS_HPP

#include <string>
#include <vector>

#include "opkernel/modcorr.hpp"

namespace opkernel {

/// Hard cap on the number of kernel points (keeps the eigenproblems bounded).
inline constexpr std::size_t kDefaultMaxPoints = 16;

/**
 * B-valued kernel over a finite set of labelled points.  Entries are stored
 * densely, row-major in the point indices.
 */
class OpKernel {
 public:
  OpKernel() = default;
  OpKernel(std::vector<std::string> points, AlgebraShape shape,
           std::vector<AlgElement> entries);

  /// Builds a kernel and symmetrizes it: k(s,t) <- (k(s,t) + k(t,s)^*)/2.
  static OpKernel symmetrized(std::vector<std::string> points,
                              AlgebraShape shape,
                              std::vector<AlgElement> entries);

  std::size_t size() const { return points_.size(); }
  const std::vector<std::string> &points() const { return points_; }
  const AlgebraShape &shape() const { return shape_; }
  const AlgElement &at(std::size_t i, std::size_t j) const {
    return entries_[i * points_.size() + j];
  }
  double frobenius_norm() const;

 private:
  std::vector<std::string> points_;
  AlgebraShape shape_;
  std::vector<AlgElement> entries_;
};

struct PdReport {
  bool pd = false;
  bool hermitian = false;
  double min_eigenvalue = 0.0;
  std::size_t witness_block = 0;
  double asymmetry = 0.0;
  double scale = 0.0;
};

/**
 * Positive-definiteness of the kernel, decided through the per-block
 * |S| n_k x |S| n_k Gram-block matrices.  Throws NotHermitianKernel when the
 * kernel is not hermitian within tolerance.
 */
PdReport is_pd(const OpKernel &k, const Tolerance &tol = Tolerance{},
               std::size_t max_points = kDefaultMaxPoints);

/**
 * A Kolmogorov decomposition of a kernel: a module with a point map such
 * that <i(s), i(t)> = k(s, t).
 */
struct Decomposition {
  HilbertModule module;
  std::vector<ModVector> point_map;  // aligned with the kernel's points
  bool minimal = false;
};

/**
 * Minimal Kolmogorov decomposition: ambient dimensions equal the eps-rank of
 * the per-block Gram matrices.  Throws NotPD.
 */
Decomposition kolmogorov(const OpKernel &k, const Tolerance &tol = Tolerance{},
                         std::size_t max_points = kDefaultMaxPoints);

/// Reads the kernel back off a decomposition; max relative entry error.
double decomposition_residual(const Decomposition &d, const OpKernel &k);

/**
 * The unique isometry v with v i(s) = j(s) from a minimal decomposition to
 * any other decomposition of the same kernel.  Throws KernelMismatch when
 * the two decompositions do not decompose the same kernel.
 */
AdjointableOp universal_isometry(const Decomposition &from,
                                 const Decomposition &to,
                                 const Tolerance &tol = Tolerance{});

}  // namespace opkernel

#endif
