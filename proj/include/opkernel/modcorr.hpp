#ifndef OPKERNEL_MODCORR_HPP
#define OPKERNEL_MODCORR_HPP

#include <optional>
#include <vector>

#include "opkernel/algebra.hpp"

namespace opkernel {

/**
 * Concrete Hilbert module over B = M_{n1} (+) ... (+) M_{nK}: the space
 * (+)_k Hom(C^{n_k}, C^{d_k}) with inner product <x,y>_k = x_k^* y_k and
 * right action (x b)_k = x_k b_k.  Ambient dimensions d_k may be zero.
 */
struct HilbertModule {
  AlgebraShape right;
  std::vector<std::size_t> ambient;

  /// Linear dimension sum_k d_k * n_k.
  std::size_t linear_dim() const {
    std::size_t d = 0;
    for (std::size_t k = 0; k < ambient.size(); ++k)
      d += ambient[k] * right.block_dims[k];
    return d;
  }
  /// Total ambient dimension sum_k d_k.
  std::size_t total_ambient() const {
    std::size_t d = 0;
    for (std::size_t a : ambient) d += a;
    return d;
  }
  bool operator==(const HilbertModule &other) const = default;
};

class ModVector {
 public:
  ModVector() = default;
  ModVector(HilbertModule module, std::vector<CMatrix> blocks);

  static ModVector zero(const HilbertModule &module);

  const HilbertModule &module() const { return module_; }
  const std::vector<CMatrix> &blocks() const { return blocks_; }
  const CMatrix &block(std::size_t k) const { return blocks_[k]; }
  CMatrix &block(std::size_t k) { return blocks_[k]; }

  double norm() const;

 private:
  HilbertModule module_;
  std::vector<CMatrix> blocks_;
};

/// B-valued inner product <x,y>_k = x_k^* y_k.
AlgElement inner(const ModVector &x, const ModVector &y);

ModVector mod_add(const ModVector &x, const ModVector &y);
ModVector mod_sub(const ModVector &x, const ModVector &y);
ModVector mod_scale(cplx s, const ModVector &x);
/// Right module action x.b.
ModVector mod_right(const ModVector &x, const AlgElement &b);

/// Linear coordinates of a vector (blocks vectorized row-major, stacked).
CMatrix mod_coords(const ModVector &x);
ModVector mod_from_coords(const HilbertModule &module, const CMatrix &coords);
/// The standard linear basis of the module (unit coordinates).
std::vector<ModVector> module_basis(const HilbertModule &module);

/**
 * Left action of an algebra A on the ambient spaces of a module over B:
 * for each B-block k and each matrix-unit index u of A, a d_k x d_k matrix.
 */
struct LeftAction {
  AlgebraShape left;
  std::vector<std::vector<CMatrix>> mats;  // [B-block k][A-unit u]

  CMatrix block_of(std::size_t k, const AlgElement &a) const;
};

struct Correspondence {
  HilbertModule module;
  LeftAction action;
};

/// a.x computed through the left action.
ModVector left_act(const Correspondence &corr, const AlgElement &a,
                   const ModVector &x);

/**
 * Checks that the left action is a unital *-homomorphism within tolerance.
 * Throws NotRepresentation / NotNondegenerate.
 */
void validate_left_action(const LeftAction &action,
                          const std::vector<std::size_t> &ambient,
                          const Tolerance &tol = Tolerance{});

/// Blockwise operator between modules over the same algebra.
struct AdjointableOp {
  HilbertModule domain;
  HilbertModule codomain;
  std::vector<CMatrix> blocks;  // [k]: codomain.ambient[k] x domain.ambient[k]

  static AdjointableOp identity(const HilbertModule &m);
  ModVector apply(const ModVector &x) const;
  AdjointableOp adjoint() const;
  AdjointableOp compose(const AdjointableOp &inner) const;  // this after inner
  /// max_k ||(this^* this - I)_k||, isometry defect on the domain.
  double isometry_defect() const;
};

//=========================================================================
// Constructions
//=========================================================================

struct Submodule {
  HilbertModule module;          // minimal ambient
  AdjointableOp inclusion;       // isometry: module -> original
  std::vector<ModVector> coords; // generators re-coordinatized
};

/**
 * Minimal re-coordinatization of the right submodule generated by the given
 * vectors: ambient dims become the per-block column-space ranks of the
 * stacked generators; inner products are preserved.
 */
Submodule submodule_from_generators(const std::vector<ModVector> &gens,
                                    const Tolerance &tol = Tolerance{});

/// The algebra of (compact = adjointable) operators on E: blocks M_{d_k}.
AlgebraShape compacts_shape(const HilbertModule &e);

/**
 * The dual correspondence E^* from B to K(E): vectors are adjoints
 * x^*, with K(E)-valued inner product <x^*, y^*> = x y^* and left action
 * b.x^* = (x b^*)^*.
 */
Correspondence dual_module(const HilbertModule &e);
ModVector dual_vector(const HilbertModule &e, const ModVector &x);

/// Linking algebra blocks M_{n_k + d_k} with corner embedding.
AlgebraShape linking_shape(const HilbertModule &e);
/**
 * Embeds (b, x^*, y, a) as the 2x2 corner matrix [[b, x^*], [y, a]] per
 * block; b over B, a over K(E), x and y in E.
 */
AlgElement linking_embed(const HilbertModule &e, const AlgElement &b,
                         const ModVector &x, const ModVector &y,
                         const AlgElement &a);

HilbertModule direct_sum(const std::vector<HilbertModule> &parts);
/// Embeds a vector of part `which` into the direct sum.
ModVector direct_sum_embed(const std::vector<HilbertModule> &parts,
                           std::size_t which, const ModVector &x);

/// n-fold amplification M_n(B): blocks n*n_k.
AlgebraShape matrix_amplification(const AlgebraShape &shape, std::size_t n);
/// Embeds an n x n array of B-elements as an element of M_n(B).
AlgElement amplification_embed(const AlgebraShape &shape, std::size_t n,
                               const std::vector<AlgElement> &entries);

/// Row space E_n: a module over M_n(B) with <X,Y>_{ij} = <x_i, y_j>.
HilbertModule row_space(const HilbertModule &e, std::size_t n);
ModVector row_vector(const HilbertModule &e,
                     const std::vector<ModVector> &xs);
HilbertModule column_space(const HilbertModule &e, std::size_t n);

//=========================================================================
// Representation decomposition and tensor product
//=========================================================================

/**
 * Decomposition of a nondegenerate *-representation of A = (+)_j M_{p_j} on
 * the ambient spaces: W_k rho_k(a) W_k^* = (+)_j (a_j tensor I_{m_{j,k}}).
 */
struct RepDecomposition {
  std::vector<std::vector<std::size_t>> mult;  // [k][j] = m_{j,k}
  std::vector<CMatrix> w;                      // [k] unitary d_k x d_k
};

RepDecomposition decompose_rep(const LeftAction &action,
                               const std::vector<std::size_t> &ambient,
                               const Tolerance &tol = Tolerance{});

/**
 * Tensor product E (.) F over B of a module E over B (with an optional left
 * action of A) and a correspondence F from B to C.  The result is a module
 * over C spanned by the elementary tensors embed(x, y), with
 * <x (.) y, x' (.) y'> = <y, <x,x'> y'> and a(x (.) y) = (ax) (.) y.
 */
class TensorProduct {
 public:
  TensorProduct() = default;  // empty; assign before use
  TensorProduct(HilbertModule e, std::optional<LeftAction> e_action,
                Correspondence f, const Tolerance &tol = Tolerance{});

  const HilbertModule &module() const { return result_; }
  /// Left action of A on the result (present iff E carried one).
  const std::optional<LeftAction> &action() const { return result_action_; }
  Correspondence corr() const;

  ModVector embed(const ModVector &x, const ModVector &y) const;

  const HilbertModule &left_factor() const { return e_; }
  const Correspondence &right_factor() const { return f_; }
  const RepDecomposition &decomposition() const { return dec_; }

  /**
   * Lifts an operator t: E -> E2 over B to t (.) id: E (.) F -> E2 (.) F.
   * `dst` must be a tensor with the same right factor F.
   */
  AdjointableOp lift_left(const AdjointableOp &t,
                          const TensorProduct &dst) const;

 private:
  HilbertModule e_;
  std::optional<LeftAction> e_action_;
  Correspondence f_;
  RepDecomposition dec_;
  HilbertModule result_;
  std::optional<LeftAction> result_action_;
  // per C-block c and B-block k: row offset of the kth slice in the result
  std::vector<std::vector<std::size_t>> offsets_;
};

TensorProduct tensor(const Correspondence &e, const Correspondence &f,
                     const Tolerance &tol = Tolerance{});
TensorProduct tensor_module(const HilbertModule &e, const Correspondence &f,
                            const Tolerance &tol = Tolerance{});

/// B as the trivial correspondence over itself (identity left action).
Correspondence trivial_correspondence(const AlgebraShape &shape);

/**
 * The identity representation of B on (+)_k C^{n_k}: a correspondence from
 * B to the scalars (a Hilbert space carrying B).
 */
Correspondence identity_representation(const AlgebraShape &shape);

/// Tautological correspondence: E with K(E) acting blockwise on the left.
Correspondence tautological_correspondence(const HilbertModule &e);

/**
 * Builds the operator mapping the column stack of `from_gens` to the column
 * stack of `to_gens` by least squares (the source family must span its
 * module).  Used for universal-property isometries.
 */
AdjointableOp solve_intertwiner(const std::vector<ModVector> &from_gens,
                                const std::vector<ModVector> &to_gens,
                                double *residual_out = nullptr);

}  // namespace opkernel

#endif
