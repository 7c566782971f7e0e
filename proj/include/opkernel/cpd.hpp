#ifndef OPKERNEL_CPD_HPP
#define OPKERNEL_CPD_HPP

#include <optional>
#include <string>
#include <vector>

#include "opkernel/kernels.hpp"
#include "opkernel/modcorr.hpp"

namespace opkernel {

/**
 * Linear map between block algebras, stored as its action matrix on
 * matrix-unit coordinates: coords(T(a)) = action * coords(a).
 */
struct LinMap {
  AlgebraShape from;
  AlgebraShape to;
  CMatrix action;  // to.dim() x from.dim()

  AlgElement apply(const AlgElement &a) const;
  static LinMap identity(const AlgebraShape &shape);
  static LinMap zero(const AlgebraShape &from, const AlgebraShape &to);
};

/// l after k (pointwise composition of the action matrices).
LinMap compose(const LinMap &l, const LinMap &k);
LinMap linmap_add(const LinMap &a, const LinMap &b);
LinMap linmap_scale(cplx s, const LinMap &a);
/// max over the unit basis of ||T(u^*) - T(u)^*||.
double hermiticity_defect(const LinMap &t);

/**
 * Choi matrices of T, one block per (from-block j, to-block k) pair in
 * row-major (j, k) order: C_{jk} = sum_{i,l} E_il (x) T_{jk}(E_il).
 */
std::vector<CMatrix> choi(const LinMap &t);
LinMap choi_inverse(const AlgebraShape &from, const AlgebraShape &to,
                    const std::vector<CMatrix> &blocks);

struct CpReport {
  bool cp = false;
  bool hermitian = false;
  double min_eigenvalue = 0.0;
  std::size_t witness_block = 0;  // flat (j,k) Choi block index
  double asymmetry = 0.0;
  double scale = 0.0;
};

/// Complete positivity through PSD-ness of every Choi block.
CpReport is_cp(const LinMap &t, const Tolerance &tol = Tolerance{});

/// Kernel of linear maps A -> B over a finite point set.
class MapKernel {
 public:
  MapKernel() = default;
  MapKernel(std::vector<std::string> points, std::vector<LinMap> entries);

  /// Symmetrizes on ingestion: K(s,t)(a) <- (K(s,t)(a) + K(t,s)(a^*)^*)/2.
  static MapKernel symmetrized(std::vector<std::string> points,
                               std::vector<LinMap> entries);

  std::size_t size() const { return points_.size(); }
  const std::vector<std::string> &points() const { return points_; }
  const AlgebraShape &from() const { return entries_.front().from; }
  const AlgebraShape &to() const { return entries_.front().to; }
  const LinMap &at(std::size_t i, std::size_t j) const {
    return entries_[i * points_.size() + j];
  }

  double hermiticity_defect() const;
  double frobenius_norm() const;

 private:
  std::vector<std::string> points_;
  std::vector<LinMap> entries_;
};

/// The lifted map K^(n): M_n(A) -> M_n(B), n = |S|.
LinMap lifted_map(const MapKernel &k);

/**
 * Complete positive definiteness, decided through complete positivity of
 * the lifted map.  Throws NotHermitianKernel on a non-hermitian kernel.
 */
CpReport is_cpd(const MapKernel &k, const Tolerance &tol = Tolerance{},
                std::size_t max_points = kDefaultMaxPoints);

/**
 * GNS data of a CPD-kernel: a correspondence from A to B with a cyclic map
 * such that <i(s), a.i(t)> = K^{s,t}(a).
 */
struct GnsData {
  Correspondence corr;
  std::vector<ModVector> point_map;
  bool minimal = false;
  double residual = 0.0;  // reconstruction defect on the unit basis
};

GnsData gns(const MapKernel &k, const Tolerance &tol = Tolerance{},
            std::size_t max_points = kDefaultMaxPoints);

/// Reads the kernel back off GNS data; max relative basis-entry error.
double gns_residual(const GnsData &g, const MapKernel &k);

/// Schur product (L o K)^{s,t} = L^{s,t} o K^{s,t}.
MapKernel schur_compose(const MapKernel &l, const MapKernel &k);

/// The kernel K^{s,t}(a) = <i(s), a.i(t)> read off a correspondence.
MapKernel kernel_from_correspondence(const Correspondence &corr,
                                     const std::vector<ModVector> &vectors,
                                     const std::vector<std::string> &points);

struct ComposeEmbedding {
  GnsData gns_composed;       // GNS(L o K)
  AdjointableOp isometry;     // GNS(L o K) -> GNS(K) (.) GNS(L)
  double residual = 0.0;
  std::size_t dim_gns = 0;    // total ambient of GNS(L o K)
  std::size_t dim_tensor = 0; // total ambient of the tensor product
  bool strict = false;        // some block is strictly smaller
};

/**
 * The canonical isometric bimodule embedding of GNS(L o K) into
 * GNS(K) (.) GNS(L), sending the cyclic vector of s to i(s) (.) j(s).
 */
ComposeEmbedding compose_embedding(const MapKernel &l, const MapKernel &k,
                                   const Tolerance &tol = Tolerance{});

struct StinespringData {
  Correspondence h;                 // GNS(K) (.) F, carries rho as left action
  std::vector<AdjointableOp> v;     // V_s: F -> H
  double residual = 0.0;            // identity defect on the unit basis
};

/**
 * Stinespring/KSGNS dilation of a CPD-kernel through a representation
 * module F of B; with no F supplied, the identity representation of B on
 * (+)_k C^{n_k} is used.
 */
StinespringData stinespring(const MapKernel &k,
                            const std::optional<Correspondence> &f =
                                std::nullopt,
                            const Tolerance &tol = Tolerance{});

struct PhiMapData {
  Correspondence k1;          // correspondence from B to scalars, carries rho
  HilbertModule k2;
  AdjointableOp v_op;         // V = L_zeta: H1 -> K1
  AdjointableOp w_op;         // W: H2 -> K2 (coisometry)
  TensorProduct e_k1;         // E (.) K1, used to form Psi(x) = L_x
  HilbertModule h1;           // C^{d1} as a module over the scalars
  HilbertModule h2;           // C^{d2}
  double phi_map_defect = 0.0;
  double residual_factorization = 0.0;  // W^* Psi(x) V vs T(x)
  double residual_inner = 0.0;          // Psi(x)^* Psi(x') vs rho(<x,x'>)
  double residual_coisometry = 0.0;     // W W^* vs id
  AdjointableOp psi(const ModVector &x) const;  // Psi(x): K1 -> K2
};

/**
 * The dilation sextuple of a phi-map T: E -> Hom(H1, H2).  T is given by
 * its matrix on linear coordinates (rows = coordinates of the d2 x d1
 * value, row-major).  Throws NotPhiMap when <T(x), T(x')> deviates from
 * phi(<x,x'>) on the basis, NotCP when phi is not completely positive.
 */
PhiMapData phi_map_sextuple(const HilbertModule &e, const CMatrix &t_matrix,
                            const LinMap &phi,
                            const Tolerance &tol = Tolerance{});

struct MoritaSandwich {
  TensorProduct dual_tensor;   // E^* (.) Ftilde
  TensorProduct full_tensor;   // (E^* (.) Ftilde) (.) E
  Correspondence result;       // correspondence over B
};

/**
 * Tensor-sandwich E^* (.) Ftilde (.) E of a correspondence Ftilde over the
 * operator algebra of E, yielding a correspondence over B.
 */
MoritaSandwich morita_sandwich(const HilbertModule &e,
                               const Correspondence &ftilde,
                               const Tolerance &tol = Tolerance{});

}  // namespace opkernel

#endif
