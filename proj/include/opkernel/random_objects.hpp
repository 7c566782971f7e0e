#ifndef OPKERNEL_RANDOM_OBJECTS_HPP
#define OPKERNEL_RANDOM_OBJECTS_HPP

#include "opkernel/cpd.hpp"
#include "opkernel/kernels.hpp"
#include "opkernel/modcorr.hpp"
#include "opkernel/rng.hpp"
#include "opkernel/semigroups.hpp"

namespace opkernel {

AlgElement random_element(Rng &rng, const AlgebraShape &shape);
AlgElement random_hermitian_element(Rng &rng, const AlgebraShape &shape);
AlgElement random_positive_element(Rng &rng, const AlgebraShape &shape);

HilbertModule random_module(Rng &rng, const AlgebraShape &shape,
                            std::size_t max_ambient);
ModVector random_vector(Rng &rng, const HilbertModule &module);

/**
 * Random correspondence from `left` to `right`: multiplicities are drawn in
 * [0, max_mult] (at least one overall), the canonical representation is
 * conjugated by a random blockwise unitary.
 */
Correspondence random_correspondence(Rng &rng, const AlgebraShape &left,
                                     const AlgebraShape &right,
                                     std::size_t max_mult);

/// Random small block shape with total linear dimension <= max_dim.
AlgebraShape random_shape(Rng &rng, std::size_t max_blocks,
                          std::size_t max_block_dim, std::size_t max_dim);

/// Random PD kernel realized as the Gram kernel of random module vectors.
OpKernel random_pd_kernel(Rng &rng, std::size_t npoints,
                          const AlgebraShape &shape, std::size_t max_ambient);

std::vector<std::string> default_point_labels(std::size_t n);

/// Random CP map in Kraus form (sum over nkraus terms per block pair).
LinMap random_cp_linmap(Rng &rng, const AlgebraShape &from,
                        const AlgebraShape &to, std::size_t nkraus);

/// Random CPD kernel read off a random correspondence with random vectors.
MapKernel random_cpd_kernel(Rng &rng, std::size_t npoints,
                            const AlgebraShape &from, const AlgebraShape &to,
                            std::size_t max_mult);

/**
 * Random generator of a CP-semigroup in Lindblad form,
 * L(b) = i[h, b] + v^* b v - (v^* v b + b v^* v)/2.
 */
LinMap random_cp_generator(Rng &rng, const AlgebraShape &shape);

/// Commutator generator L(b) = i[h, b]: exp(tL) is a *-automorphism.
LinMap automorphism_generator(const AlgebraShape &shape, const AlgElement &h);

/**
 * Random hermitian conditionally positive definite scalar generator,
 * built as Gram(k_s) + beta_t + conj(beta_s).
 */
ScalarGenerator random_cond_pd_generator(Rng &rng, std::size_t npoints);

/// Hermitian generator whose hyperplane compression has a negative direction.
ScalarGenerator random_non_cond_pd_generator(Rng &rng, std::size_t npoints);

}  // namespace opkernel

#endif
