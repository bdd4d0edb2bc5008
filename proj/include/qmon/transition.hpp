#pragma once

#include <span>
#include <vector>

#include "qmon/hilbert.hpp"
#include "qmon/types.hpp"

namespace qmon {

// Transition matrix of the measurement-induced Markov chain,
// L[k][l] = |<alpha_k| exp(-iH tau) |alpha_l>|^2, together with its
// symmetric eigendecomposition.
struct TransitionMatrix {
  int dim = 0;
  double tau = 0.0;
  RMat matrix;
  RVec spectrum;   // descending, spectrum(0) = 1
  RMat eigenbasis; // columns match spectrum order

  void validate() const;
};

// U(tau) = exp(-i H tau) in the ambient basis.
Mat propagator(const HermitianOperator& hamiltonian, double tau);

TransitionMatrix transition_matrix(const QuantumSystem& sys, double tau);

// L written in the observable eigenbasis without the spectral cache
// (used where only the matrix is needed).
RMat transition_matrix_raw(const QuantumSystem& sys, double tau);

// Ordered product of transition matrices (first factor applied first, i.e.
// result = Ls[last] * ... * Ls[0]). Row/column sums drift by at most
// M * stoch tolerance; the actual deviation is available via
// stochastic_deviation.
RMat chain_product(std::span<const TransitionMatrix> ls);

// L^M through the eigendecomposition; exact up to eigensolver error for any
// power.
RMat matrix_power(const TransitionMatrix& l, long long m);

// Max deviation of any row or column sum from 1.
double stochastic_deviation(const RMat& a);

struct FixedPoint {
  int multiplicity = 0;       // eigenvalues within the degeneracy window of +1
  RMat projector;             // onto the lambda = +1 eigenspace
  int neg_multiplicity = 0;   // eigenvalues within the window of -1
  RMat neg_projector;         // onto the lambda = -1 eigenspace (zero if none)
};

FixedPoint fixed_point(const TransitionMatrix& l);

// Invariant-subspace structure shared by H and the observable: connected
// components of the support graph of L(tau) over the sampled taus (the
// provided list plus a fixed set of 8 pseudo-random values that guards
// against accidental zeros at special taus).
BlockStructure block_decompose(const QuantumSystem& sys, std::span<const double> taus);

// Assign each energy eigenvector to the block supporting it; throws
// BlockMismatch if any eigenvector has weight > 1e-8 outside its block.
std::vector<int> energy_block_labels(const BlockStructure& blocks,
                                     const QuantumSystem& sys);

}  // namespace qmon
