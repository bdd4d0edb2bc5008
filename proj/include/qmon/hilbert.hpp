#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qmon/types.hpp"

namespace qmon {

// A Hermitian matrix together with its spectral decomposition.
// Operators produced by spectral_decompose carry eigenvalues in ascending
// order; the analytic spin constructors instead keep the conventional
// m = s..-s basis order so that the Hamiltonian and observable bases stay
// index-aligned (see spin_system).
struct HermitianOperator {
  int dim = 0;
  Mat matrix;        // dim x dim
  RVec eigenvalues;  // dim
  Mat eigenvectors;  // columns orthonormal, matrix = V diag(e) V^dag

  void validate() const;  // Hermiticity, orthonormality, reconstruction
};

HermitianOperator spectral_decompose(const Mat& op);

struct DensityMatrix {
  int dim = 0;
  Mat matrix;

  void validate() const;  // Hermitian, unit trace, positive semidefinite
};

// Hamiltonian, measured observable, and their basis overlap
// V[k][l] = <alpha_k | E_l>. Rows of V are indexed like the observable's
// eigenvectors and columns like the Hamiltonian's.
struct QuantumSystem {
  HermitianOperator hamiltonian;
  HermitianOperator observable;
  Mat overlap;

  int dim() const { return hamiltonian.dim; }
  void validate() const;  // overlap unitary
};

QuantumSystem make_system(HermitianOperator hamiltonian, HermitianOperator observable);

struct SpinParameters {
  double s = 0.5;       // half-integer spin, dimension 2s+1
  double omega = 1.0;   // field frequency; H = -omega Sz
  double xi = 0.0;      // observable tilt angle, O = sin(xi) Sx + cos(xi) Sz
  bool scaled = false;  // true selects H = -Sz/s

  int dim() const;
};

struct SpinOperators {
  HermitianOperator sx, sy, sz;
};

// Standard (2s+1)-dimensional angular momentum matrices in the Sz eigenbasis
// ordered m = s..-s, so Sz = diag(s, s-1, ..., -s).
SpinOperators spin_operators(double s);

// O = sin(xi) Sx + cos(xi) Sz with spectral data in the m = s..-s order
// (outcomes descend; eigenvector columns align index-wise with the
// Hamiltonian basis of spin_system).
HermitianOperator tilted_observable(const SpinParameters& p);

// Full spin system: H = -omega Sz (or -Sz/s when scaled), observable the
// tilted spin component. Both bases ordered m = s..-s.
QuantumSystem spin_system(const SpinParameters& p);

// rho = exp(-beta H)/Z computed in the energy eigenbasis with max-shifted
// exponents.
DensityMatrix thermal_state(const HermitianOperator& hamiltonian, double beta);

// Random N-level system in the basis where the observable is diagonal:
// H drawn from the real symmetric Gaussian ensemble, rho0 a Hilbert-Schmidt
// random state. Deterministic under seed.
std::pair<QuantumSystem, DensityMatrix> random_system(int n, std::uint64_t seed);

// Partition of the observable-basis indices into invariant subspaces, with
// the Hamiltonian restricted to each.
struct BlockStructure {
  std::vector<std::vector<int>> partition;
  std::vector<HermitianOperator> block_hamiltonians;

  int block_count() const { return static_cast<int>(partition.size()); }
  // block index of each basis element
  std::vector<int> labels(int dim) const;
};

// Anisotropic 2D oscillator truncated to total quanta n_x + n_y <= n_max,
// measured observable the pseudo angular momentum (i/2)(ax^dag ay - ay^dag ax).
// Basis ordered by sector n = n_x + n_y; the observable's spectral data is
// refined per sector (outcomes repeat across sectors).
std::pair<QuantumSystem, BlockStructure> oscillator_system(int n_max, double omega1,
                                                           double omega2,
                                                           bool zero_point = true);

// Fingerprint of the system's defining matrices (used in manifests).
std::uint64_t fingerprint(const QuantumSystem& sys);
std::uint64_t fingerprint(const DensityMatrix& rho);

}  // namespace qmon
