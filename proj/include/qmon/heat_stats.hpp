#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qmon/hilbert.hpp"
#include "qmon/protocol.hpp"
#include "qmon/types.hpp"

namespace qmon {

struct CharacteristicCurve {
  enum class Kind { Empirical, Analytic } kind = Kind::Empirical;
  struct Point {
    Cplx u;
    Cplx value;
    double stderr_mag = 0.0;  // standard error of the sample mean (empirical only)
  };
  std::vector<Point> points;
};

struct HeatPMF {
  std::vector<double> support;
  std::vector<double> prob;

  void validate() const;  // nonnegative, sums to 1 within 1e-12
};

// G(u) = <exp(i Q u)> over the ensemble records.
CharacteristicCurve empirical_G(const HeatEnsemble& ens, std::span<const Cplx> us);

// Real fast path on the u = i*eps axis: G(eps) = <exp(-eps Q)> with the
// standard error of the mean.
std::pair<double, double> empirical_G_eps(const HeatEnsemble& ens, double eps);

// Closed form under full thermalization:
// G(eps) = Tr[exp(-eps H)] Tr[rho0 exp(eps H)] / N, evaluated with shifted
// exponents (log-sum-exp), so only a genuinely overflowing result throws.
double analytic_G_itt(const HermitianOperator& hamiltonian, const DensityMatrix& rho0,
                      double eps);
Cplx analytic_G_itt(const HermitianOperator& hamiltonian, const DensityMatrix& rho0,
                    Cplx u);

// Exact heat distribution for the spin-s system (H = -omega Sz, thermal
// initial state) after full thermalization; support {omega*l : l=-2s..2s}.
// Computed from the finite geometric sums, which stay well-behaved at beta=0.
HeatPMF spin_heat_pmf(double s, double omega, double beta);

// Block-wise limiting distributions: pi_tilde over observable indices and
// p_m over energy indices.
std::pair<RVec, RVec> partial_itt_predict(const BlockStructure& blocks,
                                          const QuantumSystem& sys,
                                          const DensityMatrix& rho0);

// Block-wise characteristic function
// G(u) = sum_r (1/dim S_r) Tr_r[exp(i H_r u)] Tr_r[rho0 exp(-i H_r u)].
CharacteristicCurve partial_G(const BlockStructure& blocks, const QuantumSystem& sys,
                              const DensityMatrix& rho0, std::span<const Cplx> us);

// Empirical heat PMF from an ensemble, bins merged within
// 1e-9 * spectral range.
HeatPMF empirical_pmf(const HeatEnsemble& ens, const RVec& energies);

// Empirical distribution of the final (or initial) energy index.
std::vector<std::int64_t> final_energy_counts(const HeatEnsemble& ens, int dim);
std::vector<std::int64_t> initial_energy_counts(const HeatEnsemble& ens, int dim);

}  // namespace qmon
