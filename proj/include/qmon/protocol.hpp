#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qmon/hilbert.hpp"
#include "qmon/rng.hpp"
#include "qmon/types.hpp"

namespace qmon {

struct WaitingSpec {
  enum class Kind { Fixed, Uniform, Exponential, Zeno } kind = Kind::Fixed;
  double a = 1.0;  // Fixed: tau; Uniform: lower; Exponential: mean; Zeno: total time
  double b = 1.0;  // Uniform: upper

  static WaitingSpec fixed(double tau) { return {Kind::Fixed, tau, tau}; }
  static WaitingSpec uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
  static WaitingSpec exponential(double mean) { return {Kind::Exponential, mean, mean}; }
  static WaitingSpec zeno(double total_time) { return {Kind::Zeno, total_time, total_time}; }

  void validate() const;
  // true when every step uses the same tau (given M)
  bool deterministic_tau() const {
    return kind == Kind::Fixed || kind == Kind::Zeno;
  }
};

struct ProtocolConfig {
  int measurements = 1;             // M
  WaitingSpec waiting;
  long long ensemble_size = 1;
  std::uint64_t seed = 0;
  bool store_outcomes = false;

  void validate() const;
};

struct TrajectoryRecord {
  int n = 0;         // initial energy index
  int m = 0;         // final energy index
  double heat = 0.0; // E_m - E_n
  std::vector<int> outcomes;  // k_1..k_M, kept only when requested
};

struct HeatEnsemble {
  std::vector<TrajectoryRecord> records;
  std::uint64_t system_fingerprint = 0;
  std::uint64_t config_fingerprint = 0;
};

std::uint64_t fingerprint(const ProtocolConfig& cfg);

// Precomputed sampling tables for one (system, state, config) triple.
// Immutable once built; safe to share between threads.
class TrajectorySampler {
 public:
  TrajectorySampler(const QuantumSystem& sys, const DensityMatrix& rho0,
                    const ProtocolConfig& cfg);

  TrajectoryRecord sample(RngStream& stream) const;

  const RVec& energy_weights() const { return c_; }
  const RVec& energies() const { return energies_; }

 private:
  int dim_;
  ProtocolConfig cfg_;
  RVec energies_;
  RVec c_;         // <E_n| rho0 |E_n>
  RMat w_;         // |overlap|^2, rows = observable index
  RMat wt_;        // transpose of w_ (contiguous rows of w_)
  RMat chain_;     // L(tau) for deterministic-tau specs
  Mat overlap_;    // kept for per-step columns under random taus
  bool fixed_tau_ = false;

  void step_column(double tau, int from, RVec& out) const;
};

// One protocol realization: energy measurement, M observable measurements,
// final energy measurement.
TrajectoryRecord run_trajectory(const QuantumSystem& sys, const DensityMatrix& rho0,
                                const ProtocolConfig& cfg, RngStream& stream);

// OpenMP-parallel ensemble. Results are bit-identical for any worker count:
// every trajectory draws from its own counter-based substream and lands in
// its own slot. workers = 0 uses the OpenMP default.
HeatEnsemble run_ensemble(const QuantumSystem& sys, const DensityMatrix& rho0,
                          const ProtocolConfig& cfg, int workers = 0);

namespace reference {
// Plain serial implementation kept as the comparison baseline for the
// parallel kernel.
HeatEnsemble run_ensemble(const QuantumSystem& sys, const DensityMatrix& rho0,
                          const ProtocolConfig& cfg);
}  // namespace reference

// Exact heat distribution for fixed tau.
struct ExactDistribution {
  std::vector<double> heat;   // distinct Q values, ascending
  std::vector<double> prob;   // matching probabilities
  RMat joint;                 // joint probability of (n, m)
};

// Matrix-power path, cost O(N^3 M).
ExactDistribution exact_distribution(const QuantumSystem& sys, const DensityMatrix& rho0,
                                     int measurements, double tau);

// Brute-force enumeration over all N^M outcome sequences; N <= 6 and M <= 6
// enforced. Exists to validate the matrix-power path.
ExactDistribution exact_distribution_enumerated(const QuantumSystem& sys,
                                                const DensityMatrix& rho0,
                                                int measurements, double tau);

// Group (value, weight) pairs whose values agree within eps.
void merge_bins(std::vector<double>& values, std::vector<double>& weights, double eps);

}  // namespace qmon
