#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qmon/hilbert.hpp"
#include "qmon/protocol.hpp"
#include "qmon/transition.hpp"
#include "qmon/types.hpp"

namespace qmon {

struct ConvergenceReport {
  std::vector<long long> steps;      // chain lengths M
  std::vector<double> distances;     // ||chain - limit||_max, parity-aware
  double fitted_rate = 0.0;          // slope of log(distance) vs M
  double log_lambda1 = 0.0;          // log of the subleading |eigenvalue|
};

// Distance of L-chains from the limiting projector as the chain grows.
// Fixed/Zeno waiting specs use exact eigen-powers; random specs average over
// sampled chains.
ConvergenceReport itt_convergence(const QuantumSystem& sys, const WaitingSpec& waiting,
                                  std::span<const long long> steps,
                                  std::uint64_t seed = 12345, int sample_chains = 16);

struct ZenoReport {
  std::vector<long long> steps;   // M
  std::vector<double> taus;       // total_time / M
  std::vector<double> distances;  // ||L(tau)^M - I||_max
  double slope = 0.0;             // log-log fitted decay exponent
};

ZenoReport zeno_analysis(const QuantumSystem& sys, double total_time,
                         std::span<const long long> steps);

// Hermitian generator of the overlap: V = exp(i xi R) after fixing the
// column gauge (each overlap column rephased so its diagonal entry is real
// positive). R is scaled to unit max-norm; xi carries the magnitude.
struct OverlapGenerator {
  double xi = 0.0;
  Mat r;  // Hermitian, max |entry| = 1 (zero when xi = 0)
};

OverlapGenerator extract_generator_R(const QuantumSystem& sys);

// Effective Euclidean generator of the measurement chain:
// L(tau) = I - xi^2 Delta(tau) + O(xi^3) with
// Delta[k][l] = -4 |R_kl|^2 sin^2((E_k - E_l) tau / 2) off the diagonal and
// rows summing to zero. Off-diagonal entries are <= 0, so exp(-Delta t) is a
// stochastic semigroup. Note xi^2 * delta is gauge invariant; delta alone is
// tied to the unit-max-norm scaling of R.
struct EffectiveEvolution {
  RMat delta;
  double xi = 0.0;
  double tau = 0.0;
};

EffectiveEvolution delta_operator(const QuantumSystem& sys, double tau);

// exp(scale * A) for symmetric A, via eigendecomposition.
RMat sym_expm(const RMat& a, double scale);

struct EuclideanPoint {
  double xi = 0.0;
  long long steps = 0;     // M = round(t_eff / xi^2)
  double residual_t = 0.0; // M xi^2 - t_eff
  double error = 0.0;      // ||L^M - exp(-Delta t)||_max
};

// Convergence of L^M to the Euclidean semigroup along a family of systems
// with decreasing xi, at fixed effective time M xi^2 = t_eff.
std::vector<EuclideanPoint> euclidean_compare(std::span<const QuantumSystem> family,
                                              std::span<const double> xis, double tau,
                                              double t_eff);

// Tridiagonal generator of the tilted-spin family in the m = s..-s basis:
// A[m][m+-1] = m(m+-1) - s(s+1), A[m][m] = 2(s(s+1) - m^2).
RMat operator_A(double s);

struct SpectralCheckRow {
  int k = 0;
  double eigenvalue = 0.0;
  double eigenvalue_error = 0.0;   // |a_k - k(k+1)|
  double overlap_deficit = 0.0;    // 1 - |<v_k, legendre_k>|
};

// Spectrum of operator_A against k(k+1) and its eigenvectors against
// normalized Legendre polynomials P_k(m/s); k up to k_max (default
// floor(sqrt(s))).
std::vector<SpectralCheckRow> A_spectral_check(double s, int k_max = -1);

// Legendre polynomial P_k(x) by the three-term recurrence.
double legendre_pk(int k, double x);

struct ScalingDataset {
  double s = 0.0;
  std::vector<double> taus;
  struct Point {
    double tau;
    int k;
    double x;       // tau k / (2s)
    double lambda;
  };
  std::vector<Point> points;
  double critical_x = 0.0;          // dispersion-threshold estimate
  double critical_lo = 0.0;         // band over tau-subsets
  double critical_hi = 0.0;
  double lambda_at_critical = 0.0;
  double quad_coeff = 0.0;          // c in lambda ~ 1 - c x^2 for small x
  double max_dispersion_below = 0.0;  // max cross-tau sd for x < 0.9
};

// Spectra of L(tau) for the scaled spin system (H = -Sz/s, observable Sx)
// plotted against x = tau k / 2s; estimates where the curves separate.
ScalingDataset scaling_collapse(double s, std::span<const double> taus,
                                double dispersion_threshold = 0.01);

// Eigenvector matrix of L(tau) for the scaled spin system (columns ordered
// by descending eigenvalue), for heatmap export.
RMat collapse_eigenvectors(double s, double tau);

struct LimitOrderRow {
  std::string branch;  // "uniform", "identity", "euclidean"
  double s = 0.0;
  long long steps = 0;
  double distance = 0.0;
};

// Demonstrates how the limits in M and s interact for the scaled spin
// system: M -> inf at fixed s approaches the uniform projector, s -> inf at
// fixed M approaches the identity, and the joint limit at fixed
// t = M tau^2 / (4 s^2) approaches exp(-A t).
std::vector<LimitOrderRow> limit_order_study(std::span<const double> s_list,
                                             std::span<const long long> m_list,
                                             double tau, std::optional<double> t_eff);

}  // namespace qmon
