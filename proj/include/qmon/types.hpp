#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace qmon {

using Cplx = std::complex<double>;
using Mat  = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec  = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Numerical tolerances used across the library. Valid for dimensions up
// to ~1000; see the per-check comments where a tolerance is scale-relative.
namespace tol {
inline constexpr double herm   = 1e-10;  // Hermiticity of inputs
inline constexpr double orth   = 1e-10;  // orthonormality / unitarity
inline constexpr double recon  = 1e-10;  // spectral reconstruction
inline constexpr double trace  = 1e-12;  // density-matrix trace
inline constexpr double psd    = 1e-10;  // density-matrix positivity slack
inline constexpr double stoch  = 1e-10;  // row/column sums of L
inline constexpr double sym    = 1e-10;  // symmetry of L
inline constexpr double eig    = 1e-10;  // spectral containment of L
inline constexpr double fix    = 1e-10;  // uniform fixed-point residual
inline constexpr double neg    = 1e-12;  // clip threshold for tiny negative entries
inline constexpr double supp   = 1e-12;  // support-graph edge threshold
inline constexpr double prob   = 1e-8;   // sampling-distribution total deviation
inline constexpr double deg_rel = 1e-8;  // degeneracy clustering, relative to spectral range
}  // namespace tol

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotHermitian : Error { using Error::Error; };
struct ConvergenceFailure : Error { using Error::Error; };
struct InvalidSpin : Error { using Error::Error; };
struct InvalidTruncation : Error { using Error::Error; };
struct OverflowError : Error { using Error::Error; };
struct StochasticityViolation : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct ProbabilityUnderflow : Error { using Error::Error; };
struct TooLarge : Error { using Error::Error; };
struct BlockMismatch : Error { using Error::Error; };
struct BranchFailure : Error { using Error::Error; };
struct EmptyEnsemble : Error { using Error::Error; };
struct InsufficientTaus : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

inline double max_abs(const RMat& a) { return a.cwiseAbs().maxCoeff(); }
inline double max_abs(const Mat& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace qmon
