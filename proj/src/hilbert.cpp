#include "qmon/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "qmon/rng.hpp"
#include "qmon/stats.hpp"

namespace qmon {

namespace {

void require_hermitian(const Mat& a, const char* what) {
  if (a.rows() != a.cols()) throw NotHermitian(std::string(what) + ": not square");
  const double dev = max_abs(Mat(a - a.adjoint()));
  if (dev > tol::herm)
    throw NotHermitian(std::string(what) + ": |A - A^dag| = " + std::to_string(dev));
}

int spin_dim(double s) {
  const double two_s = 2.0 * s;
  const auto rounded = static_cast<long>(std::llround(two_s));
  if (rounded < 1 || std::fabs(two_s - static_cast<double>(rounded)) > 1e-12)
    throw InvalidSpin("spin must be a positive half-integer, got " + std::to_string(s));
  return static_cast<int>(rounded) + 1;
}

struct SpinMatrices {
  Mat sx, sy, sz;
};

SpinMatrices spin_matrices(double s) {
  const int n = spin_dim(s);
  Mat sp = Mat::Zero(n, n);  // raising operator: S+ |m> -> |m+1>, index i -> i-1
  for (int i = 1; i < n; ++i) {
    const double m = s - i;
    sp(i - 1, i) = std::sqrt(s * (s + 1) - m * (m + 1));
  }
  const Mat sm = sp.adjoint();
  SpinMatrices out;
  out.sx = (sp + sm) / 2.0;
  out.sy = (sp - sm) / Cplx(0.0, 2.0);
  out.sz = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) out.sz(i, i) = s - i;
  return out;
}

}  // namespace

void HermitianOperator::validate() const {
  require_hermitian(matrix, "HermitianOperator");
  const Mat gram = eigenvectors.adjoint() * eigenvectors;
  const double orth = max_abs(Mat(gram - Mat::Identity(dim, dim)));
  if (orth > tol::orth)
    throw NotHermitian("eigenvector columns not orthonormal: " + std::to_string(orth));
  const Mat rebuilt =
      eigenvectors * eigenvalues.asDiagonal() * eigenvectors.adjoint();
  const double recon = max_abs(Mat(rebuilt - matrix));
  const double scale = std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
  if (recon > tol::recon * scale)
    throw NotHermitian("spectral reconstruction off by " + std::to_string(recon));
}

HermitianOperator spectral_decompose(const Mat& op) {
  require_hermitian(op, "spectral_decompose");
  const int n = static_cast<int>(op.rows());
  Eigen::SelfAdjointEigenSolver<Mat> es(op);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("spectral_decompose: eigensolver failed");

  HermitianOperator out;
  out.dim = n;
  out.matrix = (op + op.adjoint()) / 2.0;
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();

  // Re-orthogonalize within clusters of near-degenerate eigenvalues so that
  // degenerate subspaces carry an exactly orthonormal basis.
  const double range =
      out.eigenvalues(n - 1) - out.eigenvalues(0);
  const double eps_deg = tol::deg_rel * std::max(range, 1e-300);
  int start = 0;
  while (start < n) {
    int stop = start + 1;
    while (stop < n && out.eigenvalues(stop) - out.eigenvalues(stop - 1) <= eps_deg)
      ++stop;
    if (stop - start > 1) {
      // modified Gram-Schmidt over the cluster
      for (int j = start; j < stop; ++j) {
        for (int i = start; i < j; ++i) {
          const Cplx proj = out.eigenvectors.col(i).dot(out.eigenvectors.col(j));
          out.eigenvectors.col(j) -= proj * out.eigenvectors.col(i);
        }
        out.eigenvectors.col(j).normalize();
      }
    }
    start = stop;
  }
  out.validate();
  return out;
}

void DensityMatrix::validate() const {
  require_hermitian(matrix, "DensityMatrix");
  const double tr_dev = std::abs(matrix.trace() - Cplx(1.0, 0.0));
  if (tr_dev > tol::trace)
    throw Error("DensityMatrix: trace deviates from 1 by " + std::to_string(tr_dev));
  Eigen::SelfAdjointEigenSolver<Mat> es(matrix, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -tol::psd)
    throw Error("DensityMatrix: negative eigenvalue " +
                std::to_string(es.eigenvalues().minCoeff()));
}

void QuantumSystem::validate() const {
  const int n = dim();
  if (observable.dim != n) throw DimensionMismatch("system dims differ");
  const Mat gram = overlap.adjoint() * overlap;
  const double dev = max_abs(Mat(gram - Mat::Identity(n, n)));
  if (dev > tol::orth)
    throw NotHermitian("overlap matrix not unitary: " + std::to_string(dev));
}

QuantumSystem make_system(HermitianOperator hamiltonian, HermitianOperator observable) {
  QuantumSystem sys;
  sys.overlap = observable.eigenvectors.adjoint() * hamiltonian.eigenvectors;
  sys.hamiltonian = std::move(hamiltonian);
  sys.observable = std::move(observable);
  sys.validate();
  return sys;
}

int SpinParameters::dim() const { return spin_dim(s); }

SpinOperators spin_operators(double s) {
  const int n = spin_dim(s);
  const SpinMatrices mats = spin_matrices(s);

  SpinOperators ops;
  ops.sx = spectral_decompose(mats.sx);
  ops.sy = spectral_decompose(mats.sy);

  // Sz is diagonal in this basis; keep the m = s..-s order instead of the
  // solver's ascending one.
  HermitianOperator sz;
  sz.dim = n;
  sz.matrix = mats.sz;
  sz.eigenvalues = RVec(n);
  for (int i = 0; i < n; ++i) sz.eigenvalues(i) = s - i;
  sz.eigenvectors = Mat::Identity(n, n);
  ops.sz = sz;
  return ops;
}

HermitianOperator tilted_observable(const SpinParameters& p) {
  const int n = spin_dim(p.s);
  const SpinMatrices mats = spin_matrices(p.s);
  Mat o = std::sin(p.xi) * mats.sx + std::cos(p.xi) * mats.sz;

  // Real symmetric matrix; diagonalize and order outcomes m = s..-s so the
  // eigenbasis stays aligned with the Hamiltonian's (energies ascend when
  // omega > 0). Columns are re-signed to a positive diagonal entry, which
  // fixes the gauge to exp(-i xi Sy)|m>.
  Eigen::SelfAdjointEigenSolver<Mat> es(o);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("tilted_observable: eigensolver failed");
  HermitianOperator out;
  out.dim = n;
  out.matrix = std::move(o);
  out.eigenvalues = RVec(n);
  out.eigenvectors = Mat(n, n);
  for (int i = 0; i < n; ++i) {
    const int src = n - 1 - i;  // descending outcomes
    out.eigenvalues(i) = es.eigenvalues()(src);
    out.eigenvectors.col(i) = es.eigenvectors().col(src);
    const Cplx d = out.eigenvectors(i, i);
    if (std::abs(d) > 1e-14) out.eigenvectors.col(i) *= std::abs(d) / d;
  }
  out.validate();
  return out;
}

QuantumSystem spin_system(const SpinParameters& p) {
  const int n = spin_dim(p.s);
  HermitianOperator h;
  h.dim = n;
  h.matrix = Mat::Zero(n, n);
  h.eigenvalues = RVec(n);
  const double scale = p.scaled ? 1.0 / p.s : p.omega;
  for (int i = 0; i < n; ++i) {
    const double m = p.s - i;
    h.matrix(i, i) = -scale * m;
    h.eigenvalues(i) = -scale * m;
  }
  h.eigenvectors = Mat::Identity(n, n);
  return make_system(std::move(h), tilted_observable(p));
}

DensityMatrix thermal_state(const HermitianOperator& hamiltonian, double beta) {
  if (!std::isfinite(beta)) throw Error("thermal_state: beta must be finite");
  const int n = hamiltonian.dim;
  // Gibbs weights with the smallest exponent shifted to zero: the ground
  // state weight is exactly 1 and nothing overflows.
  const RVec& e = hamiltonian.eigenvalues;
  const double shift = beta >= 0.0 ? e.minCoeff() : e.maxCoeff();
  RVec w(n);
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    w(i) = std::exp(-beta * (e(i) - shift));
    z += w(i);
  }
  if (!(z > 0.0) || !std::isfinite(z))
    throw OverflowError("thermal_state: partition sum not finite");
  DensityMatrix rho;
  rho.dim = n;
  rho.matrix = hamiltonian.eigenvectors * (w / z).asDiagonal() *
               hamiltonian.eigenvectors.adjoint();
  rho.matrix = (rho.matrix + rho.matrix.adjoint()) / 2.0;
  return rho;
}

std::pair<QuantumSystem, DensityMatrix> random_system(int n, std::uint64_t seed) {
  if (n < 2) throw Error("random_system: need N >= 2");
  RngStream st(seed, 0xa11ce);

  // Observable: diagonal with distinct outcomes 0..N-1 (the drawn basis is
  // the observable's eigenbasis).
  HermitianOperator obs;
  obs.dim = n;
  obs.matrix = Mat::Zero(n, n);
  obs.eigenvalues = RVec(n);
  for (int i = 0; i < n; ++i) {
    obs.matrix(i, i) = i;
    obs.eigenvalues(i) = i;
  }
  obs.eigenvectors = Mat::Identity(n, n);

  // Real symmetric Gaussian Hamiltonian. A complex (GUE) draw would make
  // the transition matrices asymmetric; see transition.cpp.
  Mat h = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double g = st.normal();
      if (i == j) {
        h(i, i) = g;
      } else {
        h(i, j) = g / std::sqrt(2.0);
        h(j, i) = g / std::sqrt(2.0);
      }
    }

  // Hilbert-Schmidt random state: G G^dag normalized.
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = Cplx(st.normal(), st.normal());
  DensityMatrix rho;
  rho.dim = n;
  rho.matrix = g * g.adjoint();
  rho.matrix /= rho.matrix.trace().real();
  rho.matrix = (rho.matrix + rho.matrix.adjoint()) / 2.0;
  rho.validate();

  return {make_system(spectral_decompose(h), std::move(obs)), std::move(rho)};
}

std::vector<int> BlockStructure::labels(int dim) const {
  std::vector<int> lab(dim, -1);
  for (int r = 0; r < block_count(); ++r)
    for (int k : partition[r]) lab[k] = r;
  return lab;
}

std::pair<QuantumSystem, BlockStructure> oscillator_system(int n_max, double omega1,
                                                           double omega2,
                                                           bool zero_point) {
  if (n_max < 1) throw InvalidTruncation("oscillator_system: n_max must be >= 1");
  if (!(omega1 > 0.0) || !(omega2 > 0.0))
    throw Error("oscillator_system: frequencies must be positive");

  // Basis |n_x, n_y> grouped by sector n = n_x + n_y, with n_x = n..0 inside
  // a sector.
  struct Ket {
    int nx, ny;
  };
  std::vector<Ket> basis;
  BlockStructure blocks;
  for (int n = 0; n <= n_max; ++n) {
    std::vector<int> sector;
    for (int nx = n; nx >= 0; --nx) {
      sector.push_back(static_cast<int>(basis.size()));
      basis.push_back({nx, n - nx});
    }
    blocks.partition.push_back(std::move(sector));
  }
  const int dim = static_cast<int>(basis.size());

  HermitianOperator h;
  h.dim = dim;
  h.matrix = Mat::Zero(dim, dim);
  h.eigenvalues = RVec(dim);
  const double e0 = zero_point ? 0.5 * (omega1 + omega2) : 0.0;
  for (int i = 0; i < dim; ++i) {
    const double e = omega1 * basis[i].nx + omega2 * basis[i].ny + e0;
    h.matrix(i, i) = e;
    h.eigenvalues(i) = e;
  }
  h.eigenvectors = Mat::Identity(dim, dim);

  // Pseudo angular momentum i (ax^dag ay - ay^dag ax), the ladder form of
  // (omega2 y px - omega1 x py)/sqrt(omega1 omega2). Within the sector of
  // total quanta n it acts as twice the y-component of a spin-(n/2), with
  // eigenvalues -n..n in steps of 2.
  // ax^dag ay |nx,ny> = sqrt((nx+1) ny) |nx+1,ny-1>.
  Mat lt = Mat::Zero(dim, dim);
  auto index_of = [&](int nx, int ny) {
    // sector n starts at n(n+1)/2; inside, nx runs n..0
    const int n = nx + ny;
    return n * (n + 1) / 2 + (n - nx);
  };
  for (int i = 0; i < dim; ++i) {
    const int nx = basis[i].nx, ny = basis[i].ny;
    if (ny >= 1) {
      const int j = index_of(nx + 1, ny - 1);
      lt(j, i) += Cplx(0.0, 1.0) * std::sqrt((nx + 1.0) * ny);
    }
    if (nx >= 1) {
      const int j = index_of(nx - 1, ny + 1);
      lt(j, i) += Cplx(0.0, -1.0) * std::sqrt(static_cast<double>(nx) * (ny + 1.0));
    }
  }

  // Spectral data refined per sector: outcomes repeat across sectors, so a
  // global sorted decomposition would scramble the invariant subspaces.
  HermitianOperator obs;
  obs.dim = dim;
  obs.matrix = lt;
  obs.eigenvalues = RVec(dim);
  obs.eigenvectors = Mat::Zero(dim, dim);
  for (const auto& sector : blocks.partition) {
    const int d = static_cast<int>(sector.size());
    Mat sub(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) sub(a, b) = lt(sector[a], sector[b]);
    Eigen::SelfAdjointEigenSolver<Mat> es(sub);
    if (es.info() != Eigen::Success)
      throw ConvergenceFailure("oscillator_system: sector eigensolver failed");
    for (int a = 0; a < d; ++a) {
      obs.eigenvalues(sector[a]) = es.eigenvalues()(a);
      for (int b = 0; b < d; ++b)
        obs.eigenvectors(sector[b], sector[a]) = es.eigenvectors()(b, a);
    }
  }
  obs.validate();

  for (const auto& sector : blocks.partition) {
    const int d = static_cast<int>(sector.size());
    Mat sub(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) sub(a, b) = h.matrix(sector[a], sector[b]);
    blocks.block_hamiltonians.push_back(spectral_decompose(sub));
  }

  return {make_system(std::move(h), std::move(obs)), std::move(blocks)};
}

std::uint64_t fingerprint(const QuantumSystem& sys) {
  std::uint64_t h = stats::fnv1a(&sys.hamiltonian.dim, sizeof(int));
  auto add = [&h](const Mat& m) {
    h = stats::fnv1a(m.data(), sizeof(Cplx) * m.size(), h);
  };
  add(sys.hamiltonian.matrix);
  add(sys.observable.matrix);
  add(sys.overlap);
  return h;
}

std::uint64_t fingerprint(const DensityMatrix& rho) {
  return stats::fnv1a(rho.matrix.data(), sizeof(Cplx) * rho.matrix.size());
}

}  // namespace qmon
