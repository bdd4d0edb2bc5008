#include "qmon/transition.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "qmon/rng.hpp"

namespace qmon {

namespace {

// Fixed tau samples added to every support-graph scan. Values are spread
// over roughly [0.3, 3.1] and are offset-irrational enough that a matrix
// element vanishing simultaneously at all of them plus the caller's taus
// signals a true invariant subspace, not a resonance.
constexpr double kSupportTaus[8] = {0.3141592653589793, 0.7853981633974483,
                                    1.0471975511965976, 1.4142135623730951,
                                    1.7320508075688772, 2.2360679774997896,
                                    2.6457513110645906, 3.0822070014844882};

}  // namespace

void TransitionMatrix::validate() const {
  const int n = dim;
  if (matrix.rows() != n || matrix.cols() != n)
    throw DimensionMismatch("TransitionMatrix: shape mismatch");
  if (matrix.minCoeff() < -tol::neg)
    throw StochasticityViolation("TransitionMatrix: negative entry " +
                                 std::to_string(matrix.minCoeff()));
  const double stoch = stochastic_deviation(matrix);
  if (stoch > tol::stoch)
    throw StochasticityViolation("TransitionMatrix: row/col sums off by " +
                                 std::to_string(stoch));
  const double asym = max_abs(RMat(matrix - matrix.transpose()));
  if (asym > tol::sym)
    throw StochasticityViolation("TransitionMatrix: asymmetric by " +
                                 std::to_string(asym) +
                                 " (is the Hamiltonian complex in the observable basis?)");
  if (spectrum.size() != n) throw DimensionMismatch("TransitionMatrix: missing spectrum");
  if (spectrum.maxCoeff() > 1.0 + tol::eig || spectrum.minCoeff() < -1.0 - tol::eig)
    throw StochasticityViolation("TransitionMatrix: spectrum escapes [-1,1]");
  if (std::fabs(spectrum(0) - 1.0) > tol::eig)
    throw StochasticityViolation("TransitionMatrix: top eigenvalue != 1");
  const RVec v = RVec::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  if ((matrix * v - v).cwiseAbs().maxCoeff() > tol::fix)
    throw StochasticityViolation("TransitionMatrix: uniform vector not fixed");
}

Mat propagator(const HermitianOperator& hamiltonian, double tau) {
  if (!std::isfinite(tau)) throw Error("propagator: tau must be finite");
  const int n = hamiltonian.dim;
  Vec phases(n);
  for (int i = 0; i < n; ++i)
    phases(i) = std::exp(Cplx(0.0, -hamiltonian.eigenvalues(i) * tau));
  return hamiltonian.eigenvectors * phases.asDiagonal() *
         hamiltonian.eigenvectors.adjoint();
}

RMat transition_matrix_raw(const QuantumSystem& sys, double tau) {
  const int n = sys.dim();
  Vec phases(n);
  for (int i = 0; i < n; ++i)
    phases(i) = std::exp(Cplx(0.0, -sys.hamiltonian.eigenvalues(i) * tau));
  const Mat u = sys.overlap * phases.asDiagonal() * sys.overlap.adjoint();
  RMat l = u.cwiseAbs2();
  // clip fp negatives (cwiseAbs2 cannot produce them, but products later can)
  return l.cwiseMax(0.0);
}

TransitionMatrix transition_matrix(const QuantumSystem& sys, double tau) {
  TransitionMatrix out;
  out.dim = sys.dim();
  out.tau = tau;
  out.matrix = transition_matrix_raw(sys, tau);

  const double stoch = stochastic_deviation(out.matrix);
  if (stoch > tol::stoch)
    throw StochasticityViolation(
        "transition_matrix: row/col sums off by " + std::to_string(stoch) +
        " (broken orthonormality upstream)");
  const double asym = max_abs(RMat(out.matrix - out.matrix.transpose()));
  if (asym > tol::sym)
    throw StochasticityViolation("transition_matrix: asymmetric by " + std::to_string(asym));

  // Symmetry is exact here, so the real symmetric solver applies.
  const RMat sym_part = (out.matrix + out.matrix.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<RMat> es(sym_part);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("transition_matrix: eigensolver failed");
  const int n = out.dim;
  out.spectrum = RVec(n);
  out.eigenbasis = RMat(n, n);
  for (int i = 0; i < n; ++i) {
    out.spectrum(i) = es.eigenvalues()(n - 1 - i);
    out.eigenbasis.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  out.validate();
  return out;
}

RMat chain_product(std::span<const TransitionMatrix> ls) {
  if (ls.empty()) throw DimensionMismatch("chain_product: empty chain");
  const int n = ls.front().dim;
  for (const auto& l : ls)
    if (l.dim != n) throw DimensionMismatch("chain_product: dims differ");
  RMat prod = ls.front().matrix;
  for (std::size_t j = 1; j < ls.size(); ++j) prod = ls[j].matrix * prod;
  // no silent renormalization: error growth is checked, not masked
  const double drift = stochastic_deviation(prod);
  if (drift > static_cast<double>(ls.size()) * tol::stoch)
    throw StochasticityViolation("chain_product: accumulated drift " +
                                 std::to_string(drift) + " over " +
                                 std::to_string(ls.size()) + " factors");
  return prod;
}

RMat matrix_power(const TransitionMatrix& l, long long m) {
  if (m < 0) throw Error("matrix_power: negative power");
  const int n = l.dim;
  if (m == 0) return RMat::Identity(n, n);
  RVec powered(n);
  for (int i = 0; i < n; ++i) {
    const double lam = l.spectrum(i);
    // lam^m via exp(m log|lam|) keeps huge powers finite and monotone
    if (lam == 0.0) {
      powered(i) = 0.0;
    } else {
      const double mag = std::exp(static_cast<double>(m) * std::log(std::fabs(lam)));
      powered(i) = (lam < 0.0 && (m & 1)) ? -mag : mag;
    }
  }
  return l.eigenbasis * powered.asDiagonal() * l.eigenbasis.transpose();
}

double stochastic_deviation(const RMat& a) {
  const double row = (a.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double col = (a.colwise().sum().array() - 1.0).abs().maxCoeff();
  return std::max(row, col);
}

FixedPoint fixed_point(const TransitionMatrix& l) {
  const int n = l.dim;
  const double range = l.spectrum(0) - l.spectrum(n - 1);
  const double window = std::max(tol::deg_rel * range, 10 * tol::eig);
  FixedPoint fp;
  fp.projector = RMat::Zero(n, n);
  fp.neg_projector = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (std::fabs(l.spectrum(i) - 1.0) <= window) {
      fp.multiplicity += 1;
      fp.projector += l.eigenbasis.col(i) * l.eigenbasis.col(i).transpose();
    } else if (std::fabs(l.spectrum(i) + 1.0) <= window) {
      fp.neg_multiplicity += 1;
      fp.neg_projector += l.eigenbasis.col(i) * l.eigenbasis.col(i).transpose();
    }
  }
  return fp;
}

BlockStructure block_decompose(const QuantumSystem& sys, std::span<const double> taus) {
  if (taus.empty()) throw Error("block_decompose: need at least one tau");
  const int n = sys.dim();

  RMat support = RMat::Zero(n, n);
  auto accumulate = [&](double tau) {
    support = support.cwiseMax(transition_matrix_raw(sys, tau));
  };
  for (double tau : taus) accumulate(tau);
  for (double tau : kSupportTaus) accumulate(tau);

  // connected components by union-find
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<int> rank(n, 0);
  auto find = [&](int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank[a] < rank[b]) std::swap(a, b);
    parent[b] = a;
    if (rank[a] == rank[b]) ++rank[a];
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (support(i, j) > tol::supp) unite(i, j);

  std::vector<std::vector<int>> groups(n);
  for (int i = 0; i < n; ++i) groups[find(i)].push_back(i);

  BlockStructure blocks;
  // H expressed in the observable eigenbasis
  const Mat h_obs = sys.overlap * sys.hamiltonian.eigenvalues.asDiagonal() *
                    sys.overlap.adjoint();
  for (auto& g : groups) {
    if (g.empty()) continue;
    const int d = static_cast<int>(g.size());
    Mat sub(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) sub(a, b) = h_obs(g[a], g[b]);
    blocks.block_hamiltonians.push_back(spectral_decompose(sub));
    blocks.partition.push_back(std::move(g));
  }
  return blocks;
}

std::vector<int> energy_block_labels(const BlockStructure& blocks,
                                     const QuantumSystem& sys) {
  const int n = sys.dim();
  const std::vector<int> basis_label = blocks.labels(n);
  std::vector<int> out(n, -1);
  for (int l = 0; l < n; ++l) {
    // mass of |E_l> inside each block (column l of the overlap matrix)
    std::vector<double> mass(blocks.block_count(), 0.0);
    for (int k = 0; k < n; ++k)
      mass[basis_label[k]] += std::norm(sys.overlap(k, l));
    int best = 0;
    for (int r = 1; r < blocks.block_count(); ++r)
      if (mass[r] > mass[best]) best = r;
    if (1.0 - mass[best] > 1e-8)
      throw BlockMismatch("energy eigenvector " + std::to_string(l) +
                          " leaks outside its block by " +
                          std::to_string(1.0 - mass[best]));
    out[l] = best;
  }
  return out;
}

}  // namespace qmon
