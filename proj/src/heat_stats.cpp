#include "qmon/heat_stats.hpp"

#include <algorithm>
#include <cmath>

#include "qmon/transition.hpp"

namespace qmon {

void HeatPMF::validate() const {
  if (support.size() != prob.size()) throw DimensionMismatch("HeatPMF: size mismatch");
  double total = 0.0;
  for (double p : prob) {
    if (p < -1e-15) throw Error("HeatPMF: negative probability");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12)
    throw Error("HeatPMF: probabilities sum to " + std::to_string(total));
}

CharacteristicCurve empirical_G(const HeatEnsemble& ens, std::span<const Cplx> us) {
  if (ens.records.empty()) throw EmptyEnsemble("empirical_G: no records");
  CharacteristicCurve curve;
  curve.kind = CharacteristicCurve::Kind::Empirical;
  const auto n = static_cast<double>(ens.records.size());
  for (const Cplx u : us) {
    Cplx sum = 0.0;
    double sq = 0.0;
    for (const auto& rec : ens.records) {
      const Cplx z = std::exp(Cplx(0.0, rec.heat) * u);
      sum += z;
      sq += std::norm(z);
    }
    const Cplx mean = sum / n;
    double var = (sq / n - std::norm(mean));
    var = std::max(var, 0.0);
    curve.points.push_back({u, mean, n > 1 ? std::sqrt(var / (n - 1.0)) : 0.0});
  }
  return curve;
}

std::pair<double, double> empirical_G_eps(const HeatEnsemble& ens, double eps) {
  if (ens.records.empty()) throw EmptyEnsemble("empirical_G_eps: no records");
  const auto n = static_cast<double>(ens.records.size());
  long double sum = 0.0L, sq = 0.0L;
  for (const auto& rec : ens.records) {
    const double z = std::exp(-eps * rec.heat);
    sum += z;
    sq += static_cast<long double>(z) * z;
  }
  const double mean = static_cast<double>(sum / n);
  double var = static_cast<double>(sq / n) - mean * mean;
  var = std::max(var, 0.0);
  return {mean, n > 1 ? std::sqrt(var / (n - 1.0)) : 0.0};
}

namespace {

// log sum_k exp(x_k)
double log_sum_exp(const RVec& x) {
  const double m = x.maxCoeff();
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) s += std::exp(x(i) - m);
  return m + std::log(s);
}

// log sum_k w_k exp(x_k), w_k >= 0 not all zero
double log_sum_exp_weighted(const RVec& w, const RVec& x) {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < x.size(); ++i)
    if (w(i) > 0.0) m = std::max(m, x(i));
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i)
    if (w(i) > 0.0) s += w(i) * std::exp(x(i) - m);
  return m + std::log(s);
}

RVec diagonal_populations(const HermitianOperator& basis_of, const DensityMatrix& rho0) {
  const int n = basis_of.dim;
  RVec c(n);
  for (int i = 0; i < n; ++i) {
    const Vec v = basis_of.eigenvectors.col(i);
    c(i) = std::max(0.0, (v.adjoint() * rho0.matrix * v)(0, 0).real());
  }
  return c;
}

}  // namespace

double analytic_G_itt(const HermitianOperator& hamiltonian, const DensityMatrix& rho0,
                      double eps) {
  const int n = hamiltonian.dim;
  const RVec& e = hamiltonian.eigenvalues;
  const RVec c = diagonal_populations(hamiltonian, rho0);
  const double log_z = log_sum_exp(-eps * e);
  const double log_tr = log_sum_exp_weighted(c, eps * e);
  const double log_g = log_z + log_tr - std::log(static_cast<double>(n));
  if (log_g > 700.0)
    throw OverflowError("analytic_G_itt: G(eps) overflows a double");
  return std::exp(log_g);
}

Cplx analytic_G_itt(const HermitianOperator& hamiltonian, const DensityMatrix& rho0,
                    Cplx u) {
  const int n = hamiltonian.dim;
  const RVec& e = hamiltonian.eigenvalues;
  const RVec c = diagonal_populations(hamiltonian, rho0);
  // exp(iuE) has modulus exp(-Im(u) E); shift both factors like the real path
  const double eps = u.imag();
  const double s1 = (-eps * e).maxCoeff();
  Cplx z1 = 0.0;
  for (int k = 0; k < n; ++k)
    z1 += std::exp(Cplx(-eps * e(k) - s1, u.real() * e(k)));
  const double s2 = (eps * e).maxCoeff();
  Cplx z2 = 0.0;
  for (int k = 0; k < n; ++k)
    z2 += c(k) * std::exp(Cplx(eps * e(k) - s2, -u.real() * e(k)));
  return z1 * z2 * std::exp(s1 + s2) / static_cast<double>(n);
}

HeatPMF spin_heat_pmf(double s, double omega, double beta) {
  if (!(omega > 0.0)) throw Error("spin_heat_pmf: omega must be positive");
  if (beta < 0.0) throw Error("spin_heat_pmf: beta must be >= 0");
  const int two_s = static_cast<int>(std::llround(2.0 * s));
  if (two_s < 1 || std::fabs(2.0 * s - two_s) > 1e-12)
    throw InvalidSpin("spin_heat_pmf: bad spin");
  const int levels = two_s + 1;  // energies E_k = omega k, k = 0..2s

  // z = sum_k exp(-beta omega k)
  double z = 0.0;
  for (int k = 0; k < levels; ++k) z += std::exp(-beta * omega * k);

  HeatPMF pmf;
  for (int l = -two_s; l <= two_s; ++l) {
    double sum = 0.0;
    if (l >= 0) {
      for (int k = l; k <= two_s; ++k) sum += std::exp(-beta * omega * (k - l));
    } else {
      for (int k = 0; k <= two_s + l; ++k) sum += std::exp(-beta * omega * (k - l));
    }
    pmf.support.push_back(omega * l);
    pmf.prob.push_back(sum / (z * levels));
  }
  pmf.validate();
  return pmf;
}

std::pair<RVec, RVec> partial_itt_predict(const BlockStructure& blocks,
                                          const QuantumSystem& sys,
                                          const DensityMatrix& rho0) {
  const int n = sys.dim();
  const std::vector<int> basis_label = blocks.labels(n);
  for (int lab : basis_label)
    if (lab < 0) throw BlockMismatch("partial_itt_predict: partition does not cover basis");
  const std::vector<int> energy_label = energy_block_labels(blocks, sys);

  // pi_k = <alpha_k| rho0 |alpha_k>
  RVec pi(n);
  for (int k = 0; k < n; ++k) {
    const Vec a = sys.observable.eigenvectors.col(k);
    pi(k) = std::max(0.0, (a.adjoint() * rho0.matrix * a)(0, 0).real());
  }
  // c_n = <E_n| rho0 |E_n>
  RVec c(n);
  for (int i = 0; i < n; ++i) {
    const Vec v = sys.hamiltonian.eigenvectors.col(i);
    c(i) = std::max(0.0, (v.adjoint() * rho0.matrix * v)(0, 0).real());
  }

  const int r_count = blocks.block_count();
  RVec pi_mass = RVec::Zero(r_count), c_mass = RVec::Zero(r_count);
  for (int k = 0; k < n; ++k) pi_mass(basis_label[k]) += pi(k);
  for (int i = 0; i < n; ++i) c_mass(energy_label[i]) += c(i);

  RVec pi_tilde(n), p_m(n);
  for (int k = 0; k < n; ++k) {
    const int r = basis_label[k];
    pi_tilde(k) = pi_mass(r) / static_cast<double>(blocks.partition[r].size());
  }
  for (int i = 0; i < n; ++i) {
    const int r = energy_label[i];
    p_m(i) = c_mass(r) / static_cast<double>(blocks.partition[r].size());
  }
  return {pi_tilde, p_m};
}

CharacteristicCurve partial_G(const BlockStructure& blocks, const QuantumSystem& sys,
                              const DensityMatrix& rho0, std::span<const Cplx> us) {
  const int n = sys.dim();
  const std::vector<int> energy_label = energy_block_labels(blocks, sys);
  RVec c(n);
  for (int i = 0; i < n; ++i) {
    const Vec v = sys.hamiltonian.eigenvectors.col(i);
    c(i) = std::max(0.0, (v.adjoint() * rho0.matrix * v)(0, 0).real());
  }
  const RVec& e = sys.hamiltonian.eigenvalues;

  CharacteristicCurve curve;
  curve.kind = CharacteristicCurve::Kind::Analytic;
  for (const Cplx u : us) {
    Cplx g = 0.0;
    for (int r = 0; r < blocks.block_count(); ++r) {
      Cplx tr_uniform = 0.0, tr_rho = 0.0;
      int dim_r = 0;
      for (int i = 0; i < n; ++i) {
        if (energy_label[i] != r) continue;
        ++dim_r;
        tr_uniform += std::exp(Cplx(0.0, 1.0) * u * e(i));
        tr_rho += c(i) * std::exp(Cplx(0.0, -1.0) * u * e(i));
      }
      if (dim_r > 0) g += tr_uniform * tr_rho / static_cast<double>(dim_r);
    }
    curve.points.push_back({u, g, 0.0});
  }
  return curve;
}

HeatPMF empirical_pmf(const HeatEnsemble& ens, const RVec& energies) {
  if (ens.records.empty()) throw EmptyEnsemble("empirical_pmf: no records");
  const double range = energies.maxCoeff() - energies.minCoeff();
  const double eps = 1e-9 * std::max(range, 1e-300);
  std::vector<double> q, w;
  q.reserve(ens.records.size());
  w.reserve(ens.records.size());
  const double inv = 1.0 / static_cast<double>(ens.records.size());
  for (const auto& rec : ens.records) {
    q.push_back(rec.heat);
    w.push_back(inv);
  }
  merge_bins(q, w, eps);
  HeatPMF pmf;
  pmf.support = std::move(q);
  pmf.prob = std::move(w);
  return pmf;
}

std::vector<std::int64_t> final_energy_counts(const HeatEnsemble& ens, int dim) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(dim), 0);
  for (const auto& rec : ens.records) ++counts[static_cast<std::size_t>(rec.m)];
  return counts;
}

std::vector<std::int64_t> initial_energy_counts(const HeatEnsemble& ens, int dim) {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(dim), 0);
  for (const auto& rec : ens.records) ++counts[static_cast<std::size_t>(rec.n)];
  return counts;
}

}  // namespace qmon
