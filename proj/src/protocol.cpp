#include "qmon/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qmon/stats.hpp"
#include "qmon/transition.hpp"

namespace qmon {

void WaitingSpec::validate() const {
  switch (kind) {
    case Kind::Fixed:
      if (!(a > 0.0)) throw ConfigError("waiting spec: fixed tau must be positive");
      break;
    case Kind::Uniform:
      if (!(a > 0.0) || !(b >= a))
        throw ConfigError("waiting spec: uniform bounds need 0 < a <= b");
      break;
    case Kind::Exponential:
      if (!(a > 0.0)) throw ConfigError("waiting spec: exponential mean must be positive");
      break;
    case Kind::Zeno:
      if (!(a > 0.0)) throw ConfigError("waiting spec: total time must be positive");
      break;
  }
}

void ProtocolConfig::validate() const {
  if (measurements < 1) throw ConfigError("protocol: M must be >= 1");
  if (ensemble_size < 1) throw ConfigError("protocol: ensemble size must be >= 1");
  waiting.validate();
}

std::uint64_t fingerprint(const ProtocolConfig& cfg) {
  std::uint64_t h = stats::fnv1a(&cfg.measurements, sizeof cfg.measurements);
  h = stats::fnv1a(&cfg.waiting.kind, sizeof cfg.waiting.kind, h);
  h = stats::fnv1a(&cfg.waiting.a, sizeof cfg.waiting.a, h);
  h = stats::fnv1a(&cfg.waiting.b, sizeof cfg.waiting.b, h);
  h = stats::fnv1a(&cfg.ensemble_size, sizeof cfg.ensemble_size, h);
  h = stats::fnv1a(&cfg.seed, sizeof cfg.seed, h);
  return h;
}

namespace {

void check_total(double total, const char* what) {
  if (std::fabs(total - 1.0) > tol::prob)
    throw ProbabilityUnderflow(std::string(what) + ": distribution total " +
                               std::to_string(total));
}

}  // namespace

TrajectorySampler::TrajectorySampler(const QuantumSystem& sys, const DensityMatrix& rho0,
                                     const ProtocolConfig& cfg)
    : dim_(sys.dim()), cfg_(cfg) {
  cfg.validate();
  if (rho0.dim != dim_) throw DimensionMismatch("sampler: rho0 dimension mismatch");

  energies_ = sys.hamiltonian.eigenvalues;
  c_ = RVec(dim_);
  for (int n = 0; n < dim_; ++n) {
    const Vec en = sys.hamiltonian.eigenvectors.col(n);
    c_(n) = std::max(0.0, (en.adjoint() * rho0.matrix * en)(0, 0).real());
  }
  check_total(c_.sum(), "energy populations");

  w_ = sys.overlap.cwiseAbs2();
  wt_ = w_.transpose();
  for (int j = 0; j < dim_; ++j) {
    check_total(w_.col(j).sum(), "overlap column");
    check_total(wt_.col(j).sum(), "overlap row");
  }

  fixed_tau_ = cfg.waiting.deterministic_tau();
  if (fixed_tau_) {
    if (cfg.measurements > 1) {
      const double tau = cfg.waiting.kind == WaitingSpec::Kind::Zeno
                             ? cfg.waiting.a / cfg.measurements
                             : cfg.waiting.a;
      chain_ = transition_matrix_raw(sys, tau);
      for (int j = 0; j < dim_; ++j) check_total(chain_.col(j).sum(), "chain column");
    }
  } else {
    overlap_ = sys.overlap;
  }
}

void TrajectorySampler::step_column(double tau, int from, RVec& out) const {
  // amplitude vector a = V Lambda(tau) V^dag e_from; probabilities |a|^2
  Vec t(dim_);
  for (int j = 0; j < dim_; ++j)
    t(j) = std::conj(overlap_(from, j)) * std::exp(Cplx(0.0, -energies_(j) * tau));
  const Vec a = overlap_ * t;
  out = a.cwiseAbs2();
  check_total(out.sum(), "step column");
}

TrajectoryRecord TrajectorySampler::sample(RngStream& stream) const {
  TrajectoryRecord rec;
  const int m_count = cfg_.measurements;

  rec.n = stream.categorical({c_.data(), static_cast<std::size_t>(dim_)}, c_.sum());

  // first observable measurement, conditioned on |E_n>
  int k = stream.categorical(
      {w_.col(rec.n).data(), static_cast<std::size_t>(dim_)}, w_.col(rec.n).sum());
  if (cfg_.store_outcomes) {
    rec.outcomes.reserve(m_count);
    rec.outcomes.push_back(k);
  }

  RVec col;
  for (int j = 2; j <= m_count; ++j) {
    if (fixed_tau_) {
      k = stream.categorical({chain_.col(k).data(), static_cast<std::size_t>(dim_)},
                             chain_.col(k).sum());
    } else {
      const double tau = cfg_.waiting.kind == WaitingSpec::Kind::Uniform
                             ? stream.uniform(cfg_.waiting.a, cfg_.waiting.b)
                             : stream.exponential(cfg_.waiting.a);
      step_column(tau, k, col);
      k = stream.categorical({col.data(), static_cast<std::size_t>(dim_)}, col.sum());
    }
    if (cfg_.store_outcomes) rec.outcomes.push_back(k);
  }

  rec.m = stream.categorical({wt_.col(k).data(), static_cast<std::size_t>(dim_)},
                             wt_.col(k).sum());
  rec.heat = energies_(rec.m) - energies_(rec.n);
  return rec;
}

TrajectoryRecord run_trajectory(const QuantumSystem& sys, const DensityMatrix& rho0,
                                const ProtocolConfig& cfg, RngStream& stream) {
  return TrajectorySampler(sys, rho0, cfg).sample(stream);
}

HeatEnsemble run_ensemble(const QuantumSystem& sys, const DensityMatrix& rho0,
                          const ProtocolConfig& cfg, int workers) {
  const TrajectorySampler sampler(sys, rho0, cfg);
  HeatEnsemble ens;
  ens.system_fingerprint = fingerprint(sys);
  ens.config_fingerprint = fingerprint(cfg);
  ens.records.resize(static_cast<std::size_t>(cfg.ensemble_size));

  const long long total = cfg.ensemble_size;
#ifdef _OPENMP
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
  for (long long i = 0; i < total; ++i) {
    RngStream stream(cfg.seed, static_cast<std::uint64_t>(i));
    ens.records[static_cast<std::size_t>(i)] = sampler.sample(stream);
  }
#else
  (void)workers;
  for (long long i = 0; i < total; ++i) {
    RngStream stream(cfg.seed, static_cast<std::uint64_t>(i));
    ens.records[static_cast<std::size_t>(i)] = sampler.sample(stream);
  }
#endif
  return ens;
}

namespace reference {

HeatEnsemble run_ensemble(const QuantumSystem& sys, const DensityMatrix& rho0,
                          const ProtocolConfig& cfg) {
  const TrajectorySampler sampler(sys, rho0, cfg);
  HeatEnsemble ens;
  ens.system_fingerprint = fingerprint(sys);
  ens.config_fingerprint = fingerprint(cfg);
  ens.records.reserve(static_cast<std::size_t>(cfg.ensemble_size));
  for (long long i = 0; i < cfg.ensemble_size; ++i) {
    RngStream stream(cfg.seed, static_cast<std::uint64_t>(i));
    ens.records.push_back(sampler.sample(stream));
  }
  return ens;
}

}  // namespace reference

void merge_bins(std::vector<double>& values, std::vector<double>& weights, double eps) {
  if (values.empty()) return;
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> v, w;
  for (std::size_t idx : order) {
    if (!v.empty() && values[idx] - v.back() <= eps) {
      // weighted mean keeps the representative value stable
      const double tot = w.back() + weights[idx];
      if (tot > 0.0) v.back() = (v.back() * w.back() + values[idx] * weights[idx]) / tot;
      w.back() = tot;
    } else {
      v.push_back(values[idx]);
      w.push_back(weights[idx]);
    }
  }
  values = std::move(v);
  weights = std::move(w);
}

namespace {

ExactDistribution joint_to_distribution(const RMat& joint, const RVec& energies) {
  const int n = static_cast<int>(energies.size());
  const double range = energies.maxCoeff() - energies.minCoeff();
  const double eps = 1e-9 * std::max(range, 1e-300);
  std::vector<double> q, p;
  q.reserve(static_cast<std::size_t>(n) * n);
  p.reserve(static_cast<std::size_t>(n) * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      q.push_back(energies(b) - energies(a));
      p.push_back(joint(a, b));
    }
  merge_bins(q, p, eps);
  ExactDistribution out;
  out.heat = std::move(q);
  out.prob = std::move(p);
  out.joint = joint;
  return out;
}

RVec energy_populations(const QuantumSystem& sys, const DensityMatrix& rho0) {
  const int n = sys.dim();
  RVec c(n);
  for (int i = 0; i < n; ++i) {
    const Vec en = sys.hamiltonian.eigenvectors.col(i);
    c(i) = std::max(0.0, (en.adjoint() * rho0.matrix * en)(0, 0).real());
  }
  check_total(c.sum(), "energy populations");
  return c;
}

}  // namespace

ExactDistribution exact_distribution(const QuantumSystem& sys, const DensityMatrix& rho0,
                                     int measurements, double tau) {
  if (measurements < 1) throw ConfigError("exact_distribution: M must be >= 1");
  const int n = sys.dim();
  const RVec c = energy_populations(sys, rho0);
  const RMat w = sys.overlap.cwiseAbs2();

  RMat middle = RMat::Identity(n, n);
  if (measurements > 1) {
    const RMat l = transition_matrix_raw(sys, tau);
    for (int j = 1; j < measurements; ++j) middle = l * middle;
  }
  // joint(n, m) = c_n sum_{k1,kM} W(k1,n) middle(kM,k1) W(kM,m)
  const RMat bridge = w.transpose() * middle.transpose() * w;  // (n, m)
  const RMat joint = c.asDiagonal() * bridge;
  return joint_to_distribution(joint, sys.hamiltonian.eigenvalues);
}

ExactDistribution exact_distribution_enumerated(const QuantumSystem& sys,
                                                const DensityMatrix& rho0,
                                                int measurements, double tau) {
  const int n = sys.dim();
  if (n > 6 || measurements > 6)
    throw TooLarge("exact_distribution_enumerated: bounded to N <= 6, M <= 6");
  if (measurements < 1) throw ConfigError("exact_distribution: M must be >= 1");
  const RVec c = energy_populations(sys, rho0);
  const RMat w = sys.overlap.cwiseAbs2();
  const RMat l = measurements > 1 ? transition_matrix_raw(sys, tau) : RMat();

  RMat joint = RMat::Zero(n, n);
  std::vector<int> k(static_cast<std::size_t>(measurements), 0);
  while (true) {
    double seq_weight = 1.0;
    for (int j = 1; j < measurements; ++j) seq_weight *= l(k[j], k[j - 1]);
    if (seq_weight > 0.0) {
      const int k_first = k.front(), k_last = k.back();
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          joint(a, b) += c(a) * w(k_first, a) * seq_weight * w(k_last, b);
    }
    int pos = measurements - 1;
    while (pos >= 0 && ++k[pos] == n) k[pos--] = 0;
    if (pos < 0) break;
  }
  return joint_to_distribution(joint, sys.hamiltonian.eigenvalues);
}

}  // namespace qmon
