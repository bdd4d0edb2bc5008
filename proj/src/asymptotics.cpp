#include "qmon/asymptotics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "qmon/rng.hpp"
#include "qmon/stats.hpp"

namespace qmon {

namespace {

constexpr double kPi = 3.14159265358979323846;

// largest |lambda| outside the +-1 windows
double subleading_magnitude(const TransitionMatrix& l) {
  const double window = 10 * tol::eig + tol::deg_rel * 2.0;
  double best = 0.0;
  for (int i = 0; i < l.dim; ++i) {
    const double lam = l.spectrum(i);
    if (std::fabs(lam - 1.0) <= window || std::fabs(lam + 1.0) <= window) continue;
    best = std::max(best, std::fabs(lam));
  }
  return best;
}

}  // namespace

ConvergenceReport itt_convergence(const QuantumSystem& sys, const WaitingSpec& waiting,
                                  std::span<const long long> steps, std::uint64_t seed,
                                  int sample_chains) {
  waiting.validate();
  ConvergenceReport rep;
  rep.steps.assign(steps.begin(), steps.end());

  const double tau_ref =
      waiting.kind == WaitingSpec::Kind::Uniform ? 0.5 * (waiting.a + waiting.b) : waiting.a;
  const TransitionMatrix l_ref = transition_matrix(sys, tau_ref);
  const FixedPoint fp = fixed_point(l_ref);
  rep.log_lambda1 = std::log(std::max(subleading_magnitude(l_ref),
                                      std::numeric_limits<double>::min()));

  if (waiting.deterministic_tau()) {
    for (long long m : steps) {
      const RMat chain = matrix_power(l_ref, m);
      const RMat target =
          (m % 2 == 0) ? RMat(fp.projector + fp.neg_projector)
                       : RMat(fp.projector - fp.neg_projector);
      rep.distances.push_back(max_abs(RMat(chain - target)));
    }
  } else {
    // Monte Carlo over waiting-time sequences; the -1 coincidence has zero
    // measure under random taus, so the target is the +1 projector alone.
    for (long long m : steps) {
      double acc = 0.0;
      for (int chain_idx = 0; chain_idx < sample_chains; ++chain_idx) {
        RngStream st(seed, static_cast<std::uint64_t>(chain_idx));
        RMat prod = RMat::Identity(sys.dim(), sys.dim());
        for (long long j = 0; j < m; ++j) {
          const double tau = waiting.kind == WaitingSpec::Kind::Uniform
                                 ? st.uniform(waiting.a, waiting.b)
                                 : st.exponential(waiting.a);
          prod = transition_matrix_raw(sys, tau) * prod;
        }
        acc += max_abs(RMat(prod - fp.projector));
      }
      rep.distances.push_back(acc / sample_chains);
    }
  }

  // decay-rate fit on the points that are clear of the fp floor
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rep.steps.size(); ++i)
    if (rep.distances[i] > 1e-13) {
      xs.push_back(static_cast<double>(rep.steps[i]));
      ys.push_back(std::log(rep.distances[i]));
    }
  if (xs.size() >= 2) rep.fitted_rate = stats::fit_line(xs, ys).slope;
  return rep;
}

ZenoReport zeno_analysis(const QuantumSystem& sys, double total_time,
                         std::span<const long long> steps) {
  if (!(total_time > 0.0)) throw Error("zeno_analysis: total time must be positive");
  ZenoReport rep;
  const int n = sys.dim();
  for (long long m : steps) {
    const double tau = total_time / static_cast<double>(m);
    const TransitionMatrix l = transition_matrix(sys, tau);
    const RMat chain = matrix_power(l, m);
    rep.steps.push_back(m);
    rep.taus.push_back(tau);
    rep.distances.push_back(max_abs(RMat(chain - RMat::Identity(n, n))));
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rep.steps.size(); ++i)
    if (rep.distances[i] > 1e-14) {
      xs.push_back(std::log(static_cast<double>(rep.steps[i])));
      ys.push_back(std::log(rep.distances[i]));
    }
  if (xs.size() >= 2) rep.slope = stats::fit_line(xs, ys).slope;
  return rep;
}

OverlapGenerator extract_generator_R(const QuantumSystem& sys) {
  const int n = sys.dim();
  Mat v = sys.overlap;

  // column gauge: rephase so the diagonal is real positive
  for (int j = 0; j < n; ++j) {
    const Cplx d = v(j, j);
    if (std::abs(d) < 1e-12)
      throw BranchFailure("extract_generator_R: vanishing overlap diagonal (V far from I)");
    v.col(j) *= std::abs(d) / d;
  }

  // principal logarithm of the unitary via its Schur form (diagonal for a
  // normal matrix)
  Eigen::ComplexSchur<Mat> schur(v);
  if (schur.info() != Eigen::Success)
    throw ConvergenceFailure("extract_generator_R: Schur decomposition failed");
  RVec theta(n);
  for (int j = 0; j < n; ++j) {
    const Cplx lam = schur.matrixT()(j, j);
    theta(j) = std::arg(lam);
    if (kPi - std::fabs(theta(j)) < 1e-8)
      throw BranchFailure("extract_generator_R: overlap eigenvalue on the branch cut");
  }
  Mat g = schur.matrixU() * theta.asDiagonal() * schur.matrixU().adjoint();
  g = (g + g.adjoint()) / 2.0;

  OverlapGenerator out;
  out.xi = max_abs(g);
  out.r = out.xi > 0.0 ? Mat(g / out.xi) : Mat(Mat::Zero(n, n));
  return out;
}

EffectiveEvolution delta_operator(const QuantumSystem& sys, double tau) {
  const OverlapGenerator gen = extract_generator_R(sys);
  const int n = sys.dim();
  const RVec& e = sys.hamiltonian.eigenvalues;

  EffectiveEvolution ev;
  ev.xi = gen.xi;
  ev.tau = tau;
  ev.delta = RMat::Zero(n, n);
  // upper triangle mirrored, so symmetry holds exactly
  for (int k = 0; k < n; ++k)
    for (int l = k + 1; l < n; ++l) {
      const double sn = std::sin(0.5 * (e(k) - e(l)) * tau);
      const double w = -4.0 * std::norm(gen.r(k, l)) * sn * sn;
      ev.delta(k, l) = w;
      ev.delta(l, k) = w;
    }
  for (int k = 0; k < n; ++k) {
    double row = 0.0;
    for (int l = 0; l < n; ++l)
      if (l != k) row += ev.delta(k, l);
    ev.delta(k, k) = -row;
  }
  return ev;
}

RMat sym_expm(const RMat& a, double scale) {
  Eigen::SelfAdjointEigenSolver<RMat> es((a + a.transpose()) / 2.0);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("sym_expm: eigensolver failed");
  RVec w(a.rows());
  for (int i = 0; i < a.rows(); ++i) w(i) = std::exp(scale * es.eigenvalues()(i));
  return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

std::vector<EuclideanPoint> euclidean_compare(std::span<const QuantumSystem> family,
                                              std::span<const double> xis, double tau,
                                              double t_eff) {
  if (family.size() != xis.size())
    throw DimensionMismatch("euclidean_compare: family/xi size mismatch");
  std::vector<EuclideanPoint> out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const double xi = xis[i];
    EuclideanPoint pt;
    pt.xi = xi;
    pt.steps = std::llround(t_eff / (xi * xi));
    pt.residual_t = static_cast<double>(pt.steps) * xi * xi - t_eff;

    const EffectiveEvolution ev = delta_operator(family[i], tau);
    // gauge-invariant generator xi_hat^2 Delta_hat, applied M times
    const RMat generator = (ev.xi * ev.xi) * ev.delta;
    const RMat target = sym_expm(generator, -static_cast<double>(pt.steps));
    const TransitionMatrix l = transition_matrix(family[i], tau);
    pt.error = max_abs(RMat(matrix_power(l, pt.steps) - target));
    out.push_back(pt);
  }
  return out;
}

RMat operator_A(double s) {
  const int two_s = static_cast<int>(std::llround(2.0 * s));
  if (two_s < 1 || std::fabs(2.0 * s - two_s) > 1e-12)
    throw InvalidSpin("operator_A: bad spin");
  const int n = two_s + 1;
  RMat a = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double m = s - i;
    a(i, i) = 2.0 * (s * (s + 1) - m * m);
    if (i + 1 < n) a(i, i + 1) = m * (m - 1) - s * (s + 1);  // column holds m' = m-1
    if (i - 1 >= 0) a(i, i - 1) = m * (m + 1) - s * (s + 1);
  }
  return a;
}

double legendre_pk(int k, double x) {
  if (k == 0) return 1.0;
  if (k == 1) return x;
  double pm2 = 1.0, pm1 = x;
  for (int j = 2; j <= k; ++j) {
    const double p = ((2.0 * j - 1.0) * x * pm1 - (j - 1.0) * pm2) / j;
    pm2 = pm1;
    pm1 = p;
  }
  return pm1;
}

std::vector<SpectralCheckRow> A_spectral_check(double s, int k_max) {
  if (k_max < 0) k_max = static_cast<int>(std::floor(std::sqrt(s)));
  const RMat a = operator_A(s);
  const int n = static_cast<int>(a.rows());
  k_max = std::min(k_max, n - 1);
  Eigen::SelfAdjointEigenSolver<RMat> es(a);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("A_spectral_check: eigensolver failed");

  std::vector<SpectralCheckRow> rows;
  for (int k = 0; k <= k_max; ++k) {
    SpectralCheckRow row;
    row.k = k;
    row.eigenvalue = es.eigenvalues()(k);
    row.eigenvalue_error = std::fabs(row.eigenvalue - static_cast<double>(k) * (k + 1));
    RVec leg(n);
    for (int i = 0; i < n; ++i) leg(i) = legendre_pk(k, (s - i) / s);
    leg.normalize();
    row.overlap_deficit = 1.0 - std::fabs(leg.dot(es.eigenvectors().col(k)));
    rows.push_back(row);
  }
  return rows;
}

namespace {

QuantumSystem scaled_spin_system(double s) {
  SpinParameters p;
  p.s = s;
  p.omega = 1.0;
  p.xi = kPi / 2.0;  // observable = Sx
  p.scaled = true;   // H = -Sz/s
  return spin_system(p);
}

struct Curve {
  double tau;
  std::vector<double> x;
  std::vector<double> lambda;

  double max_x() const { return x.back(); }
  double interp(double xx) const {
    const auto it = std::lower_bound(x.begin(), x.end(), xx);
    if (it == x.begin()) return lambda.front();
    if (it == x.end()) return lambda.back();
    const std::size_t j = static_cast<std::size_t>(it - x.begin());
    const double w = (xx - x[j - 1]) / (x[j] - x[j - 1]);
    return (1.0 - w) * lambda[j - 1] + w * lambda[j];
  }
};

// first grid x where the cross-curve sample sd exceeds the threshold
double first_separation(const std::vector<const Curve*>& curves, double grid_step,
                        double threshold, double* lambda_at = nullptr,
                        double* max_disp_below = nullptr, double below = 0.9) {
  double xmax = 0.0;
  for (const Curve* c : curves) xmax = std::max(xmax, c->max_x());
  double worst_below = 0.0;
  for (double xx = grid_step; xx <= xmax; xx += grid_step) {
    double sum = 0.0, sq = 0.0;
    int cnt = 0;
    for (const Curve* c : curves) {
      if (xx > c->max_x()) continue;
      const double v = c->interp(xx);
      sum += v;
      sq += v * v;
      ++cnt;
    }
    if (cnt < 2) continue;
    const double mean = sum / cnt;
    const double var = std::max(0.0, (sq - cnt * mean * mean) / (cnt - 1.0));
    const double sd = std::sqrt(var);
    if (xx < below) worst_below = std::max(worst_below, sd);
    if (sd > threshold) {
      if (lambda_at) *lambda_at = mean;
      if (max_disp_below) *max_disp_below = worst_below;
      return xx;
    }
  }
  if (max_disp_below) *max_disp_below = worst_below;
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

ScalingDataset scaling_collapse(double s, std::span<const double> taus,
                                double dispersion_threshold) {
  if (taus.size() < 3)
    throw InsufficientTaus("scaling_collapse: need at least 3 tau values");
  const QuantumSystem sys = scaled_spin_system(s);
  const int n = sys.dim();

  ScalingDataset ds;
  ds.s = s;
  ds.taus.assign(taus.begin(), taus.end());

  std::vector<Curve> curves(taus.size());
  const auto tau_count = static_cast<int>(taus.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int t = 0; t < tau_count; ++t) {
    const TransitionMatrix l = transition_matrix(sys, taus[t]);
    Curve c;
    c.tau = taus[t];
    for (int k = 0; k < n; ++k) {
      c.x.push_back(taus[t] * k / (2.0 * s));
      c.lambda.push_back(l.spectrum(k));
    }
    curves[t] = std::move(c);
  }

  for (const Curve& c : curves)
    for (std::size_t k = 0; k < c.x.size(); ++k)
      ds.points.push_back({c.tau, static_cast<int>(k), c.x[k], c.lambda[k]});

  const double grid = 0.002;
  std::vector<const Curve*> all;
  for (const Curve& c : curves) all.push_back(&c);
  ds.critical_x = first_separation(all, grid, dispersion_threshold,
                                   &ds.lambda_at_critical, &ds.max_dispersion_below);

  // uncertainty band from all curve subsets of size >= 2
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  const std::size_t count = curves.size();
  for (std::size_t mask = 1; mask < (std::size_t(1) << count); ++mask) {
    std::vector<const Curve*> subset;
    for (std::size_t i = 0; i < count; ++i)
      if (mask & (std::size_t(1) << i)) subset.push_back(&curves[i]);
    if (subset.size() < 2) continue;
    const double est = first_separation(subset, grid, dispersion_threshold);
    if (std::isnan(est)) continue;
    lo = std::min(lo, est);
    hi = std::max(hi, est);
  }
  ds.critical_lo = std::isfinite(lo) ? lo : ds.critical_x;
  ds.critical_hi = hi > 0.0 ? hi : ds.critical_x;

  // small-x quadratic coefficient, pooled over all curves
  double num = 0.0, den = 0.0;
  for (const auto& pt : ds.points)
    if (pt.x > 0.0 && pt.x <= 0.25) {
      num += (1.0 - pt.lambda) * pt.x * pt.x;
      den += pt.x * pt.x * pt.x * pt.x;
    }
  ds.quad_coeff = den > 0.0 ? num / den : 0.0;
  return ds;
}

RMat collapse_eigenvectors(double s, double tau) {
  const QuantumSystem sys = scaled_spin_system(s);
  const TransitionMatrix l = transition_matrix(sys, tau);
  return l.eigenbasis;
}

std::vector<LimitOrderRow> limit_order_study(std::span<const double> s_list,
                                             std::span<const long long> m_list,
                                             double tau, std::optional<double> t_eff) {
  if (s_list.empty() || m_list.empty())
    throw Error("limit_order_study: empty grids");
  std::vector<LimitOrderRow> rows;

  // M -> inf at fixed s: approach to the uniform projector
  {
    const double s = s_list.front();
    const QuantumSystem sys = scaled_spin_system(s);
    const TransitionMatrix l = transition_matrix(sys, tau);
    const int n = sys.dim();
    const RMat uniform = RMat::Constant(n, n, 1.0 / n);
    for (long long m : m_list)
      rows.push_back({"uniform", s, m, max_abs(RMat(matrix_power(l, m) - uniform))});
  }

  // s -> inf at fixed M: approach to the identity
  {
    const long long m = m_list.front();
    for (double s : s_list) {
      const QuantumSystem sys = scaled_spin_system(s);
      const TransitionMatrix l = transition_matrix(sys, tau);
      const int n = sys.dim();
      rows.push_back(
          {"identity", s, m, max_abs(RMat(matrix_power(l, m) - RMat::Identity(n, n)))});
    }
  }

  // joint limit at fixed t = M tau^2 / (4 s^2): approach to exp(-A t)
  if (t_eff.has_value()) {
    for (double s : s_list) {
      const auto m = static_cast<long long>(
          std::llround(*t_eff * 4.0 * s * s / (tau * tau)));
      const QuantumSystem sys = scaled_spin_system(s);
      const TransitionMatrix l = transition_matrix(sys, tau);
      const RMat target = sym_expm(operator_A(s), -*t_eff);
      rows.push_back({"euclidean", s, m, max_abs(RMat(matrix_power(l, m) - target))});
    }
  }
  return rows;
}

}  // namespace qmon
