#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "qmon/asymptotics.hpp"
#include "qmon/rng.hpp"

using namespace qmon;

namespace {

constexpr double kPi = 3.14159265358979323846;

QuantumSystem tilted_spin(double s, double xi, double omega = 1.0) {
  SpinParameters p;
  p.s = s;
  p.omega = omega;
  p.xi = xi;
  return spin_system(p);
}

}  // namespace

TEST_CASE("itt_convergence on a generic five-level system") {
  const auto [sys, rho] = random_system(5, 5);
  (void)rho;
  const std::vector<long long> steps = {5, 10, 20, 40};
  const auto rep = itt_convergence(sys, WaitingSpec::fixed(1.0), steps);
  REQUIRE(rep.distances.size() == 4);
  CHECK(rep.distances[2] < 1e-3);
  for (std::size_t i = 1; i < 4; ++i) CHECK(rep.distances[i] < rep.distances[i - 1]);
  CHECK(std::fabs(rep.fitted_rate - rep.log_lambda1) < 0.1 * std::fabs(rep.log_lambda1));
}

TEST_CASE("itt_convergence handles the lambda = -1 parity case") {
  // Bloch angle pi/2, tau = pi/gap: the chain alternates between two limits
  const double gap = 1.0;
  Mat h(2, 2);
  h << 0.0, 0.5 * gap, 0.5 * gap, 0.0;
  HermitianOperator obs;
  obs.dim = 2;
  obs.matrix = Mat::Zero(2, 2);
  obs.matrix(1, 1) = 1.0;
  obs.eigenvalues = RVec(2);
  obs.eigenvalues << 0.0, 1.0;
  obs.eigenvectors = Mat::Identity(2, 2);
  const auto sys = make_system(spectral_decompose(h), std::move(obs));

  const std::vector<long long> steps = {3, 4, 7, 8};
  const auto rep = itt_convergence(sys, WaitingSpec::fixed(kPi / gap), steps);
  for (double d : rep.distances) CHECK(d < 1e-10);
}

TEST_CASE("itt_convergence is exactly zero for frozen dynamics") {
  const auto sys = tilted_spin(1.0, 0.0);
  const std::vector<long long> steps = {1, 10, 100};
  const auto rep = itt_convergence(sys, WaitingSpec::fixed(1.0), steps);
  for (double d : rep.distances) CHECK(d < 1e-12);
}

TEST_CASE("itt_convergence with random waiting times") {
  const auto [sys, rho] = random_system(4, 23);
  (void)rho;
  const std::vector<long long> steps = {50, 200};
  const auto rep = itt_convergence(sys, WaitingSpec::uniform(0.5, 1.5), steps, 7, 8);
  CHECK(rep.distances[1] < rep.distances[0]);
  CHECK(rep.distances[1] < 1e-4);
}

TEST_CASE("zeno freezing: inverse-M decay and quadratic single-step law") {
  const auto [sys, rho] = random_system(4, 7);
  (void)rho;
  const std::vector<long long> steps = {200, 2000};
  const auto rep = zeno_analysis(sys, 1.0, steps);
  CHECK(rep.distances[1] < rep.distances[0] / 5.0);

  // || L(tau) - I || = O(tau^2)
  std::vector<double> ratio;
  for (double tau : {0.1, 0.05, 0.025}) {
    const auto l = transition_matrix(sys, tau);
    ratio.push_back(max_abs(RMat(l.matrix - RMat::Identity(4, 4))) / (tau * tau));
  }
  CHECK(ratio[0] == doctest::Approx(ratio[2]).epsilon(0.15));
}

TEST_CASE("zeno distances vanish for frozen dynamics") {
  const auto sys = tilted_spin(1.5, 0.0);
  const std::vector<long long> steps = {10, 100};
  const auto rep = zeno_analysis(sys, 1.0, steps);
  for (double d : rep.distances) CHECK(d < 1e-12);
}

TEST_CASE("extract_generator_R: identity overlap") {
  const auto sys = tilted_spin(2.0, 0.0);
  const auto gen = extract_generator_R(sys);
  CHECK(gen.xi == doctest::Approx(0.0).scale(1.0));
  CHECK(max_abs(gen.r) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("extract_generator_R recovers the spin rotation generator") {
  const double xi0 = 0.03, s = 2.0;
  const auto sys = tilted_spin(s, xi0);
  const auto gen = extract_generator_R(sys);

  // closed form: xi R = xi0 Sy
  const auto ops = spin_operators(s);
  const Mat expected = xi0 * ops.sy.matrix;
  CHECK(max_abs(Mat(gen.xi * gen.r - expected)) < 1e-12);
  CHECK(max_abs(gen.r) == doctest::Approx(1.0).epsilon(1e-12));
  // Hermitian
  CHECK(max_abs(Mat(gen.r - gen.r.adjoint())) < 1e-13);
}

TEST_CASE("generator extraction is invariant under column rephasing") {
  const auto base = tilted_spin(2.0, 0.04);
  const auto ev0 = delta_operator(base, 1.3);

  QuantumSystem rotated = base;
  RngStream st(3, 0);
  for (int j = 0; j < 5; ++j) {
    const double phase = st.uniform(0.0, 2 * kPi);
    rotated.overlap.col(j) *= std::exp(Cplx(0.0, phase));
    rotated.hamiltonian.eigenvectors.col(j) *= std::exp(Cplx(0.0, phase));
  }
  const auto ev1 = delta_operator(rotated, 1.3);
  const RMat inv0 = (ev0.xi * ev0.xi) * ev0.delta;
  const RMat inv1 = (ev1.xi * ev1.xi) * ev1.delta;
  CHECK(max_abs(RMat(inv0 - inv1)) < 1e-12);
}

TEST_CASE("extract_generator_R branch failures") {
  // vanishing diagonal: a quarter rotation
  QuantumSystem sys = tilted_spin(0.5, 0.0);
  sys.overlap << 0.0, -1.0, 1.0, 0.0;
  CHECK_THROWS_AS(extract_generator_R(sys), BranchFailure);

  // eigenvalue hugging the negative real axis with a spread eigenvector, so
  // no column rephasing can move it off the cut
  QuantumSystem sys2 = tilted_spin(1.0, 0.0);
  Vec v(3);
  v << 1.0, 1.0, 1.0;
  v /= std::sqrt(3.0);
  const Cplx lam = std::exp(Cplx(0.0, kPi - 1e-12));
  sys2.overlap = Mat::Identity(3, 3) + (lam - 1.0) * (v * v.adjoint());
  // diagonal entries stay near +1/3, so the gauge fix barely rotates them
  CHECK_THROWS_AS(extract_generator_R(sys2), BranchFailure);
}

TEST_CASE("delta_operator structure") {
  const auto sys = tilted_spin(2.0, 0.05);

  const auto at_zero = delta_operator(sys, 0.0);
  CHECK(max_abs(at_zero.delta) == 0.0);

  const auto ev = delta_operator(sys, 0.9);
  const int n = 5;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      row += ev.delta(i, j);
      if (i != j) CHECK(ev.delta(i, j) <= 0.0);
    }
    CHECK(row == doctest::Approx(0.0).scale(1.0));  // exact zero mode
  }
  CHECK(max_abs(RMat(ev.delta - ev.delta.transpose())) == 0.0);
}

TEST_CASE("delta matches the closed-form tridiagonal generator") {
  const double s = 2.0, omega = 1.0, tau = 1.0;
  const RMat a = operator_A(s);
  const double sn = std::sin(omega * tau / 2.0);
  for (double xi0 : {0.04, 0.01}) {
    const auto sys = tilted_spin(s, xi0, omega);
    const auto ev = delta_operator(sys, tau);
    const RMat invariant = (ev.xi * ev.xi) * ev.delta;
    CHECK(max_abs(RMat(invariant - (xi0 * xi0 * sn * sn) * a)) < 1e-10);
  }
}

TEST_CASE("L deviates from I - xi^2 Delta at cubic order or better") {
  const double tau = 1.0;
  std::vector<double> devs;
  for (double xi0 : {0.04, 0.02, 0.01}) {
    const auto sys = tilted_spin(2.0, xi0);
    const auto l = transition_matrix(sys, tau);
    const auto ev = delta_operator(sys, tau);
    const RMat approx = RMat::Identity(5, 5) - (ev.xi * ev.xi) * ev.delta;
    devs.push_back(max_abs(RMat(l.matrix - approx)));
  }
  CHECK(devs[0] / devs[1] > 6.0);
  CHECK(devs[1] / devs[2] > 6.0);
}

TEST_CASE("euclidean_compare error decreases with 1/xi") {
  const std::vector<double> xis = {0.04, 0.02};
  std::vector<QuantumSystem> family;
  for (double xi : xis) family.push_back(tilted_spin(2.0, xi));
  const auto pts = euclidean_compare(family, xis, 1.0, 1.0);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].error > pts[1].error);
  CHECK(pts[0].residual_t == doctest::Approx(0.0).scale(1.0));
  CHECK(pts[1].steps == 2500);
}

TEST_CASE("euclidean limits: short and long effective times") {
  const std::vector<double> xis = {0.02};
  std::vector<QuantumSystem> family = {tilted_spin(2.0, 0.02)};

  // t -> 0: both sides near the identity
  const auto short_t = euclidean_compare(family, xis, 1.0, 4e-4);
  CHECK(short_t[0].error < 1e-4);

  // t large: the chain lands on the uniform projector
  const auto ev = delta_operator(family[0], 1.0);
  const RMat target = sym_expm((ev.xi * ev.xi) * ev.delta, -125000.0);  // t = 50
  CHECK(max_abs(RMat(target - RMat::Constant(5, 5, 0.2))) < 1e-8);
  const auto long_t = euclidean_compare(family, xis, 1.0, 50.0);
  const auto l = transition_matrix(family[0], 1.0);
  const RMat chain = matrix_power(l, long_t[0].steps);
  CHECK(max_abs(RMat(chain - RMat::Constant(5, 5, 0.2))) < 1e-4);
}

TEST_CASE("operator_A: closed form and zero mode") {
  const RMat a_half = operator_A(0.5);
  CHECK(a_half(0, 0) == doctest::Approx(1.0));
  CHECK(a_half(0, 1) == doctest::Approx(-1.0));
  CHECK(a_half(1, 0) == doctest::Approx(-1.0));
  CHECK(a_half(1, 1) == doctest::Approx(1.0));
  Eigen::SelfAdjointEigenSolver<RMat> es(a_half);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.0).scale(1.0));
  CHECK(es.eigenvalues()(1) == doctest::Approx(2.0));

  for (double s : {0.5, 2.0, 20.0, 150.0, 300.0}) {
    const RMat a = operator_A(s);
    CHECK((a.rowwise().sum()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(max_abs(RMat(a - a.transpose())) == 0.0);
    Eigen::SelfAdjointEigenSolver<RMat> solver(a);
    CHECK(solver.eigenvalues()(0) > -1e-9 * a.norm());
  }
}

TEST_CASE("operator_A spectrum approaches k(k+1)") {
  const RMat a = operator_A(20.0);
  Eigen::SelfAdjointEigenSolver<RMat> es(a);
  for (int k = 0; k <= 3; ++k)
    CHECK(std::fabs(es.eigenvalues()(k) - k * (k + 1.0)) < 1e-8);
}

TEST_CASE("legendre recurrence against closed forms") {
  for (double x : {-0.9, -0.2, 0.0, 0.5, 1.0}) {
    CHECK(legendre_pk(0, x) == 1.0);
    CHECK(legendre_pk(1, x) == x);
    CHECK(legendre_pk(2, x) == doctest::Approx(0.5 * (3 * x * x - 1)).epsilon(1e-14));
    CHECK(legendre_pk(3, x) == doctest::Approx(0.5 * (5 * x * x * x - 3 * x)).epsilon(1e-14));
  }
}

TEST_CASE("A_spectral_check: the zero mode is exact, deficits shrink with s") {
  const auto rows100 = A_spectral_check(100.0, 5);
  CHECK(rows100[0].eigenvalue_error < 1e-9);
  CHECK(rows100[0].overlap_deficit < 1e-9);
  CHECK(rows100[3].eigenvalue_error < 0.5);
  CHECK(rows100[3].overlap_deficit < 1e-2);

  const auto rows50 = A_spectral_check(50.0, 5);
  const auto rows200 = A_spectral_check(200.0, 5);
  for (int k = 2; k <= 5; ++k) {
    CHECK(rows50[static_cast<std::size_t>(k)].overlap_deficit >=
          rows100[static_cast<std::size_t>(k)].overlap_deficit);
    CHECK(rows100[static_cast<std::size_t>(k)].overlap_deficit >=
          rows200[static_cast<std::size_t>(k)].overlap_deficit);
  }
}

TEST_CASE("A eigenvectors carry Legendre parity") {
  const RMat a = operator_A(100.0);
  Eigen::SelfAdjointEigenSolver<RMat> es(a);
  const int n = 201;
  for (int k = 0; k <= 5; ++k) {
    const RVec v = es.eigenvectors().col(k);
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, std::fabs(v(i) - sign * v(n - 1 - i)));
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("scaling_collapse at moderate s") {
  const std::vector<double> taus = {0.5, 1.0, 2.0, 4.0};
  const auto ds = scaling_collapse(60.0, taus);
  CHECK(ds.points.size() == 4 * 121);
  for (const auto& pt : ds.points) {
    CHECK(pt.lambda <= 1.0 + 1e-10);
    CHECK(pt.lambda >= -1.0 - 1e-10);
    CHECK(pt.x == doctest::Approx(pt.tau * pt.k / 120.0).epsilon(1e-12));
  }
  CHECK(ds.quad_coeff == doctest::Approx(1.0).epsilon(0.1));
  CHECK(ds.critical_x > 0.5);
  CHECK(ds.critical_x < 1.2);
  CHECK(ds.critical_lo <= ds.critical_x);
  CHECK(ds.critical_hi >= ds.critical_x);

  const std::vector<double> two = {0.5, 1.0};
  CHECK_THROWS_AS(scaling_collapse(60.0, two), InsufficientTaus);
}

TEST_CASE("collapse eigenvector matrix is orthogonal") {
  const RMat v = collapse_eigenvectors(20.0, 1.0);
  CHECK(max_abs(RMat(v.transpose() * v - RMat::Identity(41, 41))) < 1e-10);
}

TEST_CASE("limit_order_study shows the three monotone trends") {
  const std::vector<double> s_list = {10.0, 20.0, 40.0};
  const std::vector<long long> m_list = {10, 100, 1000};
  const auto rows = limit_order_study(s_list, m_list, 0.2, 0.5);
  std::vector<double> uniform, identity, euclid;
  for (const auto& r : rows) {
    if (r.branch == "uniform") uniform.push_back(r.distance);
    if (r.branch == "identity") identity.push_back(r.distance);
    if (r.branch == "euclidean") euclid.push_back(r.distance);
  }
  REQUIRE(uniform.size() == 3);
  REQUIRE(identity.size() == 3);
  REQUIRE(euclid.size() == 3);
  for (int i = 1; i < 3; ++i) {
    CHECK(uniform[i] < uniform[i - 1]);
    CHECK(identity[i] < identity[i - 1]);
    CHECK(euclid[i] < euclid[i - 1]);
  }
}
