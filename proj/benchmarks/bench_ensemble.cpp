// Compares the OpenMP ensemble kernel against the serial reference and
// checks that they agree bit for bit.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qmon/hilbert.hpp"
#include "qmon/protocol.hpp"

using namespace qmon;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool identical(const HeatEnsemble& a, const HeatEnsemble& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i];
    const auto& y = b.records[i];
    if (x.n != y.n || x.m != y.m || x.heat != y.heat) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  long long realizations = 400000;
  if (argc > 1) realizations = std::atoll(argv[1]);

  auto [sys, rho0] = random_system(15, 42);
  ProtocolConfig cfg;
  cfg.measurements = 20;
  cfg.waiting = WaitingSpec::fixed(1.0);
  cfg.ensemble_size = realizations;
  cfg.seed = 7;

  std::printf("ensemble benchmark: N=15, M=20, %lld trajectories\n", realizations);

  auto t0 = std::chrono::steady_clock::now();
  const HeatEnsemble serial = reference::run_ensemble(sys, rho0, cfg);
  const double t_serial = seconds_since(t0);
  std::printf("  serial reference: %.3f s (%.2f Mtraj/s)\n", t_serial,
              realizations / t_serial / 1e6);

#ifdef _OPENMP
  const int max_threads = omp_get_max_threads();
#else
  const int max_threads = 1;
#endif
  for (int workers = 1; workers <= max_threads; workers *= 2) {
    t0 = std::chrono::steady_clock::now();
    const HeatEnsemble parallel = run_ensemble(sys, rho0, cfg, workers);
    const double t_par = seconds_since(t0);
    std::printf("  openmp x%-2d      : %.3f s (%.2f Mtraj/s, speedup %.2f) %s\n", workers,
                t_par, realizations / t_par / 1e6, t_serial / t_par,
                identical(serial, parallel) ? "bit-identical" : "MISMATCH");
    if (!identical(serial, parallel)) return 1;
  }
  return 0;
}
