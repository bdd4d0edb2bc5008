#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qmon/hilbert.hpp"
#include "qmon/protocol.hpp"
#include "qmon/types.hpp"

namespace qmon {

// Named presets: fig1a (N=5 random, M=20, tau=1), fig1b (N=15 random, M=20,
// tau=1), spin72 (s=7/2, omega=1, Sx measured, M=25, thermal initial state).
struct Preset {
  QuantumSystem system;
  DensityMatrix rho0;
  ProtocolConfig config;
  bool spin = false;      // spin presets also emit the analytic heat PMF
  double spin_s = 0.0;
  double spin_omega = 1.0;
  double beta = 0.0;
};

Preset resolve_preset(const std::string& name, std::uint64_t seed,
                      std::optional<double> beta);

struct SimulateSpec {
  std::string name = "sim";
  std::string preset;                    // preset name, or empty with system_file
  std::string system_file;               // JSON system document
  std::optional<double> beta;            // thermal initial state when set
  int measurements = 0;                  // 0 keeps the preset/file default
  std::optional<WaitingSpec> waiting;    // overrides the preset's waiting spec
  long long realizations = 100000;
  std::uint64_t seed = 1;
  int workers = 0;
  std::filesystem::path output_dir = "out_sim";
  bool write_trajectories = true;
  int eps_points = 21;                   // G(eps) grid over [-eps_range, eps_range]
  double eps_range = 1.0;
};

// Runs the monitoring protocol and writes trajectories.csv, histogram.csv,
// gcurve.csv, gcurve_analytic.csv (+ spin_pmf.csv for spin systems), a
// gnuplot script and manifest.json into output_dir.
void run_simulate(const SimulateSpec& spec);

struct SpectrumSpec {
  int n = 0;        // random system when > 0
  double s = 0.0;   // spin system (omega = 1, Sx measured) when > 0
  std::uint64_t seed = 1;
  double tau = 1.0;
  std::filesystem::path output_dir = "out_spectrum";
};
void run_analyze_spectrum(const SpectrumSpec& spec);

struct CollapseSpec {
  double s = 300.0;
  std::vector<double> taus = {0.5, 1.0, 2.0, 4.0};
  double dispersion_threshold = 0.01;
  bool write_eigenvectors = false;
  std::filesystem::path output_dir = "out_collapse";
};
void run_analyze_collapse(const CollapseSpec& spec);

struct ConvergenceSpec {
  int n = 5;
  std::uint64_t seed = 1;
  WaitingSpec waiting = WaitingSpec::fixed(1.0);
  std::vector<long long> steps = {5, 10, 20, 40};
  std::filesystem::path output_dir = "out_convergence";
};
void run_analyze_convergence(const ConvergenceSpec& spec);

struct ZenoSpec {
  int n = 4;
  std::uint64_t seed = 1;
  double total_time = 1.0;
  std::vector<long long> steps = {100, 316, 1000, 3162, 10000};
  std::filesystem::path output_dir = "out_zeno";
};
void run_analyze_zeno(const ZenoSpec& spec);

struct QuasiSpec {
  double s = 2.0;
  double omega = 1.0;
  double tau = 1.0;
  double t_eff = 1.0;
  std::vector<double> xis = {0.04, 0.02, 0.01};
  std::filesystem::path output_dir = "out_quasi";
};
void run_analyze_quasi(const QuasiSpec& spec);

struct LimitsSpec {
  std::vector<double> s_list = {20, 80, 320};
  std::vector<long long> m_list = {10, 100, 1000, 10000};
  double tau = 0.2;
  std::optional<double> t_eff = 0.5;
  std::filesystem::path output_dir = "out_limits";
};
void run_analyze_limits(const LimitsSpec& spec);

struct OscillatorSpec {
  int n_max = 3;
  double omega1 = 1.0;
  double omega2 = 1.4142135623730951;
  double tau = 1.0;
  std::filesystem::path output_dir = "out_oscillator";
};
void run_analyze_oscillator(const OscillatorSpec& spec);

}  // namespace qmon
