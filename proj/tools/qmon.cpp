// Command-line front end: every experiment as a reproducible, seeded run.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qmon/experiments.hpp"
#include "qmon/io.hpp"
#include "qmon/types.hpp"

namespace {

using qmon::ConfigError;
using qmon::WaitingSpec;

// Values from --config FILE act as defaults; explicit flags win.
nlohmann::json load_config(const std::string& path) {
  const std::string text = qmon::io::read_text(path);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos)
    throw ConfigError("config file '" + path + "' is empty");
  return nlohmann::json::parse(text);
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& target, const CLI::Option* opt) {
  if (opt != nullptr && opt->count() > 0) return;  // flag given explicitly
  if (j.contains(key)) target = j.at(key).get<T>();
}

WaitingSpec parse_waiting(const std::string& tau_fixed, const std::string& tau_uniform,
                          const std::string& tau_exp, const std::string& tau_zeno) {
  const int given = !tau_fixed.empty() + !tau_uniform.empty() + !tau_exp.empty() +
                    !tau_zeno.empty();
  if (given > 1) throw ConfigError("give at most one waiting-time option");
  if (!tau_fixed.empty()) return WaitingSpec::fixed(std::stod(tau_fixed));
  if (!tau_exp.empty()) return WaitingSpec::exponential(std::stod(tau_exp));
  if (!tau_zeno.empty()) return WaitingSpec::zeno(std::stod(tau_zeno));
  const auto comma = tau_uniform.find(',');
  if (comma == std::string::npos)
    throw ConfigError("--tau-uniform expects 'lo,hi'");
  return WaitingSpec::uniform(std::stod(tau_uniform.substr(0, comma)),
                              std::stod(tau_uniform.substr(comma + 1)));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and spectral analysis of repeatedly measured N-level systems"};
  app.require_subcommand(1);

  // ---- simulate ----
  qmon::SimulateSpec sim;
  std::string sim_config, tau_fixed, tau_uniform, tau_exp, tau_zeno;
  double sim_beta = 0.0;
  std::string out_dir;
  auto* simulate = app.add_subcommand("simulate", "run the monitoring protocol");
  auto* o_preset = simulate->add_option("--preset", sim.preset, "fig1a, fig1b or spin72");
  auto* o_system = simulate->add_option("--system", sim.system_file, "system JSON file");
  auto* o_real = simulate->add_option("--realizations", sim.realizations, "ensemble size");
  auto* o_seed = simulate->add_option("--seed", sim.seed, "RNG seed");
  auto* o_m = simulate->add_option("--M", sim.measurements, "number of measurements");
  auto* o_beta = simulate->add_option("--beta", sim_beta, "thermal initial state");
  auto* o_workers = simulate->add_option("--workers", sim.workers, "worker threads (0 = all)");
  auto* o_out = simulate->add_option("--output", out_dir, "output directory");
  simulate->add_option("--tau", tau_fixed, "fixed waiting time");
  simulate->add_option("--tau-uniform", tau_uniform, "uniform waiting time 'lo,hi'");
  simulate->add_option("--tau-exp", tau_exp, "exponential waiting time mean");
  simulate->add_option("--tau-zeno", tau_zeno, "total time T with tau = T/M");
  simulate->add_option("--eps-points", sim.eps_points, "G(eps) grid size");
  simulate->add_option("--eps-range", sim.eps_range, "G(eps) grid half-width");
  simulate->add_flag("--no-trajectories", "skip the per-trajectory CSV");
  simulate->add_option("--config", sim_config, "JSON config file (flags override)");
  simulate->add_option("--name", sim.name, "experiment name");

  // ---- analyze ----
  auto* analyze = app.add_subcommand("analyze", "spectral and limit analyses");
  analyze->require_subcommand(1);

  qmon::SpectrumSpec spec_spectrum;
  auto* a_spectrum = analyze->add_subcommand("spectrum", "spectrum of L(tau)");
  a_spectrum->add_option("--N", spec_spectrum.n, "random system dimension");
  a_spectrum->add_option("--s", spec_spectrum.s, "spin system (Sx measured)");
  a_spectrum->add_option("--seed", spec_spectrum.seed);
  a_spectrum->add_option("--tau", spec_spectrum.tau);
  auto* o_spectrum_out = a_spectrum->add_option("--output", out_dir);

  qmon::CollapseSpec spec_collapse;
  auto* a_collapse = analyze->add_subcommand("collapse", "large-s spectral scaling");
  a_collapse->add_option("--s", spec_collapse.s);
  a_collapse->add_option("--taus", spec_collapse.taus)->delimiter(',');
  a_collapse->add_option("--threshold", spec_collapse.dispersion_threshold);
  a_collapse->add_flag("--eigvecs", spec_collapse.write_eigenvectors,
                       "export eigenvector heatmap data");
  auto* o_collapse_out = a_collapse->add_option("--output", out_dir);

  qmon::ConvergenceSpec spec_conv;
  std::string conv_tau_uniform;
  auto* a_conv = analyze->add_subcommand("convergence", "approach to the fixed point");
  a_conv->add_option("--N", spec_conv.n);
  a_conv->add_option("--seed", spec_conv.seed);
  double conv_tau = 1.0;
  auto* o_conv_tau = a_conv->add_option("--tau", conv_tau, "fixed waiting time");
  a_conv->add_option("--tau-uniform", conv_tau_uniform, "uniform waiting time 'lo,hi'");
  a_conv->add_option("--Ms", spec_conv.steps)->delimiter(',');
  auto* o_conv_out = a_conv->add_option("--output", out_dir);

  qmon::ZenoSpec spec_zeno;
  auto* a_zeno = analyze->add_subcommand("zeno", "frozen dynamics at vanishing tau");
  a_zeno->add_option("--N", spec_zeno.n);
  a_zeno->add_option("--seed", spec_zeno.seed);
  a_zeno->add_option("--total-time", spec_zeno.total_time);
  a_zeno->add_option("--Ms", spec_zeno.steps)->delimiter(',');
  auto* o_zeno_out = a_zeno->add_option("--output", out_dir);

  qmon::QuasiSpec spec_quasi;
  auto* a_quasi = analyze->add_subcommand("quasi", "quasi-commuting Euclidean limit");
  a_quasi->add_option("--s", spec_quasi.s);
  a_quasi->add_option("--omega", spec_quasi.omega);
  a_quasi->add_option("--tau", spec_quasi.tau);
  a_quasi->add_option("--t-eff", spec_quasi.t_eff);
  a_quasi->add_option("--xis", spec_quasi.xis)->delimiter(',');
  auto* o_quasi_out = a_quasi->add_option("--output", out_dir);

  qmon::LimitsSpec spec_limits;
  auto* a_limits = analyze->add_subcommand("limits", "order of the M and s limits");
  a_limits->add_option("--s-list", spec_limits.s_list)->delimiter(',');
  a_limits->add_option("--Ms", spec_limits.m_list)->delimiter(',');
  a_limits->add_option("--tau", spec_limits.tau);
  double limits_teff = 0.5;
  auto* o_limits_teff = a_limits->add_option("--t-eff", limits_teff);
  auto* o_limits_out = a_limits->add_option("--output", out_dir);

  qmon::OscillatorSpec spec_osc;
  auto* a_osc = analyze->add_subcommand("oscillator", "anisotropic 2D oscillator sectors");
  a_osc->add_option("--nmax", spec_osc.n_max);
  a_osc->add_option("--omega1", spec_osc.omega1);
  a_osc->add_option("--omega2", spec_osc.omega2);
  a_osc->add_option("--tau", spec_osc.tau);
  auto* o_osc_out = a_osc->add_option("--output", out_dir);

  try {
    app.parse(argc, argv);

    if (simulate->parsed()) {
      if (!sim_config.empty()) {
        const auto cfg = load_config(sim_config);
        maybe(cfg, "preset", sim.preset, o_preset);
        maybe(cfg, "system", sim.system_file, o_system);
        maybe(cfg, "realizations", sim.realizations, o_real);
        maybe(cfg, "seed", sim.seed, o_seed);
        maybe(cfg, "M", sim.measurements, o_m);
        maybe(cfg, "workers", sim.workers, o_workers);
        maybe(cfg, "output", out_dir, o_out);
        if (o_beta->count() == 0 && cfg.contains("beta")) {
          sim_beta = cfg.at("beta").get<double>();
          sim.beta = sim_beta;
        }
        if (tau_fixed.empty() && tau_uniform.empty() && tau_exp.empty() &&
            tau_zeno.empty() && cfg.contains("tau"))
          tau_fixed = std::to_string(cfg.at("tau").get<double>());
      }
      if (o_beta->count() > 0) sim.beta = sim_beta;
      if (!tau_fixed.empty() || !tau_uniform.empty() || !tau_exp.empty() ||
          !tau_zeno.empty())
        sim.waiting = parse_waiting(tau_fixed, tau_uniform, tau_exp, tau_zeno);
      sim.write_trajectories = simulate->count("--no-trajectories") == 0;
      if (!out_dir.empty())
        sim.output_dir = out_dir;
      else if (!sim.preset.empty())
        sim.output_dir = "out_" + sim.preset;
      qmon::run_simulate(sim);
    } else if (a_spectrum->parsed()) {
      if (o_spectrum_out->count()) spec_spectrum.output_dir = out_dir;
      qmon::run_analyze_spectrum(spec_spectrum);
    } else if (a_collapse->parsed()) {
      if (o_collapse_out->count()) spec_collapse.output_dir = out_dir;
      qmon::run_analyze_collapse(spec_collapse);
    } else if (a_conv->parsed()) {
      (void)o_conv_tau;
      if (!conv_tau_uniform.empty())
        spec_conv.waiting = parse_waiting("", conv_tau_uniform, "", "");
      else
        spec_conv.waiting = WaitingSpec::fixed(conv_tau);
      if (o_conv_out->count()) spec_conv.output_dir = out_dir;
      qmon::run_analyze_convergence(spec_conv);
    } else if (a_zeno->parsed()) {
      if (o_zeno_out->count()) spec_zeno.output_dir = out_dir;
      qmon::run_analyze_zeno(spec_zeno);
    } else if (a_quasi->parsed()) {
      if (o_quasi_out->count()) spec_quasi.output_dir = out_dir;
      qmon::run_analyze_quasi(spec_quasi);
    } else if (a_limits->parsed()) {
      if (o_limits_teff->count()) spec_limits.t_eff = limits_teff;
      if (o_limits_out->count()) spec_limits.output_dir = out_dir;
      qmon::run_analyze_limits(spec_limits);
    } else if (a_osc->parsed()) {
      if (o_osc_out->count()) spec_osc.output_dir = out_dir;
      qmon::run_analyze_oscillator(spec_osc);
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // bad usage maps to the config-error code
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    std::fprintf(stderr, "run with --help for usage\n");
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const qmon::Error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
