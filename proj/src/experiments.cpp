#include "qmon/experiments.hpp"

#include <chrono>
#include <cmath>

#include "qmon/asymptotics.hpp"
#include "qmon/heat_stats.hpp"
#include "qmon/io.hpp"
#include "qmon/stats.hpp"
#include "qmon/transition.hpp"

namespace qmon {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

io::json waiting_to_json(const WaitingSpec& w) {
  switch (w.kind) {
    case WaitingSpec::Kind::Fixed:
      return {{"kind", "fixed"}, {"tau", w.a}};
    case WaitingSpec::Kind::Uniform:
      return {{"kind", "uniform"}, {"lo", w.a}, {"hi", w.b}};
    case WaitingSpec::Kind::Exponential:
      return {{"kind", "exponential"}, {"mean", w.a}};
    case WaitingSpec::Kind::Zeno:
      return {{"kind", "zeno"}, {"total_time", w.a}};
  }
  return {};
}

}  // namespace

Preset resolve_preset(const std::string& name, std::uint64_t seed,
                      std::optional<double> beta) {
  Preset p;
  if (name == "fig1a" || name == "fig1b") {
    const int n = name == "fig1a" ? 5 : 15;
    auto [sys, rho] = random_system(n, seed);
    p.system = std::move(sys);
    p.rho0 = std::move(rho);
    p.config.measurements = 20;
    p.config.waiting = WaitingSpec::fixed(1.0);
    if (beta.has_value()) {
      p.beta = *beta;
      p.rho0 = thermal_state(p.system.hamiltonian, *beta);
    }
  } else if (name == "spin72") {
    SpinParameters sp;
    sp.s = 3.5;
    sp.omega = 1.0;
    sp.xi = kPi / 2.0;  // measure Sx
    p.system = spin_system(sp);
    p.beta = beta.value_or(0.5);
    p.rho0 = thermal_state(p.system.hamiltonian, p.beta);
    p.config.measurements = 25;
    p.config.waiting = WaitingSpec::fixed(1.0);
    p.spin = true;
    p.spin_s = sp.s;
    p.spin_omega = sp.omega;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected fig1a, fig1b or spin72)");
  }
  p.config.seed = seed;
  return p;
}

void run_simulate(const SimulateSpec& spec) {
  if (spec.preset.empty() == spec.system_file.empty())
    throw ConfigError("simulate: exactly one of preset or system file required");
  if (spec.realizations < 1) throw ConfigError("simulate: realizations must be >= 1");

  QuantumSystem sys;
  DensityMatrix rho0;
  ProtocolConfig cfg;
  bool spin = false;
  double spin_s = 0.0, spin_omega = 1.0, beta = 0.0;
  if (!spec.preset.empty()) {
    Preset p = resolve_preset(spec.preset, spec.seed, spec.beta);
    sys = std::move(p.system);
    rho0 = std::move(p.rho0);
    cfg = p.config;
    spin = p.spin;
    spin_s = p.spin_s;
    spin_omega = p.spin_omega;
    beta = p.beta;
  } else {
    const auto doc = io::json::parse(io::read_text(spec.system_file));
    auto [s, r] = io::system_from_json(doc);
    sys = std::move(s);
    rho0 = std::move(r);
    cfg.measurements = 20;
    cfg.waiting = WaitingSpec::fixed(1.0);
    cfg.seed = spec.seed;
    if (spec.beta.has_value()) {
      beta = *spec.beta;
      rho0 = thermal_state(sys.hamiltonian, beta);
    }
  }
  if (spec.measurements > 0) cfg.measurements = spec.measurements;
  if (spec.waiting.has_value()) cfg.waiting = *spec.waiting;
  cfg.ensemble_size = spec.realizations;
  cfg.seed = spec.seed;
  cfg.validate();

  const HeatEnsemble ens = run_ensemble(sys, rho0, cfg, spec.workers);
  const RVec& energies = sys.hamiltonian.eigenvalues;

  io::OutputSession out(spec.output_dir);

  out.write_json("system.json",
                 io::system_to_json(sys, rho0, {{"name", spec.name}}));

  if (spec.write_trajectories) {
    io::CsvWriter csv({"n", "E_n", "m", "E_m", "Q"});
    for (const auto& rec : ens.records)
      csv.row({std::to_string(rec.n), io::CsvWriter::format(energies(rec.n)),
               std::to_string(rec.m), io::CsvWriter::format(energies(rec.m)),
               io::CsvWriter::format(rec.heat)});
    out.write_text("trajectories.csv", csv.str());
  }

  {
    const HeatPMF pmf = empirical_pmf(ens, energies);
    io::CsvWriter csv({"Q", "count", "probability"});
    const auto n_rec = static_cast<double>(ens.records.size());
    for (std::size_t i = 0; i < pmf.support.size(); ++i)
      csv.row({io::CsvWriter::format(pmf.support[i]),
               std::to_string(static_cast<long long>(std::llround(pmf.prob[i] * n_rec))),
               io::CsvWriter::format(pmf.prob[i])});
    out.write_text("histogram.csv", csv.str());
  }

  {
    io::CsvWriter emp({"re_u", "im_u", "re_G", "im_G", "stderr"});
    io::CsvWriter ana({"re_u", "im_u", "re_G", "im_G", "stderr"});
    for (int i = 0; i < spec.eps_points; ++i) {
      const double eps = spec.eps_points > 1
                             ? -spec.eps_range + 2.0 * spec.eps_range * i / (spec.eps_points - 1)
                             : 0.0;
      const auto [g, se] = empirical_G_eps(ens, eps);
      emp.row_values({0.0, eps, g, 0.0, se});
      ana.row_values({0.0, eps, analytic_G_itt(sys.hamiltonian, rho0, eps), 0.0, 0.0});
    }
    out.write_text("gcurve.csv", emp.str());
    out.write_text("gcurve_analytic.csv", ana.str());
  }

  if (spin) {
    const HeatPMF pmf = spin_heat_pmf(spin_s, spin_omega, beta);
    io::CsvWriter csv({"l", "Q", "probability"});
    const int two_s = static_cast<int>(std::llround(2.0 * spin_s));
    for (std::size_t i = 0; i < pmf.support.size(); ++i)
      csv.row({std::to_string(static_cast<int>(i) - two_s),
               io::CsvWriter::format(pmf.support[i]),
               io::CsvWriter::format(pmf.prob[i])});
    out.write_text("spin_pmf.csv", csv.str());
  }

  out.write_text("plot.gp",
                 "set datafile separator ','\n"
                 "set terminal pngcairo size 900,600\n"
                 "set output 'histogram.png'\n"
                 "set style fill solid 0.4\n"
                 "plot 'histogram.csv' skip 1 using 1:3 with boxes title 'heat PMF'\n"
                 "set output 'gcurve.png'\n"
                 "plot 'gcurve.csv' skip 1 using 2:3:5 with yerrorbars title 'empirical', \\\n"
                 "     'gcurve_analytic.csv' skip 1 using 2:3 with lines title 'analytic'\n");

  io::json inputs = {{"command", "simulate"},
                     {"name", spec.name},
                     {"preset", spec.preset},
                     {"system_file", spec.system_file},
                     {"measurements", cfg.measurements},
                     {"waiting", waiting_to_json(cfg.waiting)},
                     {"realizations", cfg.ensemble_size},
                     {"seed", cfg.seed},
                     {"workers", spec.workers},
                     {"system_fingerprint", ens.system_fingerprint},
                     {"config_fingerprint", ens.config_fingerprint},
                     {"created", timestamp()}};
  if (spec.beta.has_value() || spin) inputs["beta"] = beta;
  out.commit(std::move(inputs));
}

void run_analyze_spectrum(const SpectrumSpec& spec) {
  if ((spec.n > 0) == (spec.s > 0))
    throw ConfigError("spectrum: exactly one of N or s required");
  QuantumSystem sys;
  double s_or_n = 0.0;
  if (spec.n > 0) {
    sys = random_system(spec.n, spec.seed).first;
    s_or_n = spec.n;
  } else {
    SpinParameters sp;
    sp.s = spec.s;
    sp.omega = 1.0;
    sp.xi = kPi / 2.0;
    sys = spin_system(sp);
    s_or_n = spec.s;
  }
  const TransitionMatrix l = transition_matrix(sys, spec.tau);

  io::OutputSession out(spec.output_dir);
  io::CsvWriter csv({"k", "lambda_k", "tau", "s_or_N"});
  for (int k = 0; k < l.dim; ++k)
    csv.row_values({static_cast<double>(k), l.spectrum(k), spec.tau, s_or_n});
  out.write_text("spectrum.csv", csv.str());
  out.write_text("plot.gp",
                 "set datafile separator ','\n"
                 "set terminal pngcairo size 900,600\n"
                 "set output 'spectrum.png'\n"
                 "plot 'spectrum.csv' skip 1 using 1:2 with points title 'lambda_k'\n");
  out.commit({{"command", "analyze spectrum"},
              {"tau", spec.tau},
              {"seed", spec.seed},
              {"s_or_N", s_or_n},
              {"created", timestamp()}});
}

void run_analyze_collapse(const CollapseSpec& spec) {
  const ScalingDataset ds = scaling_collapse(spec.s, spec.taus, spec.dispersion_threshold);

  io::OutputSession out(spec.output_dir);
  io::CsvWriter csv({"s", "tau", "k", "x", "lambda"});
  for (const auto& pt : ds.points)
    csv.row_values({ds.s, pt.tau, static_cast<double>(pt.k), pt.x, pt.lambda});
  out.write_text("collapse.csv", csv.str());

  std::string heatmap_plot;
  if (spec.write_eigenvectors) {
    for (double tau : spec.taus) {
      const RMat vecs = collapse_eigenvectors(spec.s, tau);
      io::CsvWriter evcsv({"k", "m", "log10_abs_v"});
      for (int k = 0; k < vecs.cols(); ++k)
        for (int m = 0; m < vecs.rows(); ++m)
          evcsv.row_values({static_cast<double>(k), static_cast<double>(m),
                            std::log10(std::max(std::fabs(vecs(m, k)), 1e-300))});
      char name[64];
      std::snprintf(name, sizeof name, "eigvecs_tau%g.csv", tau);
      out.write_text(name, evcsv.str());
      heatmap_plot += std::string("set output 'eigvecs_tau") +
                      io::CsvWriter::format(tau) + ".png'\nplot '" + name +
                      "' skip 1 using 1:2:3 with image notitle\n";
    }
  }

  out.write_text("plot.gp",
                 "set datafile separator ','\n"
                 "set terminal pngcairo size 900,600\n"
                 "set output 'collapse.png'\n"
                 "set xlabel 'tau k / 2s'\nset ylabel 'lambda_k'\n"
                 "set cblabel 'tau'\n"
                 "plot 'collapse.csv' skip 1 using 4:5:2 with points palette notitle\n" +
                     heatmap_plot);

  out.commit({{"command", "analyze collapse"},
              {"s", ds.s},
              {"taus", ds.taus},
              {"critical_x", ds.critical_x},
              {"critical_band", {ds.critical_lo, ds.critical_hi}},
              {"lambda_at_critical", ds.lambda_at_critical},
              {"quad_coeff", ds.quad_coeff},
              {"max_dispersion_below_0.9", ds.max_dispersion_below},
              {"created", timestamp()}});
}

void run_analyze_convergence(const ConvergenceSpec& spec) {
  const auto [sys, rho0] = random_system(spec.n, spec.seed);
  (void)rho0;
  const ConvergenceReport rep = itt_convergence(sys, spec.waiting, spec.steps);

  io::OutputSession out(spec.output_dir);
  io::CsvWriter csv({"M", "distance"});
  for (std::size_t i = 0; i < rep.steps.size(); ++i)
    csv.row_values({static_cast<double>(rep.steps[i]), rep.distances[i]});
  out.write_text("convergence.csv", csv.str());
  out.write_text("plot.gp",
                 "set datafile separator ','\n"
                 "set terminal pngcairo size 900,600\n"
                 "set output 'convergence.png'\n"
                 "set logscale y\n"
                 "plot 'convergence.csv' skip 1 using 1:2 with linespoints title 'distance'\n");
  out.commit({{"command", "analyze convergence"},
              {"N", spec.n},
              {"seed", spec.seed},
              {"waiting", waiting_to_json(spec.waiting)},
              {"fitted_rate", rep.fitted_rate},
              {"log_lambda1", rep.log_lambda1},
              {"created", timestamp()}});
}

void run_analyze_zeno(const ZenoSpec& spec) {
  const auto [sys, rho0] = random_system(spec.n, spec.seed);
  (void)rho0;
  const ZenoReport rep = zeno_analysis(sys, spec.total_time, spec.steps);

  io::OutputSession out(spec.output_dir);
  io::CsvWriter csv({"M", "tau", "distance"});
  for (std::size_t i = 0; i < rep.steps.size(); ++i)
    csv.row_values({static_cast<double>(rep.steps[i]), rep.taus[i], rep.distances[i]});
  out.write_text("zeno.csv", csv.str());
  out.write_text("plot.gp",
                 "set datafile separator ','\n"
                 "set terminal pngcairo size 900,600\n"
                 "set output 'zeno.png'\n"
                 "set logscale xy\n"
                 "plot 'zeno.csv' skip 1 using 1:3 with linespoints title '|L^M - I|'\n");
  out.commit({{"command", "analyze zeno"},
              {"N", spec.n},
              {"seed", spec.seed},
              {"total_time", spec.total_time},
              {"slope", rep.slope},
              {"created", timestamp()}});
}

void run_analyze_quasi(const QuasiSpec& spec) {
  std::vector<QuantumSystem> family;
  for (double xi : spec.xis) {
    SpinParameters sp;
    sp.s = spec.s;
    sp.omega = spec.omega;
    sp.xi = xi;
    family.push_back(spin_system(sp));
  }
  const auto points = euclidean_compare(family, spec.xis, spec.tau, spec.t_eff);

  // closed-form check of the effective generator against the tridiagonal
  // operator of the tilted-spin family
  const RMat a = operator_A(spec.s);
  const double sn = std::sin(0.5 * spec.omega * spec.tau);
  double delta_identity_error = 0.0;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const EffectiveEvolution ev = delta_operator(family[i], spec.tau);
    const RMat invariant = (ev.xi * ev.xi) * ev.delta;
    const RMat closed = (spec.xis[i] * spec.xis[i] * sn * sn) * a;
    delta_identity_error =
        std::max(delta_identity_error, max_abs(RMat(invariant - closed)));
  }

  io::OutputSession out(spec.output_dir);
  io::CsvWriter csv({"xi", "M", "residual_t", "error"});
  for (const auto& pt : points)
    csv.row_values({pt.xi, static_cast<double>(pt.steps), pt.residual_t, pt.error});
  out.write_text("quasi.csv", csv.str());
  out.write_text("plot.gp",
                 "set datafile separator ','\n"
                 "set terminal pngcairo size 900,600\n"
                 "set output 'quasi.png'\n"
                 "set logscale xy\n"
                 "plot 'quasi.csv' skip 1 using (1/$1):4 with linespoints title "
                 "'|L^M - exp(-Delta t)|'\n");
  out.commit({{"command", "analyze quasi"},
              {"s", spec.s},
              {"omega", spec.omega},
              {"tau", spec.tau},
              {"t_eff", spec.t_eff},
              {"xis", spec.xis},
              {"delta_identity_error", delta_identity_error},
              {"created", timestamp()}});
}

void run_analyze_limits(const LimitsSpec& spec) {
  const auto rows = limit_order_study(spec.s_list, spec.m_list, spec.tau, spec.t_eff);

  io::OutputSession out(spec.output_dir);
  io::CsvWriter csv({"branch", "s", "M", "distance"});
  for (const auto& row : rows)
    csv.row({row.branch, io::CsvWriter::format(row.s), std::to_string(row.steps),
             io::CsvWriter::format(row.distance)});
  out.write_text("limits.csv", csv.str());
  io::json inputs = {{"command", "analyze limits"},
                     {"s_list", spec.s_list},
                     {"M_list", spec.m_list},
                     {"tau", spec.tau},
                     {"created", timestamp()}};
  if (spec.t_eff.has_value()) inputs["t_eff"] = *spec.t_eff;
  out.commit(std::move(inputs));
}

void run_analyze_oscillator(const OscillatorSpec& spec) {
  auto [sys, blocks] = oscillator_system(spec.n_max, spec.omega1, spec.omega2);
  const TransitionMatrix l = transition_matrix(sys, spec.tau);
  const FixedPoint fp = fixed_point(l);
  const std::vector<int> label = blocks.labels(sys.dim());

  double offblock = 0.0;
  for (int i = 0; i < sys.dim(); ++i)
    for (int j = 0; j < sys.dim(); ++j)
      if (label[i] != label[j]) offblock = std::max(offblock, std::fabs(fp.projector(i, j)));

  io::OutputSession out(spec.output_dir);
  io::CsvWriter csv({"n", "dim", "uniform_deviation", "offblock_max"});
  for (int r = 0; r < blocks.block_count(); ++r) {
    const auto& sector = blocks.partition[r];
    const double d = static_cast<double>(sector.size());
    double dev = 0.0;
    for (int i : sector)
      for (int j : sector) dev = std::max(dev, std::fabs(fp.projector(i, j) - 1.0 / d));
    csv.row_values({static_cast<double>(r), d, dev, offblock});
  }
  out.write_text("oscillator.csv", csv.str());
  out.commit({{"command", "analyze oscillator"},
              {"n_max", spec.n_max},
              {"omega1", spec.omega1},
              {"omega2", spec.omega2},
              {"tau", spec.tau},
              {"fixed_point_multiplicity", fp.multiplicity},
              {"created", timestamp()}});
}

}  // namespace qmon
