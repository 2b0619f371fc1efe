#include "piston/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "piston/averaged.hpp"
#include "piston/config.hpp"
#include "piston/errors.hpp"
#include "piston/hardcore.hpp"
#include "piston/harness.hpp"
#include "piston/io.hpp"
#include "piston/softcore.hpp"

namespace piston::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string config;
  std::string out = "out";
  std::size_t jobs = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

struct Context {
  RunConfig rc;
  PotentialProfile kappa = PotentialProfile::cubic();
  fs::path dir;
  std::uint64_t seed = 0;
  std::string command;
  std::size_t jobs = 0;
};

Context prepare(const std::string& verb, const Common& c) {
  Context ctx;
  auto overrides = c.overrides;
  if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
  ctx.rc = load_config(c.config, overrides);
  ctx.kappa = PotentialProfile::from_name(ctx.rc.system.potential);
  ctx.seed = ctx.rc.system.seed;
  ctx.dir = c.out;
  ctx.jobs = c.jobs;
  ctx.command = verb;
  for (const auto& o : c.overrides) ctx.command += " " + o;
  std::error_code ec;
  fs::create_directories(ctx.dir, ec);
  if (ec) throw ConfigError("--out", "cannot create " + ctx.dir.string());
  return ctx;
}

const SlowState& need_initial(const Context& ctx) {
  if (!ctx.rc.initial) throw ConfigError("initial", "required for this command");
  return *ctx.rc.initial;
}

void finish(const Context& ctx, const std::vector<std::string>& outputs) {
  io::write_manifest(ctx.dir, ctx.command, ctx.seed, to_json(ctx.rc), outputs);
}

harness::RunOptions run_options(const Context& ctx) {
  harness::RunOptions o;
  o.jobs = ctx.jobs;
  o.samples_per_unit = ctx.rc.study.samples_per_unit;
  o.step.steps_per_skin = ctx.rc.study.steps_per_skin;
  o.ode.rtol = ctx.rc.study.rtol;
  return o;
}

harness::EnsembleSpec ensemble(const Context& ctx) {
  harness::EnsembleSpec spec;
  spec.h0 = with_mode(need_initial(ctx), ctx.rc.compact_set.mode, ctx.rc.system);
  spec.n_phases = ctx.rc.study.n_phases;
  spec.seed = ctx.seed;
  spec.epsilon_list = ctx.rc.study.epsilon_list;
  spec.delta_list = ctx.rc.study.delta_list;
  spec.T = ctx.rc.system.horizon_T;
  spec.set = ctx.rc.compact_set;
  return spec;
}

double relative_spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return (*hi - *lo) / std::abs(v.front());
}

json fit_json(const harness::SlopeFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"x", f.x}, {"y", f.y}};
}

void simulate(const Context& ctx, std::ostream& out) {
  const auto& cfg = ctx.rc.system;
  const auto& study = ctx.rc.study;
  const FullState z0 =
      harness::sample_phase(need_initial(ctx), cfg, ctx.kappa, ctx.seed, study.phase);
  const double until = cfg.epsilon > 0.0 ? cfg.horizon_T / cfg.epsilon : cfg.horizon_T;
  const double dt = cfg.epsilon > 0.0
                        ? 1.0 / (static_cast<double>(study.samples_per_unit) * cfg.epsilon)
                        : cfg.horizon_T / static_cast<double>(study.samples_per_unit);
  std::vector<TrajectorySample> samples;
  std::vector<std::string> outputs{"trajectory.csv", "summary.json"};
  json summary;
  FullState final_state;
  if (cfg.soft()) {
    soft::StepControl step;
    step.steps_per_skin = study.steps_per_skin;
    step.sample_dt = dt;
    auto res = soft::integrate(z0, until, cfg, ctx.kappa, step);
    samples = std::move(res.samples);
    final_state = res.state;
    summary["steps"] = res.steps;
    summary["max_relative_drift"] = res.max_relative_drift;
    summary["max_energy_error"] = res.max_energy_error;
  } else {
    hard::EvolveOptions eo;
    eo.sample_dt = dt;
    eo.log_events = true;
    auto res = hard::evolve(z0, until, cfg, eo);
    samples = std::move(res.samples);
    final_state = res.state;
    io::write_event_log(ctx.dir / "events.csv", res.events, cfg.n1(), cfg.n2());
    outputs.insert(outputs.begin() + 1, "events.csv");
    const double e0 = hard::total_energy(z0, cfg);
    summary["event_count"] = res.event_count;
    summary["energy_relative_drift"] = std::abs(hard::total_energy(res.state, cfg) - e0) / e0;
  }

  auto header = io::slow_header(cfg.n1(), cfg.n2(), cfg.mode());
  header.insert(header.begin(), {"t", "tau"});
  header.push_back("energy");
  io::CsvWriter csv(ctx.dir / "trajectory.csv", header);
  double max_shift = 0.0;
  for (const auto& s : samples) {
    std::vector<double> row{s.t, cfg.epsilon * s.t};
    for (double v : io::slow_row(s.h)) row.push_back(v);
    row.push_back(avg::averaged_energy(s.h, cfg));
    csv.row(row);
    max_shift = std::max(max_shift, std::abs(s.h.X - z0.X));
  }
  summary["t_final"] = final_state.t;
  summary["X_initial"] = z0.X;
  summary["X_final"] = final_state.X;
  summary["max_abs_X_shift"] = max_shift;
  summary["max_abs_X_shift_over_epsilon"] = cfg.epsilon > 0.0 ? max_shift / cfg.epsilon : 0.0;
  io::write_text(ctx.dir / "summary.json", summary.dump(2) + "\n");
  finish(ctx, outputs);
  out << "simulate: " << samples.size() << " samples, max |X - X0| = " << max_shift << "\n";
}

void average(const Context& ctx, std::ostream& out) {
  const auto& cfg = ctx.rc.system;
  const SlowState h0 = with_mode(need_initial(ctx), cfg.mode(), cfg);
  avg::SolveOptions so;
  so.ode.rtol = ctx.rc.study.rtol;
  so.samples_per_unit = ctx.rc.study.samples_per_unit;
  so.compact_set = ctx.rc.compact_set.mode == h0.mode ? std::optional(ctx.rc.compact_set)
                                                      : std::nullopt;
  const auto traj = avg::solve_averaged(h0, cfg.horizon_T, cfg, ctx.kappa, so);

  // Hard runs report the effective Hamiltonian, soft runs the phase
  // integral of every particle.
  const bool hard = h0.mode == SlowMode::HardSpeeds;
  auto header = io::slow_header(cfg.n1(), cfg.n2(), h0.mode);
  header.insert(header.begin(), "tau");
  header.push_back("energy");
  if (hard) {
    header.push_back("H_eff");
  } else {
    for (std::size_t j = 0; j < cfg.n1(); ++j) header.push_back("I1_" + std::to_string(j));
    for (std::size_t j = 0; j < cfg.n2(); ++j) header.push_back("I2_" + std::to_string(j));
  }
  io::CsvWriter csv(ctx.dir / "averaged.csv", header);
  std::vector<double> energy;
  std::vector<std::vector<double>> invariants;
  for (std::size_t k = 0; k < traj.grid.size(); ++k) {
    const SlowState& h = traj.states[k];
    std::vector<double> row{traj.grid[k]};
    for (double v : io::slow_row(h)) row.push_back(v);
    energy.push_back(avg::averaged_energy(h, cfg));
    row.push_back(energy.back());
    std::vector<double> inv;
    if (hard) {
      inv.push_back(avg::effective_hamiltonian(h, h0, cfg));
    } else {
      for (Side side : {Side::Left, Side::Right})
        for (std::size_t j = 0; j < h.values(side).size(); ++j)
          inv.push_back(avg::adiabatic_invariant(side, h.X, h.values(side)[j],
                                                 cfg.masses(side)[j], cfg.delta, ctx.kappa));
    }
    for (double v : inv) row.push_back(v);
    invariants.push_back(std::move(inv));
    csv.row(row);
  }
  double worst_invariant = 0.0;
  for (std::size_t i = 0; i < invariants.front().size(); ++i) {
    std::vector<double> column;
    for (const auto& inv : invariants) column.push_back(inv[i]);
    worst_invariant = std::max(worst_invariant, relative_spread(column));
  }
  json summary;
  summary[hard ? "H_eff_relative_spread" : "invariant_relative_spread"] = worst_invariant;
  summary["energy_relative_spread"] = relative_spread(energy);
  summary["first_exit_tau"] = traj.first_exit ? json(*traj.first_exit) : json("inf");
  summary["steps"] = traj.dense.steps();
  const auto period = avg::find_period(h0, cfg, ctx.kappa, so);
  summary["period"] = period ? json(*period) : json(nullptr);
  io::write_text(ctx.dir / "summary.json", summary.dump(2) + "\n");
  finish(ctx, {"averaged.csv", "summary.json"});
  out << "average: " << traj.grid.size() << " samples, invariant spread " << worst_invariant
      << "\n";
}

void converge(const Context& ctx, std::ostream& out) {
  const auto spec = ensemble(ctx);
  const auto res = harness::convergence_study(spec, ctx.rc.system, ctx.kappa, run_options(ctx));
  io::write_error_table(ctx.dir / "errors.csv", res.table);
  io::write_timing(ctx.dir / "timing.csv", res.table);
  json fits = json::array();
  for (const auto& f : res.fits) {
    bool monotone = true;
    // errors must not increase as epsilon decreases
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < f.epsilons.size(); ++i) pts.emplace_back(f.epsilons[i], f.worst[i]);
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) monotone = monotone && pts[i - 1].second <= pts[i].second;
    json j = fit_json(f.fit);
    j["delta"] = f.delta;
    j["epsilons"] = f.epsilons;
    j["worst"] = f.worst;
    j["window"] = {0.7, 1.3};
    j["within_window"] = f.fit.within(0.7, 1.3);
    j["monotone"] = monotone;
    fits.push_back(j);
    out << "converge: delta=" << f.delta << " slope=" << f.fit.slope << "\n";
  }
  json doc;
  doc["fits"] = fits;
  doc["window_note"] = "slope acceptance window is an engineering tolerance";
  io::write_text(ctx.dir / "fit.json", doc.dump(2) + "\n");
  io::write_text(ctx.dir / "plot.gp", io::gnuplot_script("errors.csv", "sup deviation vs epsilon"));
  finish(ctx, {"errors.csv", "fit.json", "plot.gp"});
}

void compare(const Context& ctx, std::ostream& out) {
  const auto spec = ensemble(ctx);
  const auto res = harness::hard_soft_comparison(spec, ctx.rc.system, ctx.kappa,
                                                 ctx.rc.study.delta_fixed, run_options(ctx));
  io::write_error_table(ctx.dir / "errors.csv", res.table);
  io::write_timing(ctx.dir / "timing.csv", res.table);
  auto sweep = [](const harness::SweepFit& s) {
    json j = fit_json(s.fit);
    j["fixed"] = s.fixed;
    j["floor"] = s.floor;
    j["values"] = s.values;
    j["worst"] = s.worst;
    j["within_window"] = s.fit.within(0.7, 1.3);
    return j;
  };
  json doc;
  doc["A"] = res.floors.A;
  doc["B"] = res.floors.B;
  doc["delta_sweep"] = sweep(res.delta_sweep);
  doc["epsilon_sweep"] = sweep(res.epsilon_sweep);
  doc["window"] = {0.7, 1.3};
  io::write_text(ctx.dir / "fit.json", doc.dump(2) + "\n");
  finish(ctx, {"errors.csv", "fit.json"});
  out << "compare: A=" << res.floors.A << " B=" << res.floors.B
      << " delta-sweep slope=" << res.delta_sweep.fit.slope
      << " epsilon-sweep slope=" << res.epsilon_sweep.fit.slope << "\n";
}

void npiston(const Context& ctx, std::ostream& out) {
  if (!ctx.rc.npiston) throw ConfigError("npiston", "section required for this command");
  const auto& np = *ctx.rc.npiston;
  ode::Options o;
  o.rtol = ctx.rc.study.rtol;
  const auto traj = avg::solve_npiston(np.state, np.T, o, ctx.rc.study.samples_per_unit);
  std::vector<std::string> header{"tau"};
  for (std::size_t i = 0; i < np.state.X.size(); ++i) header.push_back("X_" + std::to_string(i));
  for (std::size_t i = 0; i < np.state.W.size(); ++i) header.push_back("W_" + std::to_string(i));
  for (std::size_t c = 0; c < np.state.s.size(); ++c)
    for (std::size_t j = 0; j < np.state.s[c].size(); ++j)
      header.push_back("s_" + std::to_string(c) + "_" + std::to_string(j));
  header.push_back("H_eff");
  io::CsvWriter csv(ctx.dir / "npiston.csv", header);
  std::vector<double> h;
  for (std::size_t k = 0; k < traj.grid.size(); ++k) {
    std::vector<double> row{traj.grid[k]};
    for (double v : traj.states[k].to_vector()) row.push_back(v);
    h.push_back(avg::npiston_hamiltonian(traj.states[k], np.state));
    row.push_back(h.back());
    csv.row(row);
  }
  json summary;
  summary["H_eff_relative_spread"] = relative_spread(h);
  io::write_text(ctx.dir / "summary.json", summary.dump(2) + "\n");
  finish(ctx, {"npiston.csv", "summary.json"});
  out << "npiston: H_eff spread " << summary["H_eff_relative_spread"].get<double>() << "\n";
}

void audit(const Context& ctx, std::ostream& out) {
  const auto& cfg = ctx.rc.system;
  const FullState z0 = harness::sample_phase(need_initial(ctx), cfg, ctx.kappa, ctx.seed,
                                             ctx.rc.study.phase);
  double duration = ctx.rc.study.duration;
  if (duration == 0.0) {
    if (!(cfg.epsilon > 0.0)) throw ConfigError("study.duration", "required when epsilon = 0");
    duration = cfg.horizon_T / cfg.epsilon;
  }
  const auto rows = harness::collision_rate_audit(cfg, z0, duration);
  io::CsvWriter csv(ctx.dir / "rates.csv",
                    {"side", "index", "hits", "rate", "predicted", "relative_error"});
  for (const auto& r : rows) {
    csv.row(std::vector<std::string>{to_string(r.side), std::to_string(r.index),
                                     std::to_string(r.hits), io::format_double(r.rate),
                                     io::format_double(r.predicted),
                                     io::format_double(r.relative_error)});
    out << "audit: " << to_string(r.side) << "[" << r.index << "] rate=" << r.rate
        << " predicted=" << r.predicted << "\n";
  }
  finish(ctx, {"rates.csv"});
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message,
                 const std::string& field = "") {
  json j;
  j["error"] = kind;
  if (!field.empty()) j["field"] = field;
  j["message"] = message;
  err << j.dump() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Piston simulation and averaging studies", "piston"};
  app.require_subcommand(1);
  Common common;
  const std::vector<std::pair<std::string, std::string>> verbs{
      {"simulate", "Run the full hard- or soft-core dynamics from the initial slow state"},
      {"average", "Solve the averaged equation from the initial slow state"},
      {"converge", "Convergence study over epsilon (and delta)"},
      {"compare", "Hard-core versus soft-core comparison over (epsilon, delta)"},
      {"npiston", "Solve the averaged N-piston equation"},
      {"audit", "Piston collision rates against s / (2 w)"}};
  for (const auto& [name, help] : verbs) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", common.config, "JSON configuration")->required();
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--jobs", common.jobs, "Concurrent grid cells (0 = all cores)");
    sub->add_option("--seed", common.seed, "Override the configured seed");
    sub->add_option("overrides", common.overrides, "dotted.key=value overrides");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return 2;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    const Context ctx = prepare(verb, common);
    if (verb == "simulate") simulate(ctx, out);
    else if (verb == "average") average(ctx, out);
    else if (verb == "converge") converge(ctx, out);
    else if (verb == "compare") compare(ctx, out);
    else if (verb == "npiston") npiston(ctx, out);
    else audit(ctx, out);
  } catch (const ConfigError& e) {
    print_error(err, "config", e.what(), e.field());
    return 2;
  } catch (const std::exception& e) {
    print_error(err, "runtime", e.what());
    return 1;
  }
  return 0;
}

int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace piston::cli
