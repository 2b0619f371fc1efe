#include "piston/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "piston/errors.hpp"
#include "piston/hardcore.hpp"

namespace piston::harness {

namespace {

std::mt19937_64 phase_rng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

std::string coords(double eps, double delta, std::size_t phase) {
  std::ostringstream os;
  os << "[epsilon=" << eps << ", delta=" << delta << ", phase=" << phase << "]";
  return os.str();
}

template <class Fn>
auto with_coords(double eps, double delta, std::size_t phase, Fn fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw SimulationError(std::string(e.what()) + " " + coords(eps, delta, phase));
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<TrajectorySample> converted(std::vector<TrajectorySample> samples, SlowMode mode,
                                        const SystemConfig& cfg) {
  for (auto& s : samples) s.h = with_mode(s.h, mode, cfg);
  return samples;
}

// Actual trajectory samples for one run in the requested slow mode.
std::vector<TrajectorySample> run_actual(const FullState& z0, const SystemConfig& cfg,
                                         const PotentialProfile& kappa, double T,
                                         const RunOptions& options, bool with_events,
                                         SlowMode mode) {
  const double until = T / cfg.epsilon;
  const double dt = 1.0 / (static_cast<double>(options.samples_per_unit) * cfg.epsilon);
  if (!cfg.soft()) {
    hard::EvolveOptions eo;
    eo.sample_dt = dt;
    eo.sample_events = with_events;
    auto res = hard::evolve(z0, until, cfg, eo);
    return converted(std::move(res.samples), mode, cfg);
  }
  soft::StepControl step = options.step;
  step.sample_dt = dt;
  auto res = soft::integrate(z0, until, cfg, kappa, step);
  return converted(std::move(res.samples), mode, cfg);
}

}  // namespace

void EnsembleSpec::validate() const {
  if (n_phases == 0) throw ConfigError("study.n_phases", "must be >= 1");
  if (epsilon_list.empty()) throw ConfigError("study.epsilon_list", "must not be empty");
  for (std::size_t i = 0; i < epsilon_list.size(); ++i) {
    if (!(epsilon_list[i] > 0.0)) throw ConfigError("study.epsilon_list", "values must be > 0");
    for (std::size_t j = 0; j < i; ++j)
      if (epsilon_list[j] == epsilon_list[i])
        throw ConfigError("study.epsilon_list", "values must be distinct");
  }
  if (delta_list.empty()) throw ConfigError("study.delta_list", "must not be empty");
  for (double d : delta_list) {
    if (!(d >= 0.0)) throw ConfigError("study.delta_list", "values must be >= 0");
    if (d > 0.0 && !(d < 0.5 * set.margin()))
      throw ConfigError("study.delta_list",
                        "delta must be below half the compact-set margin " +
                            std::to_string(0.5 * set.margin()));
  }
  if (!(T > 0.0)) throw ConfigError("horizon_T", "must be > 0");
}

Scenario hard_default_scenario() {
  Scenario sc;
  sc.cfg.masses_left = {1.0};
  sc.cfg.masses_right = {1.0};
  sc.cfg.delta = 0.0;
  sc.cfg.horizon_T = 1.0;
  sc.spec.h0.X = 0.5;
  sc.spec.h0.W = 0.0;
  sc.spec.h0.left = {2.0};               // E1 = 2
  sc.spec.h0.right = {std::sqrt(2.0)};  // E2 = 1
  sc.spec.h0.mode = SlowMode::HardSpeeds;
  sc.spec.set = CompactSet::hard_default();
  sc.spec.delta_list = {0.0};
  return sc;
}

Scenario soft_default_scenario() {
  Scenario sc;
  sc.cfg.masses_left = {1.0};
  sc.cfg.masses_right = {1.0};
  sc.cfg.delta = 0.025;
  sc.cfg.horizon_T = 1.0;
  sc.spec.h0.X = 0.5;
  sc.spec.h0.W = 0.0;
  sc.spec.h0.left = {0.6};
  sc.spec.h0.right = {0.3};
  sc.spec.h0.mode = SlowMode::SoftEnergies;
  CompactSet set;
  set.mode = SlowMode::SoftEnergies;
  set.barrier = 1.0;
  set.x_bounds = {0.22, 0.78};
  set.w_max = 10.0;
  set.value_bounds = {0.21, 0.79};
  sc.spec.set = set;
  sc.spec.delta_list = {0.1, 0.05, 0.025};
  return sc;
}

Scenario equilibrium_scenario() {
  Scenario sc = hard_default_scenario();
  sc.spec.h0.X = 0.4;
  sc.spec.h0.left = {std::sqrt(1.6)};   // E1 = 0.8, P1 = 4
  sc.spec.h0.right = {std::sqrt(2.4)};  // E2 = 1.2, P2 = 4
  sc.spec.epsilon_list = {0.02, 0.01, 0.005};
  return sc;
}

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, count);
  std::vector<std::exception_ptr> errors(count);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w)
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
            failed = true;
          }
        }
      });
    for (auto& t : workers) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

FullState sample_phase(const SlowState& h0, const SystemConfig& cfg, const PotentialProfile& kappa,
                       std::uint64_t seed, std::size_t index, double quad_margin) {
  auto rng = phase_rng(seed, index);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FullState z;
  z.X = h0.X;
  z.V = cfg.epsilon * h0.W;
  const SlowState h = with_mode(h0, cfg.mode(), cfg);
  for (Side side : {Side::Left, Side::Right}) {
    const auto& vals = h.values(side);
    const auto& m = cfg.masses(side);
    for (std::size_t j = 0; j < vals.size(); ++j) {
      const double phi = unit(rng);
      const auto [x, v] = cfg.soft()
                              ? soft::soft_phase_point(side, phi, h.X, vals[j], m[j], cfg.delta,
                                                       kappa, quad_margin)
                              : hard::phase_point(side, phi, h.X, vals[j]);
      z.positions(side).push_back(x);
      z.velocities(side).push_back(v);
    }
  }
  return z;
}

FullState plateau_phase(const SlowState& h0, const SystemConfig& cfg, double d, std::uint64_t seed,
                        std::size_t index) {
  auto rng = phase_rng(seed, index);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const SlowState h = to_energies(h0, cfg);
  FullState z;
  z.X = h.X;
  z.V = cfg.epsilon * h.W;
  for (Side side : {Side::Left, Side::Right}) {
    const double w = side == Side::Left ? h.X : 1.0 - h.X;
    if (!(w > 2.0 * d)) throw DomainError("chamber too narrow for a plateau phase");
    const auto& E = h.values(side);
    const auto& m = cfg.masses(side);
    for (std::size_t j = 0; j < E.size(); ++j) {
      const double xi = d + (w - 2.0 * d) * unit(rng);
      const double speed = std::sqrt(2.0 * E[j] / m[j]);
      const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
      z.positions(side).push_back(side == Side::Left ? xi : 1.0 - xi);
      z.velocities(side).push_back(sign * speed);
    }
  }
  return z;
}

Deviation sup_deviation(const std::vector<TrajectorySample>& actual, double epsilon,
                        const avg::AveragedTrajectory& averaged, const CompactSet& set, double T) {
  if (actual.empty()) throw DomainError("no actual samples");
  Deviation out;
  out.T_eps = averaged.first_exit;
  for (const auto& s : actual) {
    const double tau = epsilon * s.t;
    if (out.T_eps && tau > *out.T_eps) break;
    if (!membership(s.h, set)) out.T_eps = out.T_eps ? std::min(*out.T_eps, tau) : tau;
    if (tau > T * (1.0 + 1e-12)) break;
    const double clamped = std::min(tau, averaged.horizon());
    out.sup_error = std::max(out.sup_error, max_norm_distance(s.h, averaged.at(clamped)));
    ++out.compared;
  }
  if (out.compared == 0) throw DomainError("actual and averaged paths do not overlap");
  return out;
}

Deviation sup_deviation(const std::vector<TrajectorySample>& a,
                        const std::vector<TrajectorySample>& b, double epsilon,
                        const CompactSet& set, double T) {
  Deviation out;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(a[i].t - b[i].t) > 1e-9 * std::max(1.0, a[i].t))
      throw DomainError("paired runs are not sampled on the same grid");
    const double tau = epsilon * a[i].t;
    if (out.T_eps && tau > *out.T_eps) break;
    if (tau > T * (1.0 + 1e-12)) break;
    if (!membership(a[i].h, set) || !membership(b[i].h, set)) out.T_eps = tau;
    out.sup_error = std::max(out.sup_error, max_norm_distance(a[i].h, b[i].h));
    ++out.compared;
  }
  if (out.compared == 0) throw DomainError("paired runs do not overlap");
  return out;
}

std::vector<double> ErrorTable::epsilons() const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (std::find(out.begin(), out.end(), r.epsilon) == out.end()) out.push_back(r.epsilon);
  return out;
}

std::vector<double> ErrorTable::deltas() const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (std::find(out.begin(), out.end(), r.delta) == out.end()) out.push_back(r.delta);
  return out;
}

double ErrorTable::worst(double epsilon, double delta) const {
  double w = -1.0;
  for (const auto& r : rows)
    if (r.epsilon == epsilon && r.delta == delta) w = std::max(w, r.sup_error);
  if (w < 0.0) throw DomainError("empty error-table cell " + coords(epsilon, delta, 0));
  return w;
}

SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y,
                          bool restrict_to_small) {
  if (x.size() != y.size()) throw DomainError("slope fit needs matching x and y");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] > 0.0 && y[i] > 0.0) pts.emplace_back(x[i], y[i]);
  std::sort(pts.begin(), pts.end());
  if (restrict_to_small && pts.size() > 3 &&
      std::log10(pts.back().first / pts.front().first) > 1.5)
    pts.resize(3);
  SlopeFit fit;
  for (const auto& [a, b] : pts) {
    fit.x.push_back(a);
    fit.y.push_back(b);
  }
  if (pts.size() < 2) {
    fit.slope = fit.intercept = fit.r2 = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  const double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [a, b] : pts) {
    const double lx = std::log(a), ly = std::log(b);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  fit.slope = cxy / vx;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r2 = vy > 0.0 ? cxy * cxy / (vx * vy) : 1.0;
  return fit;
}

ConvergenceResult convergence_study(const EnsembleSpec& spec, const SystemConfig& base,
                                    const PotentialProfile& kappa, const RunOptions& options) {
  spec.validate();
  const SlowMode mode = spec.set.mode;
  for (double d : spec.delta_list)
    if (d > 0.0 && mode != SlowMode::SoftEnergies)
      throw ConfigError("compact_set.mode", "soft runs compare energies; use a soft compact set");

  const std::size_t nd = spec.delta_list.size(), ne = spec.epsilon_list.size(),
                    np = spec.n_phases;
  // Averaged solutions depend on delta only.
  std::vector<avg::AveragedTrajectory> averaged(nd);
  parallel_for(nd, options.jobs, [&](std::size_t i) {
    SystemConfig cfg = base;
    cfg.delta = spec.delta_list[i];
    avg::SolveOptions so;
    so.ode = options.ode;
    so.compact_set = spec.set;
    so.margin = options.quad_margin;
    so.samples_per_unit = 16;
    averaged[i] = with_coords(0.0, cfg.delta, 0, [&] {
      return avg::solve_averaged(with_mode(spec.h0, mode, cfg), spec.T, cfg, kappa, so);
    });
  });

  ConvergenceResult result;
  result.table.rows.resize(nd * ne * np);
  parallel_for(nd * ne * np, options.jobs, [&](std::size_t task) {
    const std::size_t k = task % np, j = (task / np) % ne, i = task / (np * ne);
    const double eps = spec.epsilon_list[j], delta = spec.delta_list[i];
    const auto t0 = std::chrono::steady_clock::now();
    const Deviation dev = with_coords(eps, delta, k, [&] {
      SystemConfig cfg = base;
      cfg.epsilon = eps;
      cfg.delta = delta;
      cfg.validate();
      const FullState z0 = sample_phase(spec.h0, cfg, kappa, spec.seed, k, options.quad_margin);
      const auto samples = run_actual(z0, cfg, kappa, spec.T, options, true, mode);
      return sup_deviation(samples, eps, averaged[i], spec.set, spec.T);
    });
    result.table.rows[task] = {eps, delta, k, dev.sup_error, dev.T_eps, seconds_since(t0)};
  });

  for (double delta : spec.delta_list) {
    DeltaFit df;
    df.delta = delta;
    df.epsilons = spec.epsilon_list;
    for (double eps : spec.epsilon_list) df.worst.push_back(result.table.worst(eps, delta));
    df.fit = fit_loglog_slope(df.epsilons, df.worst);
    result.fits.push_back(std::move(df));
  }
  return result;
}

TwoFloorFit fit_two_floor(const std::vector<double>& eps, const std::vector<double>& delta,
                          const std::vector<double>& err) {
  // Relative least squares: rows (eps/e, delta/e) against 1.
  double a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    if (!(err[i] > 0.0)) continue;
    const double u = eps[i] / err[i], v = delta[i] / err[i];
    a11 += u * u;
    a12 += u * v;
    a22 += v * v;
    b1 += u;
    b2 += v;
  }
  TwoFloorFit fit;
  const double det = a11 * a22 - a12 * a12;
  if (det > 0.0) {
    fit.A = (b1 * a22 - b2 * a12) / det;
    fit.B = (a11 * b2 - a12 * b1) / det;
  }
  if (!(det > 0.0) || fit.A < 0.0 || fit.B < 0.0) {
    // Best single-term fits; keep the one with smaller residual.
    const double A = a11 > 0.0 ? b1 / a11 : 0.0;
    const double B = a22 > 0.0 ? b2 / a22 : 0.0;
    const double n = static_cast<double>(err.size());
    const double resA = n - 2 * A * b1 + A * A * a11;
    const double resB = n - 2 * B * b2 + B * B * a22;
    fit = resA <= resB ? TwoFloorFit{A, 0.0} : TwoFloorFit{0.0, B};
  }
  return fit;
}

SlopeFit fit_above_floor(const std::vector<double>& x, const std::vector<double>& y, double floor) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] >= 2.0 * floor) {
      xs.push_back(x[i]);
      ys.push_back(y[i] - floor);
    }
  return fit_loglog_slope(xs, ys, false);
}

ComparisonResult hard_soft_comparison(const EnsembleSpec& spec, const SystemConfig& base,
                                      const PotentialProfile& kappa, double delta_fixed,
                                      const RunOptions& options) {
  spec.validate();
  if (spec.set.mode != SlowMode::SoftEnergies)
    throw ConfigError("compact_set.mode", "comparison runs compare energies");
  for (double d : spec.delta_list)
    if (!(d > 0.0)) throw ConfigError("study.delta_list", "comparison needs delta > 0");
  if (std::find(spec.delta_list.begin(), spec.delta_list.end(), delta_fixed) ==
      spec.delta_list.end())
    throw ConfigError("study.delta_fixed", "must be one of delta_list");
  const double d_max = *std::max_element(spec.delta_list.begin(), spec.delta_list.end());
  const std::size_t nd = spec.delta_list.size(), ne = spec.epsilon_list.size(),
                    np = spec.n_phases;

  std::vector<std::vector<TrajectorySample>> hard_runs(ne * np);
  parallel_for(ne * np, options.jobs, [&](std::size_t task) {
    const std::size_t k = task % np, j = task / np;
    const double eps = spec.epsilon_list[j];
    hard_runs[task] = with_coords(eps, 0.0, k, [&] {
      SystemConfig cfg = base;
      cfg.epsilon = eps;
      cfg.delta = 0.0;
      const FullState z0 = plateau_phase(spec.h0, cfg, d_max, spec.seed, k);
      return run_actual(z0, cfg, kappa, spec.T, options, false, SlowMode::SoftEnergies);
    });
  });

  ComparisonResult result;
  result.table.rows.resize(nd * ne * np);
  parallel_for(nd * ne * np, options.jobs, [&](std::size_t task) {
    const std::size_t k = task % np, j = (task / np) % ne, i = task / (np * ne);
    const double eps = spec.epsilon_list[j], delta = spec.delta_list[i];
    const auto t0 = std::chrono::steady_clock::now();
    const Deviation dev = with_coords(eps, delta, k, [&] {
      SystemConfig cfg = base;
      cfg.epsilon = eps;
      cfg.delta = delta;
      cfg.validate();
      const FullState z0 = plateau_phase(spec.h0, cfg, d_max, spec.seed, k);
      const auto soft_samples =
          run_actual(z0, cfg, kappa, spec.T, options, false, SlowMode::SoftEnergies);
      return sup_deviation(soft_samples, hard_runs[j * np + k], eps, spec.set, spec.T);
    });
    result.table.rows[task] = {eps, delta, k, dev.sup_error, dev.T_eps, seconds_since(t0)};
  });

  std::vector<double> ge, gd, gw;
  for (double delta : spec.delta_list)
    for (double eps : spec.epsilon_list) {
      ge.push_back(eps);
      gd.push_back(delta);
      gw.push_back(result.table.worst(eps, delta));
    }
  result.floors = fit_two_floor(ge, gd, gw);

  const double eps_min = *std::min_element(spec.epsilon_list.begin(), spec.epsilon_list.end());
  auto& ds = result.delta_sweep;
  ds.fixed = eps_min;
  ds.floor = result.floors.A * eps_min;
  ds.values = spec.delta_list;
  for (double delta : spec.delta_list) ds.worst.push_back(result.table.worst(eps_min, delta));
  ds.fit = fit_above_floor(ds.values, ds.worst, ds.floor);

  auto& es = result.epsilon_sweep;
  es.fixed = delta_fixed;
  es.floor = result.floors.B * delta_fixed;
  es.values = spec.epsilon_list;
  for (double eps : spec.epsilon_list) es.worst.push_back(result.table.worst(eps, delta_fixed));
  es.fit = fit_above_floor(es.values, es.worst, es.floor);
  return result;
}

std::vector<RateRow> collision_rate_audit(const SystemConfig& cfg, const FullState& initial,
                                          double duration) {
  if (cfg.soft()) throw ConfigError("delta", "collision-rate audit runs the hard-core model");
  if (!(duration > 0.0)) throw ConfigError("study.duration", "must be > 0");
  std::vector<double> sum_left(cfg.n1(), 0.0), sum_right(cfg.n2(), 0.0);
  std::size_t count = 0;
  hard::EvolveOptions eo;
  eo.sample_dt = duration / 20000.0;
  const auto res = hard::evolve(initial, initial.t + duration, cfg, eo, [&](const FullState& z) {
    for (std::size_t j = 0; j < cfg.n1(); ++j) sum_left[j] += std::abs(z.v_left[j]) / (2.0 * z.X);
    for (std::size_t j = 0; j < cfg.n2(); ++j)
      sum_right[j] += std::abs(z.v_right[j]) / (2.0 * (1.0 - z.X));
    ++count;
  });
  std::vector<RateRow> rows;
  for (Side side : {Side::Left, Side::Right}) {
    const auto& hits = side == Side::Left ? res.piston_hits_left : res.piston_hits_right;
    const auto& sums = side == Side::Left ? sum_left : sum_right;
    for (std::size_t j = 0; j < hits.size(); ++j) {
      RateRow r;
      r.side = side;
      r.index = j;
      r.hits = hits[j];
      r.rate = static_cast<double>(hits[j]) / duration;
      r.predicted = sums[j] / static_cast<double>(count);
      r.relative_error = std::abs(r.rate - r.predicted) / r.predicted;
      rows.push_back(r);
    }
  }
  return rows;
}

std::vector<EquilibriumRow> equilibrium_study(const EnsembleSpec& spec, const SystemConfig& base,
                                              const RunOptions& options) {
  spec.validate();
  const std::size_t ne = spec.epsilon_list.size(), np = spec.n_phases;
  std::vector<double> shift(ne * np, 0.0);
  const PotentialProfile kappa = PotentialProfile::cubic();
  parallel_for(ne * np, options.jobs, [&](std::size_t task) {
    const std::size_t k = task % np, j = task / np;
    const double eps = spec.epsilon_list[j];
    shift[task] = with_coords(eps, base.delta, k, [&] {
      SystemConfig cfg = base;
      cfg.epsilon = eps;
      cfg.validate();
      const PotentialProfile profile =
          cfg.soft() ? PotentialProfile::from_name(cfg.potential) : kappa;
      const FullState z0 = sample_phase(spec.h0, cfg, profile, spec.seed, k, options.quad_margin);
      const auto samples =
          run_actual(z0, cfg, profile, spec.T, options, !cfg.soft(), cfg.mode());
      double s = 0.0;
      for (const auto& smp : samples) s = std::max(s, std::abs(smp.h.X - spec.h0.X));
      return s;
    });
  });
  std::vector<EquilibriumRow> rows;
  for (std::size_t j = 0; j < ne; ++j) {
    EquilibriumRow r;
    r.epsilon = spec.epsilon_list[j];
    for (std::size_t k = 0; k < np; ++k) r.worst_shift = std::max(r.worst_shift, shift[j * np + k]);
    r.C = r.worst_shift / r.epsilon;
    rows.push_back(r);
  }
  return rows;
}

double select_delta0(const CompactSet& set, const SystemConfig& cfg, const PotentialProfile& kappa,
                     double quad_margin) {
  if (set.mode != SlowMode::SoftEnergies) throw ConfigError("compact_set.mode", "needs energies");
  const double top = 0.5 * set.margin();
  constexpr int kGrid = 9;
  for (int k = 0; k < 40; ++k) {
    const double delta = std::ldexp(top, -k);
    double worst = 0.0;
    bool ok = true;
    for (int a = 0; a < kGrid && ok; ++a)
      for (int b = 0; b < kGrid && ok; ++b) {
        const double X = set.x_bounds.lo + (set.x_bounds.hi - set.x_bounds.lo) * a / (kGrid - 1);
        const double E =
            set.value_bounds.lo + (set.value_bounds.hi - set.value_bounds.lo) * b / (kGrid - 1);
        for (Side side : {Side::Left, Side::Right})
          for (double m : cfg.masses(side)) {
            try {
              worst = std::max(worst, soft::delta_band_width(side, X, E, m, delta, kappa, quad_margin));
            } catch (const DomainError&) {
              ok = false;
            }
          }
      }
    if (ok && worst < 0.25) return delta;
  }
  throw DomainError("no admissible delta0 found for the compact set");
}

}  // namespace piston::harness
