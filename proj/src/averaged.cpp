#include "piston/averaged.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "piston/errors.hpp"

namespace piston::avg {

namespace {

void check_piston(double X) {
  if (!(X > 0.0 && X < 1.0)) throw DomainError("averaged field undefined with X outside (0, 1)");
}

void check_shape(const SlowState& h, const SystemConfig& cfg) {
  if (h.left.size() != cfg.n1() || h.right.size() != cfg.n2())
    throw DomainError("slow state shape does not match configuration");
}

}  // namespace

SlowState avg_field_hard(const SlowState& h, const SystemConfig& cfg) {
  if (h.mode != SlowMode::HardSpeeds) throw DomainError("hard averaged field needs speeds");
  check_shape(h, cfg);
  check_piston(h.X);
  const double wl = h.X, wr = 1.0 - h.X;
  SlowState d = h;
  d.X = h.W;
  double force = 0.0;
  for (std::size_t j = 0; j < h.left.size(); ++j) {
    force += cfg.masses_left[j] * h.left[j] * h.left[j] / wl;
    d.left[j] = -h.left[j] * h.W / wl;
  }
  for (std::size_t j = 0; j < h.right.size(); ++j) {
    force -= cfg.masses_right[j] * h.right[j] * h.right[j] / wr;
    d.right[j] = h.right[j] * h.W / wr;
  }
  d.W = force;
  return d;
}

SlowState avg_field_soft(const SlowState& h, const SystemConfig& cfg,
                         const PotentialProfile& kappa, double margin) {
  if (h.mode != SlowMode::SoftEnergies) throw DomainError("soft averaged field needs energies");
  check_shape(h, cfg);
  check_piston(h.X);
  SlowState d = h;
  d.X = h.W;
  double force = 0.0;
  for (Side side : {Side::Left, Side::Right}) {
    const auto& E = h.values(side);
    const auto& m = cfg.masses(side);
    auto& dE = d.values(side);
    const double sign = side == Side::Left ? 1.0 : -1.0;
    for (std::size_t j = 0; j < E.size(); ++j) {
      const double T = soft::period_T(side, h.X, E[j], m[j], cfg.delta, kappa, margin);
      const double push = std::sqrt(8.0 * m[j] * E[j]) / T;
      force += sign * push;
      dE[j] = -sign * h.W * push;
    }
  }
  d.W = force;
  return d;
}

SlowState avg_field(const SlowState& h, const SystemConfig& cfg, const PotentialProfile& kappa,
                    double margin) {
  return h.mode == SlowMode::HardSpeeds ? avg_field_hard(h, cfg)
                                        : avg_field_soft(h, cfg, kappa, margin);
}

SlowState AveragedTrajectory::at(double tau) const {
  const auto y = dense(tau);
  return SlowState::from_vector(y, n1, mode);
}

AveragedTrajectory solve_averaged(const SlowState& h0, double T, const SystemConfig& cfg,
                                  const PotentialProfile& kappa, const SolveOptions& options) {
  check_shape(h0, cfg);
  if (!(T > 0.0)) throw DomainError("horizon must be positive");
  const std::size_t n1 = h0.left.size();
  const SlowMode mode = h0.mode;
  auto unpack = [&](const ode::Vector& y) { return SlowState::from_vector(y, n1, mode); };
  const ode::Field field = [&](double, const ode::Vector& y, ode::Vector& dy) {
    dy = avg_field(unpack(y), cfg, kappa, options.margin).to_vector();
  };

  AveragedTrajectory traj;
  traj.mode = mode;
  traj.n1 = n1;
  const auto& set = options.compact_set;
  if (set && !membership(h0, *set)) traj.first_exit = 0.0;

  auto inside = [&](const ode::Segment& seg, double t) { return membership(unpack(seg.eval(t)), *set); };
  const auto on_step = [&](const ode::Segment& seg) {
    if (!set || traj.first_exit) return true;
    constexpr int kProbes = 8;
    double prev = seg.t0;
    for (int k = 1; k <= kProbes; ++k) {
      const double t = seg.t0 + seg.h * k / kProbes;
      if (!inside(seg, t)) {
        double lo = prev, hi = t;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (inside(seg, mid)) lo = mid; else hi = mid;
        }
        traj.first_exit = hi;
        break;
      }
      prev = t;
    }
    return true;
  };
  traj.dense = ode::integrate(field, 0.0, h0.to_vector(), T, options.ode, on_step);

  const auto n = static_cast<std::size_t>(std::llround(T * static_cast<double>(options.samples_per_unit)));
  const std::size_t count = std::max<std::size_t>(n, 1);
  traj.grid.reserve(count + 1);
  traj.states.reserve(count + 1);
  for (std::size_t k = 0; k <= count; ++k) {
    const double tau = k == count ? T : T * static_cast<double>(k) / static_cast<double>(count);
    traj.grid.push_back(tau);
    traj.states.push_back(k == 0 ? h0 : traj.at(tau));
  }
  return traj;
}

std::optional<double> find_period(const SlowState& h0, const SystemConfig& cfg,
                                  const PotentialProfile& kappa, const SolveOptions& options,
                                  double max_horizon) {
  SolveOptions opts = options;
  opts.compact_set.reset();
  opts.samples_per_unit = 1;
  constexpr double kQuiet = 1e-10;
  for (double horizon = 4.0; horizon <= max_horizon; horizon *= 2.0) {
    const auto traj = solve_averaged(h0, horizon, cfg, kappa, opts);
    const auto& segs = traj.dense.segments();
    double amplitude = 0.0;
    for (const auto& seg : segs) amplitude = std::max(amplitude, std::abs(seg.rcont[0][1]));
    if (amplitude < kQuiet) return std::nullopt;

    auto W_at = [&](const ode::Segment& seg, double t) { return seg.eval(t)[1]; };
    std::vector<double> zeros;
    for (const auto& seg : segs) {
      const double wa = seg.rcont[0][1];
      const double wb = W_at(seg, seg.t0 + seg.h);
      if (wb == 0.0) {
        zeros.push_back(seg.t0 + seg.h);
        if (zeros.size() >= 3) break;
        continue;
      }
      // A segment starting exactly at W = 0 begins at a zero already counted.
      if (wa == 0.0 || (wa > 0.0) == (wb > 0.0)) continue;
      double lo = seg.t0, hi = seg.t0 + seg.h;
      for (int it = 0; it < 100 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((W_at(seg, mid) > 0.0) == (wa > 0.0)) lo = mid; else hi = mid;
      }
      zeros.push_back(0.5 * (lo + hi));
      if (zeros.size() >= 3) break;
    }
    if (zeros.size() >= 3) return (zeros[1] - zeros[0]) + (zeros[2] - zeros[1]);
  }
  return std::nullopt;
}

double effective_hamiltonian(const SlowState& h, const SlowState& h0, const SystemConfig& cfg) {
  check_piston(h.X);
  const double E1 = side_energy(h0, Side::Left, cfg);
  const double E2 = side_energy(h0, Side::Right, cfg);
  const double rl = h0.X / h.X;
  const double rr = (1.0 - h0.X) / (1.0 - h.X);
  return 0.5 * h.W * h.W + E1 * rl * rl + E2 * rr * rr;
}

double averaged_energy(const SlowState& h, const SystemConfig& cfg) {
  return 0.5 * h.W * h.W + side_energy(h, Side::Left, cfg) + side_energy(h, Side::Right, cfg);
}

double adiabatic_invariant(Side side, double X, double E, double m, double delta,
                           const PotentialProfile& kappa, double margin) {
  // period_T carries the argument checks.
  soft::period_T(side, X, E, m, delta, kappa, margin);
  const double w = side == Side::Left ? X : 1.0 - X;
  const double scale = 2.0 * std::sqrt(2.0 / m);
  if (delta == 0.0) return scale * w * std::sqrt(E);
  return scale * ((w - 2.0 * delta) * std::sqrt(E) + 2.0 * delta * soft::action_integral(E, kappa, margin));
}

double NPistonState::width(std::size_t c) const {
  const double lo = c == 0 ? 0.0 : X[c - 1];
  const double hi = c + 1 == chambers() ? 1.0 : X[c];
  return hi - lo;
}

double NPistonState::chamber_energy(std::size_t c) const {
  double e = 0.0;
  for (std::size_t j = 0; j < s[c].size(); ++j) e += 0.5 * masses[c][j] * s[c][j] * s[c][j];
  return e;
}

void NPistonState::validate() const {
  const std::size_t N = s.size();
  if (N < 2) throw DomainError("need at least two chambers");
  if (X.size() != N - 1 || W.size() != N - 1 || Mhat.size() != N - 1 || masses.size() != N)
    throw DomainError("N-piston arrays have inconsistent sizes");
  for (std::size_t c = 0; c < N; ++c) {
    if (masses[c].size() != s[c].size()) throw DomainError("chamber mass/speed size mismatch");
    if (s[c].empty()) throw DomainError("every chamber needs a gas particle");
    if (!(width(c) > 0.0)) throw DomainError("chamber " + std::to_string(c) + " has width <= 0");
  }
  for (double M : Mhat)
    if (!(M > 0.0)) throw DomainError("scaled piston masses must be positive");
}

std::vector<double> NPistonState::to_vector() const {
  std::vector<double> flat(X);
  flat.insert(flat.end(), W.begin(), W.end());
  for (const auto& row : s) flat.insert(flat.end(), row.begin(), row.end());
  return flat;
}

NPistonState NPistonState::with_values(const std::vector<double>& flat) const {
  NPistonState out = *this;
  std::size_t k = 0;
  for (auto& x : out.X) x = flat.at(k++);
  for (auto& w : out.W) w = flat.at(k++);
  for (auto& row : out.s)
    for (auto& v : row) v = flat.at(k++);
  return out;
}

NPistonState avg_field_npiston(const NPistonState& state) {
  state.validate();
  const std::size_t N = state.chambers();
  NPistonState d = state;
  std::vector<double> push(N);  // sum m s^2 / w per chamber
  for (std::size_t c = 0; c < N; ++c) push[c] = 2.0 * state.chamber_energy(c) / state.width(c);
  for (std::size_t i = 0; i + 1 < N; ++i) {
    d.X[i] = state.W[i];
    d.W[i] = (push[i] - push[i + 1]) / state.Mhat[i];
  }
  for (std::size_t c = 0; c < N; ++c) {
    const double right = c + 1 < N ? state.W[c] : 0.0;
    const double left = c > 0 ? state.W[c - 1] : 0.0;
    const double rate = (right - left) / state.width(c);
    for (std::size_t j = 0; j < state.s[c].size(); ++j) d.s[c][j] = -state.s[c][j] * rate;
  }
  return d;
}

double npiston_hamiltonian(const NPistonState& state, const NPistonState& initial) {
  double h = 0.0;
  for (std::size_t i = 0; i < state.W.size(); ++i) h += 0.5 * state.Mhat[i] * state.W[i] * state.W[i];
  for (std::size_t c = 0; c < state.chambers(); ++c) {
    const double r = initial.width(c) / state.width(c);
    h += initial.chamber_energy(c) * r * r;
  }
  return h;
}

NPistonTrajectory solve_npiston(const NPistonState& initial, double T, const ode::Options& options,
                                std::size_t samples_per_unit) {
  initial.validate();
  const ode::Field field = [&](double, const ode::Vector& y, ode::Vector& dy) {
    dy = avg_field_npiston(initial.with_values(y)).to_vector();
  };
  const auto sol = ode::integrate(field, 0.0, initial.to_vector(), T, options);
  NPistonTrajectory out;
  const auto count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(T * static_cast<double>(samples_per_unit))));
  for (std::size_t k = 0; k <= count; ++k) {
    const double tau = k == count ? T : T * static_cast<double>(k) / static_cast<double>(count);
    out.grid.push_back(tau);
    out.states.push_back(k == 0 ? initial : initial.with_values(sol(tau)));
  }
  return out;
}

}  // namespace piston::avg
