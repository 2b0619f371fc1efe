#include "piston/softcore.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "piston/errors.hpp"
#include "piston/quadrature.hpp"

namespace piston::soft {

namespace {

double chamber_width(Side side, double X) { return side == Side::Left ? X : 1.0 - X; }

void check_band(double E, const PotentialProfile& kappa, double margin) {
  if (!(E > margin && E < kappa.barrier() - margin))
    throw DomainError("energy " + std::to_string(E) + " outside band (" + std::to_string(margin) +
                      ", " + std::to_string(kappa.barrier() - margin) + ")");
}

// int_0^y -kinv'(u) / sqrt(E - u) du for y < E, with u = w^3 removing the
// singularity of kinv' at the origin.
double lower_piece(double E, double y, const PotentialProfile& kappa) {
  if (y <= 0.0) return 0.0;
  return quad::adaptive(
      [&](double w) {
        const double u = w * w * w;
        return -kappa.inverse_prime(u) * 3.0 * w * w / std::sqrt(E - u);
      },
      0.0, std::cbrt(y));
}

// int_y^E -kinv'(u) / sqrt(E - u) du for y > 0, with E - u = r^2.
double upper_piece(double E, double y, const PotentialProfile& kappa) {
  if (y >= E) return 0.0;
  return quad::adaptive([&](double r) { return -2.0 * kappa.inverse_prime(E - r * r); }, 0.0,
                        std::sqrt(E - y));
}

// Frozen-piston orbit of one particle in chamber coordinates: xi is the
// distance from the outer wall, w the chamber width.
struct Orbit {
  Orbit(double E_, double m, double w_, double delta_, const PotentialProfile& kappa_,
        double margin)
      : E(E_), w(w_), delta(delta_), kappa(kappa_), scale(std::sqrt(0.5 * m)) {
    F = F_integral(E, kappa, margin);
    T = scale * ((2.0 * w - 4.0 * delta) / std::sqrt(E) + 4.0 * delta * F);
    t_skin = scale * delta * F;
    v_plateau = std::sqrt(E) / scale;
    a = turning_point(E, delta, kappa);
  }

  // Time from the turning point to the depth where kappa = y.
  double skin_time(double y) const {
    if (y >= E) return 0.0;
    const double integral = (y <= 0.5 * E) ? F - lower_piece(E, y, kappa) : upper_piece(E, y, kappa);
    return scale * delta * integral;
  }

  // Time from the wall turning point, moving toward the piston, to reach xi.
  double forward_time(double xi) const {
    if (xi <= delta) return skin_time(kappa.kappa(xi / delta));
    if (xi <= w - delta) return t_skin + (xi - delta) / v_plateau;
    return 0.5 * T - skin_time(kappa.kappa((w - xi) / delta));
  }

  double E, w, delta;
  const PotentialProfile& kappa;
  double scale;  // sqrt(m / 2)
  double F = 0.0, T = 0.0, t_skin = 0.0, v_plateau = 0.0, a = 0.0;
};

// Depth z in [a, delta] below a wall at which the skin time equals target.
// Newton on t(z) with dt/dz = 1 / speed, falling back to bisection whenever
// a step leaves the bracket.
double invert_skin(const Orbit& orbit, double target) {
  const auto& kappa = orbit.kappa;
  double lo = orbit.a, hi = orbit.delta;
  double z = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    const double y = kappa.kappa(z / orbit.delta);
    const double g = orbit.skin_time(y) - target;
    if (g < 0.0) lo = z; else hi = z;
    const double speed = std::sqrt(std::max(0.0, orbit.E - y)) / orbit.scale;
    double next = z - g * speed;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - z) <= 1e-15 * orbit.delta || hi - lo <= 1e-15 * orbit.delta) return next;
    z = next;
  }
  return z;
}

}  // namespace

double potential_U(Side side, double x, double X, double delta, const PotentialProfile& kappa) {
  if (side == Side::Left) return kappa.kappa_delta(x, delta) + kappa.kappa_delta(X - x, delta);
  return kappa.kappa_delta(x - X, delta) + kappa.kappa_delta(1.0 - x, delta);
}

double particle_energy(Side side, double x, double v, double m, double X, double delta,
                       const PotentialProfile& kappa) {
  return 0.5 * m * v * v + potential_U(side, x, X, delta, kappa);
}

double total_energy(const FullState& state, const SystemConfig& cfg,
                    const PotentialProfile& kappa) {
  const double W = piston_W(state, cfg);
  double h = 0.5 * W * W;
  for (Side side : {Side::Left, Side::Right}) {
    const auto& x = state.positions(side);
    const auto& v = state.velocities(side);
    const auto& m = cfg.masses(side);
    for (std::size_t j = 0; j < x.size(); ++j)
      h += particle_energy(side, x[j], v[j], m[j], state.X, cfg.delta, kappa);
  }
  return h;
}

double piston_force(const FullState& state, double delta, const PotentialProfile& kappa) {
  double f = 0.0;
  for (double x : state.x_left) f -= kappa.kappa_delta_prime(state.X - x, delta);
  for (double x : state.x_right) f += kappa.kappa_delta_prime(x - state.X, delta);
  return f;
}

Derivative rhs(const FullState& state, const SystemConfig& cfg, const PotentialProfile& kappa) {
  if (!cfg.soft()) throw DomainError("soft-core field needs delta > 0; use the hard-core module");
  check_consistent(state, cfg);
  const double d = cfg.delta;
  Derivative out;
  out.dX = state.V;
  out.dV = cfg.epsilon * cfg.epsilon * piston_force(state, d, kappa);
  out.dx_left = state.v_left;
  out.dx_right = state.v_right;
  out.dv_left.resize(cfg.n1());
  out.dv_right.resize(cfg.n2());
  for (std::size_t j = 0; j < cfg.n1(); ++j) {
    const double x = state.x_left[j];
    out.dv_left[j] =
        (-kappa.kappa_delta_prime(x, d) + kappa.kappa_delta_prime(state.X - x, d)) /
        cfg.masses_left[j];
  }
  for (std::size_t j = 0; j < cfg.n2(); ++j) {
    const double x = state.x_right[j];
    out.dv_right[j] =
        (-kappa.kappa_delta_prime(x - state.X, d) + kappa.kappa_delta_prime(1.0 - x, d)) /
        cfg.masses_right[j];
  }
  return out;
}

double default_step(const FullState& state, const SystemConfig& cfg,
                    const PotentialProfile& kappa, int steps_per_skin) {
  double v_max = std::abs(state.V);
  for (Side side : {Side::Left, Side::Right}) {
    const auto& x = state.positions(side);
    const auto& v = state.velocities(side);
    const auto& m = cfg.masses(side);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double E = particle_energy(side, x[j], v[j], m[j], state.X, cfg.delta, kappa);
      v_max = std::max(v_max, std::sqrt(2.0 * E / m[j]));
    }
  }
  if (!(v_max > 0.0)) throw DomainError("cannot choose a step for a system at rest");
  return cfg.delta / (steps_per_skin * v_max);
}

namespace {

class Stepper {
 public:
  Stepper(const SystemConfig& cfg, const PotentialProfile& kappa, Scheme scheme)
      : cfg_(cfg), kappa_(kappa) {
    if (scheme == Scheme::PositionVerlet) {
      drift_ = {0.5, 0.5};
      kick_ = {1.0};
    } else {
      const double cbrt2 = std::cbrt(2.0);
      const double w1 = 1.0 / (2.0 - cbrt2);
      const double w0 = -cbrt2 / (2.0 - cbrt2);
      drift_ = {0.5 * w1, 0.5 * (w1 + w0), 0.5 * (w0 + w1), 0.5 * w1};
      kick_ = {w1, w0, w1};
    }
  }

  void step(FullState& s, double h) const {
    for (std::size_t i = 0; i < kick_.size(); ++i) {
      drift(s, drift_[i] * h);
      kick(s, kick_[i] * h);
    }
    drift(s, drift_.back() * h);
  }

 private:
  static void drift(FullState& s, double h) {
    s.X += h * s.V;
    for (std::size_t j = 0; j < s.x_left.size(); ++j) s.x_left[j] += h * s.v_left[j];
    for (std::size_t j = 0; j < s.x_right.size(); ++j) s.x_right[j] += h * s.v_right[j];
  }

  void kick(FullState& s, double h) const {
    const double d = cfg_.delta;
    double fp = 0.0;
    for (std::size_t j = 0; j < s.x_left.size(); ++j) {
      const double x = s.x_left[j];
      const double wall = kappa_.kappa_delta_prime(x, d);
      const double pist = kappa_.kappa_delta_prime(s.X - x, d);
      s.v_left[j] += h * (pist - wall) / cfg_.masses_left[j];
      fp -= pist;
    }
    for (std::size_t j = 0; j < s.x_right.size(); ++j) {
      const double x = s.x_right[j];
      const double pist = kappa_.kappa_delta_prime(x - s.X, d);
      const double wall = kappa_.kappa_delta_prime(1.0 - x, d);
      s.v_right[j] += h * (wall - pist) / cfg_.masses_right[j];
      fp += pist;
    }
    s.V += h * cfg_.epsilon * cfg_.epsilon * fp;
  }

  const SystemConfig& cfg_;
  const PotentialProfile& kappa_;
  std::vector<double> drift_, kick_;
};

void check_ordering(const FullState& s) {
  bool ok = s.X > 0.0 && s.X < 1.0;
  for (double x : s.x_left) ok = ok && x > 0.0 && x < s.X;
  for (double x : s.x_right) ok = ok && x > s.X && x < 1.0;
  if (!ok)
    throw SimulationError("barrier breach at t = " + std::to_string(s.t) +
                          ": a gas particle crossed a wall or the piston");
}

}  // namespace

IntegrateResult integrate(FullState state, double until_t, const SystemConfig& cfg,
                          const PotentialProfile& kappa, const StepControl& control) {
  if (!cfg.soft()) throw DomainError("soft-core integration needs delta > 0");
  check_consistent(state, cfg);
  if (until_t < state.t) throw DomainError("until_t precedes the current time");
  check_ordering(state);

  const double h_max =
      control.dt > 0.0 ? control.dt : default_step(state, cfg, kappa, control.steps_per_skin);
  const Stepper stepper(cfg, kappa, control.scheme);
  const double H0 = total_energy(state, cfg, kappa);

  IntegrateResult result;
  // Secular drift is read off in quiet states, where every particle is on a
  // plateau and the energy carries no step-size dependent oscillation. The
  // reference is the first quiet state: a start inside a skin shifts every
  // later quiet energy by the same O(h^2) offset, which is not drift.
  const double d = cfg.delta;
  auto quiet = [&] {
    for (double x : state.x_left)
      if (x < d || state.X - x < d) return false;
    for (double x : state.x_right)
      if (x - state.X < d || 1.0 - x < d) return false;
    return true;
  };
  std::optional<double> H_quiet;
  auto check_drift = [&] {
    const double error = std::abs(total_energy(state, cfg, kappa) - H0) / std::abs(H0);
    result.max_energy_error = std::max(result.max_energy_error, error);
    if (!quiet()) return;
    if (!H_quiet) H_quiet = total_energy(state, cfg, kappa);
    const double drift = std::abs(total_energy(state, cfg, kappa) - *H_quiet) / std::abs(*H_quiet);
    result.max_relative_drift = std::max(result.max_relative_drift, drift);
    if (drift > control.drift_tolerance)
      throw SimulationError("relative energy drift " + std::to_string(drift) + " at t = " +
                            std::to_string(state.t) + " exceeds tolerance; reduce the step");
  };
  auto record = [&] { result.samples.push_back({state.t, slow_state_of(state, cfg, &kappa)}); };

  const double t0 = state.t;
  std::vector<double> targets;
  if (control.sample_dt > 0.0) {
    record();
    const auto n = static_cast<std::uint64_t>(std::floor((until_t - t0) / control.sample_dt + 1e-9));
    targets.reserve(n + 1);
    for (std::uint64_t k = 1; k <= n; ++k) targets.push_back(t0 + k * control.sample_dt);
    if (targets.empty() || until_t - targets.back() > 1e-12 * std::max(1.0, until_t))
      targets.push_back(until_t);
    else
      targets.back() = until_t;
  } else {
    targets.push_back(until_t);
  }

  constexpr std::uint64_t kCheckEvery = 64;
  for (double target : targets) {
    const double span = target - state.t;
    if (span > 0.0) {
      const auto n = static_cast<std::uint64_t>(std::max(1.0, std::ceil(span / h_max - 1e-9)));
      const double h = span / static_cast<double>(n);
      for (std::uint64_t i = 0; i < n; ++i) {
        stepper.step(state, h);
        state.t = target - static_cast<double>(n - i - 1) * h;
        check_ordering(state);
        if (++result.steps % kCheckEvery == 0) check_drift();
      }
    }
    state.t = target;
    check_drift();
    if (control.sample_dt > 0.0) record();
  }
  result.state = std::move(state);
  return result;
}

double F_integral(double E, const PotentialProfile& kappa, double margin) {
  check_band(E, kappa, margin);
  const double c = 0.5 * margin;
  return lower_piece(E, c, kappa) + upper_piece(E, c, kappa);
}

double F_integral_prime(double E, const PotentialProfile& kappa, double margin) {
  check_band(E, kappa, margin);
  const double c = 0.5 * margin;
  // Derivative of the piece on [0, c]: differentiate under the integral.
  const double d1 = quad::adaptive(
      [&](double w) {
        const double u = w * w * w;
        return kappa.inverse_prime(u) * 3.0 * w * w / (2.0 * std::pow(E - u, 1.5));
      },
      0.0, std::cbrt(c));
  // Piece on [c, E] in the variable v = E - u: boundary term plus interior.
  const double boundary = -kappa.inverse_prime(c) / std::sqrt(E - c);
  const double interior = quad::adaptive(
      [&](double r) { return -2.0 * kappa.inverse_second(E - r * r); }, 0.0, std::sqrt(E - c));
  return d1 + boundary + interior;
}

double action_integral(double E, const PotentialProfile& kappa, double margin) {
  check_band(E, kappa, margin);
  const double c = 0.5 * margin;
  const double g1 = quad::adaptive(
      [&](double w) {
        const double u = w * w * w;
        return -kappa.inverse_prime(u) * 3.0 * w * w * std::sqrt(E - u);
      },
      0.0, std::cbrt(c));
  const double g2 = quad::adaptive(
      [&](double r) { return -2.0 * r * r * kappa.inverse_prime(E - r * r); }, 0.0,
      std::sqrt(E - c));
  return g1 + g2;
}

double turning_point(double E, double delta, const PotentialProfile& kappa) {
  return delta * kappa.inverse(E);
}

namespace {

void check_period_args(Side side, double X, double E, double m, double delta,
                       const PotentialProfile& kappa, double margin) {
  if (!(m > 0.0)) throw DomainError("mass must be positive");
  if (!(delta >= 0.0)) throw DomainError("delta must be >= 0");
  const double w = chamber_width(side, X);
  if (!(w > 0.0 && w < 1.0)) throw DomainError("piston must lie strictly inside (0, 1)");
  if (delta == 0.0) {
    if (!(E > 0.0)) throw DomainError("energy must be positive");
    return;
  }
  check_band(E, kappa, margin);
  if (!(w > 2.0 * delta)) throw DomainError("chamber narrower than two potential skins");
}

}  // namespace

double period_T(Side side, double X, double E, double m, double delta,
                const PotentialProfile& kappa, double margin) {
  check_period_args(side, X, E, m, delta, kappa, margin);
  const double w = chamber_width(side, X);
  const double scale = std::sqrt(0.5 * m);
  if (delta == 0.0) return scale * 2.0 * w / std::sqrt(E);
  return scale * ((2.0 * w - 4.0 * delta) / std::sqrt(E) + 4.0 * delta * F_integral(E, kappa, margin));
}

PeriodPartials period_partials(Side side, double X, double E, double m, double delta,
                               const PotentialProfile& kappa, double margin) {
  check_period_args(side, X, E, m, delta, kappa, margin);
  const double w = chamber_width(side, X);
  const double scale = std::sqrt(0.5 * m);
  const double sign = side == Side::Left ? 1.0 : -1.0;
  PeriodPartials p;
  p.dT_dX = sign * scale * 2.0 / std::sqrt(E);
  p.dT_dE = -scale * (w - 2.0 * delta) / (E * std::sqrt(E));
  if (delta > 0.0) p.dT_dE += scale * 4.0 * delta * F_integral_prime(E, kappa, margin);
  return p;
}

double delta_band_width(Side side, double X, double E, double m, double delta,
                        const PotentialProfile& kappa, double margin) {
  if (delta == 0.0) return 0.0;
  const double T = period_T(side, X, E, m, delta, kappa, margin);
  return std::sqrt(0.5 * m) * delta * F_integral(E, kappa, margin) / T;
}

double soft_angle(Side side, double x, double v, double m, double X, double delta,
                  const PotentialProfile& kappa, double margin) {
  if (!(delta > 0.0)) throw DomainError("soft angle needs delta > 0");
  const double E = particle_energy(side, x, v, m, X, delta, kappa);
  const double w = chamber_width(side, X);
  check_period_args(side, X, E, m, delta, kappa, margin);
  const Orbit orbit(E, m, w, delta, kappa, margin);
  const double xi = side == Side::Left ? x : 1.0 - x;
  if (v == 0.0) return xi < 0.5 * w ? 0.0 : 0.5;
  const bool toward_piston = side == Side::Left ? v > 0.0 : v < 0.0;
  const double frac = std::clamp(orbit.forward_time(xi) / orbit.T, 0.0, 0.5);
  double phi = toward_piston ? frac : 1.0 - frac;
  if (phi >= 1.0) phi -= 1.0;
  return phi;
}

AngleState soft_angle_variables(const FullState& state, const SystemConfig& cfg,
                                const PotentialProfile& kappa, double margin) {
  check_consistent(state, cfg);
  AngleState out;
  for (std::size_t j = 0; j < cfg.n1(); ++j)
    out.phi_left.push_back(soft_angle(Side::Left, state.x_left[j], state.v_left[j],
                                      cfg.masses_left[j], state.X, cfg.delta, kappa, margin));
  for (std::size_t j = 0; j < cfg.n2(); ++j)
    out.phi_right.push_back(soft_angle(Side::Right, state.x_right[j], state.v_right[j],
                                       cfg.masses_right[j], state.X, cfg.delta, kappa, margin));
  return out;
}

std::pair<double, double> soft_phase_point(Side side, double phi, double X, double E, double m,
                                           double delta, const PotentialProfile& kappa,
                                           double margin) {
  if (!(delta > 0.0)) throw DomainError("soft phase point needs delta > 0");
  check_period_args(side, X, E, m, delta, kappa, margin);
  phi -= std::floor(phi);
  const double w = chamber_width(side, X);
  const Orbit orbit(E, m, w, delta, kappa, margin);
  const bool toward_piston = phi < 0.5;
  const double elapsed = (toward_piston ? phi : 1.0 - phi) * orbit.T;

  double xi;
  if (elapsed <= orbit.t_skin) {
    xi = invert_skin(orbit, elapsed);
  } else if (elapsed <= 0.5 * orbit.T - orbit.t_skin) {
    xi = delta + (elapsed - orbit.t_skin) * orbit.v_plateau;
  } else {
    // the piston skin mirrors the wall skin
    xi = w - invert_skin(orbit, 0.5 * orbit.T - elapsed);
  }
  const double U = kappa.kappa_delta(xi, delta) + kappa.kappa_delta(w - xi, delta);
  const double speed = std::sqrt(std::max(0.0, 2.0 * (E - U) / m));
  const double x = side == Side::Left ? xi : 1.0 - xi;
  const double dir_to_piston = side == Side::Left ? 1.0 : -1.0;
  const double v = (toward_piston ? dir_to_piston : -dir_to_piston) * speed;
  return {x, v};
}

}  // namespace piston::soft
