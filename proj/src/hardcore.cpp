#include "piston/hardcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "piston/errors.hpp"

namespace piston::hard {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double wall_of(Side side) { return side == Side::Left ? 0.0 : 1.0; }

bool approaching_piston(Side side, double v, double V) {
  return side == Side::Left ? v > V : v < V;
}

bool approaching_wall(Side side, double v) { return side == Side::Left ? v < 0.0 : v > 0.0; }

void free_flight(FullState& s, double dt) {
  if (dt <= 0.0) return;
  s.X += s.V * dt;
  for (std::size_t j = 0; j < s.x_left.size(); ++j) s.x_left[j] += s.v_left[j] * dt;
  for (std::size_t j = 0; j < s.x_right.size(); ++j) s.x_right[j] += s.v_right[j] * dt;
  s.t += dt;
}

SlowState hard_slow(const FullState& s, const SystemConfig& cfg) {
  SlowState h;
  h.mode = SlowMode::HardSpeeds;
  h.X = s.X;
  h.W = piston_W(s, cfg);
  h.left.resize(s.v_left.size());
  h.right.resize(s.v_right.size());
  for (std::size_t j = 0; j < s.v_left.size(); ++j) h.left[j] = std::abs(s.v_left[j]);
  for (std::size_t j = 0; j < s.v_right.size(); ++j) h.right[j] = std::abs(s.v_right[j]);
  return h;
}

int rank(const Collision& c) {
  if (c.kind == CollisionKind::Piston) return c.side == Side::Left ? 0 : 1;
  return c.side == Side::Left ? 2 : 3;
}

}  // namespace

Event next_event(const FullState& s, const SystemConfig& cfg) {
  check_consistent(s, cfg);
  struct Candidate {
    double dt;
    Collision c;
  };
  std::vector<Candidate> found;
  double best = kInf;
  auto consider = [&](double dt, Collision c) {
    if (!(dt < kInf)) return;
    found.push_back({dt, c});
    best = std::min(best, dt);
  };
  for (Side side : {Side::Left, Side::Right}) {
    const auto& x = s.positions(side);
    const auto& v = s.velocities(side);
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (approaching_piston(side, v[j], s.V)) {
        const double gap = std::max(0.0, side == Side::Left ? s.X - x[j] : x[j] - s.X);
        consider(gap / std::abs(v[j] - s.V), {CollisionKind::Piston, side, j});
      }
      if (approaching_wall(side, v[j])) {
        const double gap = std::max(0.0, std::abs(wall_of(side) - x[j]));
        consider(gap / std::abs(v[j]), {CollisionKind::Wall, side, j});
      }
    }
  }
  if (found.empty()) throw SimulationError("stalled: no future collision at t = " + std::to_string(s.t));

  Event event;
  event.time = s.t + best;
  for (const auto& cand : found)
    if (cand.dt <= best + kTieTolerance) event.collisions.push_back(cand.c);
  std::sort(event.collisions.begin(), event.collisions.end(),
            [](const Collision& a, const Collision& b) {
              if (rank(a) != rank(b)) return rank(a) < rank(b);
              return a.index < b.index;
            });
  return event;
}

std::pair<double, double> elastic_velocities(double v, double V, double m, double eps) {
  // Evaluated in extended precision: in double the rounding leaves a
  // one-signed energy bias that grows linearly with the number of hits.
  const long double e2m = static_cast<long double>(eps) * eps * m;
  const long double kick = 2.0L * (static_cast<long double>(v) - V) / (1.0L + e2m);
  return {static_cast<double>(v - kick), static_cast<double>(V + e2m * kick)};
}

std::array<std::array<double, 2>, 2> collision_matrix(double m, double eps) {
  const double e2m = eps * eps * m;
  const double denom = 1.0 + e2m;
  return {{{(1.0 - e2m) / denom, -2.0 * eps / denom}, {2.0 * eps * m / denom, (1.0 - e2m) / denom}}};
}

FullState apply_piston_collision(FullState s, Side side, std::size_t j, const SystemConfig& cfg) {
  check_consistent(s, cfg);
  auto& x = s.positions(side);
  auto& v = s.velocities(side);
  if (j >= x.size()) throw DomainError("particle index out of range");
  if (!(std::abs(x[j] - s.X) < kGapTolerance))
    throw DomainError(std::string(to_string(side)) + " particle " + std::to_string(j) +
                      " is not at the piston (gap " + std::to_string(x[j] - s.X) + ")");
  if (!approaching_piston(side, v[j], s.V))
    throw DomainError("piston collision with separating velocities (event-ordering bug)");
  const auto [v_new, V_new] = elastic_velocities(v[j], s.V, cfg.masses(side)[j], cfg.epsilon);
  x[j] = s.X;
  v[j] = v_new;
  s.V = V_new;
  return s;
}

FullState apply_wall_collision(FullState s, Side side, std::size_t j) {
  auto& x = s.positions(side);
  auto& v = s.velocities(side);
  if (j >= x.size()) throw DomainError("particle index out of range");
  const double wall = wall_of(side);
  if (!(std::abs(x[j] - wall) < kGapTolerance))
    throw DomainError(std::string(to_string(side)) + " particle " + std::to_string(j) +
                      " is not at its wall");
  if (!approaching_wall(side, v[j])) throw DomainError("wall collision with outgoing velocity");
  x[j] = wall;
  v[j] = -v[j];
  return s;
}

FullState apply_simultaneous(FullState s, const std::vector<Collision>& collisions,
                             const SystemConfig& cfg) {
  for (const auto& c : collisions) {
    const double v = s.velocities(c.side).at(c.index);
    if (c.kind == CollisionKind::Piston) {
      if (approaching_piston(c.side, v, s.V)) s = apply_piston_collision(std::move(s), c.side, c.index, cfg);
    } else if (approaching_wall(c.side, v)) {
      s = apply_wall_collision(std::move(s), c.side, c.index);
    }
  }
  return s;
}

double total_energy(const FullState& s, const SystemConfig& cfg) {
  const double W = piston_W(s, cfg);
  double e = 0.5 * W * W;
  for (std::size_t j = 0; j < s.v_left.size(); ++j)
    e += 0.5 * cfg.masses_left[j] * s.v_left[j] * s.v_left[j];
  for (std::size_t j = 0; j < s.v_right.size(); ++j)
    e += 0.5 * cfg.masses_right[j] * s.v_right[j] * s.v_right[j];
  return e;
}

EvolveResult evolve(FullState s, double until_t, const SystemConfig& cfg,
                    const EvolveOptions& options, const Sampler& sampler) {
  if (cfg.soft()) throw DomainError("hard-core evolution needs delta = 0");
  check_consistent(s, cfg);
  if (until_t < s.t) throw DomainError("until_t precedes the current time");

  EvolveResult result;
  result.piston_hits_left.assign(cfg.n1(), 0);
  result.piston_hits_right.assign(cfg.n2(), 0);
  const bool keep = options.sample_dt > 0.0 || options.sample_events;
  auto emit = [&](const FullState& z) {
    if (keep) result.samples.push_back({z.t, hard_slow(z, cfg)});
    if (sampler) sampler(z);
  };

  const double t0 = s.t;
  std::uint64_t next_k = 0;
  auto grid_time = [&](std::uint64_t k) { return t0 + static_cast<double>(k) * options.sample_dt; };
  // Emits grid samples with time <= t_end, flying a copy of the current state.
  auto emit_grid_until = [&](double t_end) {
    if (!(options.sample_dt > 0.0)) return;
    while (grid_time(next_k) <= t_end) {
      FullState z = s;
      free_flight(z, grid_time(next_k) - s.t);
      z.t = grid_time(next_k);
      emit(z);
      ++next_k;
    }
  };

  while (true) {
    const Event ev = next_event(s, cfg);
    if (ev.time >= until_t) break;
    emit_grid_until(ev.time);
    free_flight(s, ev.time - s.t);
    s.t = ev.time;
    for (const auto& c : ev.collisions) {
      auto& x = s.positions(c.side);
      x[c.index] = c.kind == CollisionKind::Piston ? s.X : wall_of(c.side);
    }
    if (options.sample_events) emit(s);
    SlowState pre;
    if (options.log_events) pre = hard_slow(s, cfg);
    for (const auto& c : ev.collisions) {
      if (c.kind != CollisionKind::Piston) continue;
      if (!approaching_piston(c.side, s.velocities(c.side)[c.index], s.V)) continue;
      (c.side == Side::Left ? result.piston_hits_left : result.piston_hits_right)[c.index]++;
    }
    s = apply_simultaneous(std::move(s), ev.collisions, cfg);
    if (options.sample_events) emit(s);
    if (options.log_events) result.events.push_back({ev.time, ev.collisions, std::move(pre), hard_slow(s, cfg)});
    if (++result.event_count > options.max_events)
      throw SimulationError("event cap " + std::to_string(options.max_events) +
                            " exceeded at t = " + std::to_string(s.t) + " (X = " +
                            std::to_string(s.X) + ")");
  }
  emit_grid_until(until_t);
  free_flight(s, until_t - s.t);
  s.t = until_t;
  result.state = std::move(s);
  return result;
}

AngleState angle_variables(const FullState& s, const SystemConfig& cfg) {
  check_consistent(s, cfg);
  if (!(s.X > 0.0 && s.X < 1.0)) throw DomainError("piston must lie strictly inside (0, 1)");
  auto wrap = [](double phi) { return phi >= 1.0 ? phi - 1.0 : phi; };
  AngleState out;
  for (std::size_t j = 0; j < cfg.n1(); ++j) {
    const double v = s.v_left[j];
    if (v == 0.0) throw DomainError("angle undefined for a particle at rest");
    const double r = s.x_left[j] / (2.0 * s.X);
    out.phi_left.push_back(wrap(v > 0.0 ? r : 1.0 - r));
  }
  for (std::size_t j = 0; j < cfg.n2(); ++j) {
    const double v = s.v_right[j];
    if (v == 0.0) throw DomainError("angle undefined for a particle at rest");
    const double r = (1.0 - s.x_right[j]) / (2.0 * (1.0 - s.X));
    out.phi_right.push_back(wrap(v < 0.0 ? r : 1.0 - r));
  }
  return out;
}

std::pair<double, double> phase_point(Side side, double phi, double X, double speed) {
  phi -= std::floor(phi);
  const bool outbound = phi < 0.5;  // moving away from the outer wall
  const double frac = outbound ? phi : 1.0 - phi;
  if (side == Side::Left) return {2.0 * X * frac, outbound ? speed : -speed};
  return {1.0 - 2.0 * (1.0 - X) * frac, outbound ? -speed : speed};
}

double liouville_density(double X, std::size_t n1, std::size_t n2) {
  return std::pow(X, static_cast<double>(n1)) * std::pow(1.0 - X, static_cast<double>(n2));
}

double liouville_density(const SlowState& h) {
  return liouville_density(h.X, h.left.size(), h.right.size());
}

}  // namespace piston::hard
