#pragma once

// Event-driven dynamics of the hard-core piston: free flight between
// instantaneous elastic collisions with the piston and the outer walls.

#include <array>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "piston/core.hpp"

namespace piston::hard {

// Events closer than this in micro-time are treated as one simultaneous event.
inline constexpr double kTieTolerance = 1e-12;
// Largest admissible distance between a particle and its collision locus.
inline constexpr double kGapTolerance = 1e-10;

enum class CollisionKind { Piston, Wall };

inline const char* to_string(CollisionKind kind) {
  return kind == CollisionKind::Piston ? "piston" : "wall";
}

struct Collision {
  CollisionKind kind = CollisionKind::Piston;
  Side side = Side::Left;
  std::size_t index = 0;

  friend bool operator==(const Collision&, const Collision&) = default;
};

// Constituents are ordered: left piston hits, right piston hits (ascending
// index within a side), then wall reflections.
struct Event {
  double time = 0.0;  // absolute micro-time
  std::vector<Collision> collisions;

  bool simultaneous() const { return collisions.size() > 1; }
};

// Earliest future event. Throws SimulationError("stalled") if none exists.
Event next_event(const FullState& state, const SystemConfig& cfg);

// Post-collision (v, V) for a gas particle of mass m hitting the piston of
// mass eps^-2. Stable at eps = 0, where V is unchanged and v -> 2V - v.
std::pair<double, double> elastic_velocities(double v, double V, double m, double eps);

// The same map in (s, W) coordinates for a left-side hit: rows of
// (1 / (1 + eps^2 m)) [[1 - eps^2 m, -2 eps], [2 eps m, 1 - eps^2 m]].
std::array<std::array<double, 2>, 2> collision_matrix(double m, double eps);

// Throws DomainError unless the particle sits at the piston (within
// kGapTolerance) and approaches it. Snaps the particle onto the piston.
FullState apply_piston_collision(FullState state, Side side, std::size_t j,
                                 const SystemConfig& cfg);

// Throws DomainError unless the particle sits at its outer wall moving into it.
FullState apply_wall_collision(FullState state, Side side, std::size_t j);

// Applies the constituents in the canonical order. A constituent whose pair is
// already separating after the earlier ones is skipped.
FullState apply_simultaneous(FullState state, const std::vector<Collision>& collisions,
                             const SystemConfig& cfg);

// W^2 / 2 + sum m v^2 / 2 (the piston kinetic energy M V^2 / 2 equals W^2 / 2).
double total_energy(const FullState& state, const SystemConfig& cfg);

struct EventRecord {
  double time = 0.0;
  std::vector<Collision> collisions;
  SlowState pre;
  SlowState post;
};

struct EvolveOptions {
  double sample_dt = 0.0;      // micro-time grid spacing; 0 disables
  bool sample_events = false;  // add pre- and post-event samples
  bool log_events = false;
  std::uint64_t max_events = 100'000'000;
};

// Called on every grid sample and, with sample_events, at each event with the
// pre- and post-collision state.
using Sampler = std::function<void(const FullState&)>;

struct EvolveResult {
  FullState state;
  std::vector<TrajectorySample> samples;
  std::vector<EventRecord> events;
  std::uint64_t event_count = 0;
  std::vector<std::uint64_t> piston_hits_left, piston_hits_right;
};

// Runs the event loop up to until_t. Trajectories are left-continuous: an
// event at exactly until_t (or at a grid time) is applied after sampling.
EvolveResult evolve(FullState state, double until_t, const SystemConfig& cfg,
                    const EvolveOptions& options = {}, const Sampler& sampler = {});

// phi1 = x / (2X) if v > 0, else 1 - x / (2X); phi2 = (1 - x) / (2(1 - X)) if
// v < 0, else 1 - (1 - x) / (2(1 - X)). Values wrapped into [0, 1).
AngleState angle_variables(const FullState& state, const SystemConfig& cfg);

// Inverse of angle_variables for one particle: position and velocity sign.
std::pair<double, double> phase_point(Side side, double phi, double X, double speed);

// Unnormalized invariant density X^n1 (1 - X)^n2.
double liouville_density(double X, std::size_t n1, std::size_t n2);
double liouville_density(const SlowState& h);

}  // namespace piston::hard
