#pragma once

// Shared domain types for the one-dimensional piston system: configuration,
// the full phase-space state, the slow variables h = (X, W, s or E) and the
// compact set used for stopping times.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace piston {

class PotentialProfile;

enum class Side { Left, Right };

inline const char* to_string(Side side) { return side == Side::Left ? "left" : "right"; }

// Hard mode stores particle speeds s = |v|; soft mode stores particle
// energies E (kinetic plus wall/piston potential).
enum class SlowMode { HardSpeeds, SoftEnergies };

inline const char* to_string(SlowMode mode) {
  return mode == SlowMode::HardSpeeds ? "hard" : "soft";
}

struct SystemConfig {
  std::vector<double> masses_left{1.0};
  std::vector<double> masses_right{1.0};
  double epsilon = 0.01;  // M^{-1/2}; 0 freezes the piston
  double delta = 0.0;     // smoothing width, 0 = hard core
  std::string potential = "cubic";
  double horizon_T = 1.0;  // slow-time horizon
  std::uint64_t seed = 0;

  std::size_t n1() const { return masses_left.size(); }
  std::size_t n2() const { return masses_right.size(); }
  const std::vector<double>& masses(Side side) const {
    return side == Side::Left ? masses_left : masses_right;
  }
  bool soft() const { return delta > 0.0; }
  SlowMode mode() const { return soft() ? SlowMode::SoftEnergies : SlowMode::HardSpeeds; }

  // Throws ConfigError on the first violated invariant.
  void validate() const;
};

struct FullState {
  double t = 0.0;
  double X = 0.5;
  double V = 0.0;  // piston velocity, V = epsilon * W
  std::vector<double> x_left, v_left;
  std::vector<double> x_right, v_right;

  std::vector<double>& positions(Side side) { return side == Side::Left ? x_left : x_right; }
  std::vector<double>& velocities(Side side) { return side == Side::Left ? v_left : v_right; }
  const std::vector<double>& positions(Side side) const {
    return side == Side::Left ? x_left : x_right;
  }
  const std::vector<double>& velocities(Side side) const {
    return side == Side::Left ? v_left : v_right;
  }
};

// Throws DomainError if array lengths disagree with cfg or a value is NaN.
void check_consistent(const FullState& state, const SystemConfig& cfg);

// Rescaled piston velocity W = V / epsilon. With epsilon == 0 the piston is
// frozen and W is reported as 0; a nonzero V is an error.
double piston_W(const FullState& state, const SystemConfig& cfg);

struct SlowState {
  double X = 0.5;
  double W = 0.0;
  std::vector<double> left;
  std::vector<double> right;
  SlowMode mode = SlowMode::HardSpeeds;

  std::vector<double>& values(Side side) { return side == Side::Left ? left : right; }
  const std::vector<double>& values(Side side) const {
    return side == Side::Left ? left : right;
  }

  std::size_t dimension() const { return 2 + left.size() + right.size(); }

  // Flattened as (X, W, left..., right...).
  std::vector<double> to_vector() const;
  static SlowState from_vector(std::span<const double> flat, std::size_t n1, SlowMode mode);
};

// A time-stamped slow-state sample of an actual (micro-time) trajectory.
struct TrajectorySample {
  double t = 0.0;
  SlowState h;
};

// Angle coordinates on the circle [0, 1) with 0 ~ 1. Piston contact sits at
// phi = 1/2, the outer wall at phi = 0.
struct AngleState {
  std::vector<double> phi_left;
  std::vector<double> phi_right;
};

// Max-norm distance over all slow components. Modes and shapes must agree.
double max_norm_distance(const SlowState& a, const SlowState& b);

// Mode conversion through E = m s^2 / 2, particle by particle.
SlowState to_energies(const SlowState& h, const SystemConfig& cfg);
SlowState to_speeds(const SlowState& h, const SystemConfig& cfg);
SlowState with_mode(const SlowState& h, SlowMode mode, const SystemConfig& cfg);

// Projection onto the slow variables. Hard mode when cfg.delta == 0, otherwise
// particle energies including the potential terms (profile defaults to cubic).
SlowState slow_state_of(const FullState& full, const SystemConfig& cfg,
                        const PotentialProfile* profile = nullptr);

// Gas energy per side: sum of m s^2 / 2 (hard) or of E (soft).
double side_energy(const SlowState& h, Side side, const SystemConfig& cfg);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  bool within(const Interval& outer) const { return lo >= outer.lo && hi <= outer.hi; }
};

struct CompactSet {
  Interval x_bounds{0.1, 0.9};
  double w_max = 10.0;
  Interval value_bounds{0.1, 10.0};  // speeds (hard) or energies (soft)
  SlowMode mode = SlowMode::HardSpeeds;
  double barrier = 1.0;  // kappa(0); only meaningful in soft mode

  static CompactSet hard_default();
  static CompactSet soft_default(double barrier = 1.0);

  // Smallest distance from the bounds to the excluded values {0, 1} for X and
  // {0, barrier} (soft) or {0} (hard) for particle values.
  double margin() const;

  bool subset_of(const CompactSet& other) const;
};

bool membership(const SlowState& h, const CompactSet& set);

struct Pressures {
  double left = 0.0;
  double right = 0.0;
};

// P1 = 2 E1 / X, P2 = 2 E2 / (1 - X).
Pressures pressures(const SlowState& h, const SystemConfig& cfg);

}  // namespace piston
