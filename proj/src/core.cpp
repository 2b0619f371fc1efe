#include "piston/core.hpp"

#include <algorithm>
#include <cmath>

#include "piston/errors.hpp"
#include "piston/potential.hpp"
#include "piston/softcore.hpp"

namespace piston {

void SystemConfig::validate() const {
  if (masses_left.empty()) throw ConfigError("n1", "need at least one left particle");
  if (masses_right.empty()) throw ConfigError("n2", "need at least one right particle");
  for (double m : masses_left)
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("masses_left", "masses must be > 0");
  for (double m : masses_right)
    if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("masses_right", "masses must be > 0");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon", "must be >= 0");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("delta", "must be >= 0");
  if (!(horizon_T > 0.0) || !std::isfinite(horizon_T))
    throw ConfigError("horizon_T", "must be > 0");
  if (potential.empty()) throw ConfigError("potential", "empty profile name");
}

void check_consistent(const FullState& s, const SystemConfig& cfg) {
  if (s.x_left.size() != cfg.n1() || s.v_left.size() != cfg.n1() ||
      s.x_right.size() != cfg.n2() || s.v_right.size() != cfg.n2())
    throw DomainError("state shape does not match configuration particle counts");
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!std::isfinite(s.t) || !std::isfinite(s.X) || !std::isfinite(s.V) || !finite(s.x_left) ||
      !finite(s.v_left) || !finite(s.x_right) || !finite(s.v_right))
    throw DomainError("state contains non-finite values");
}

double piston_W(const FullState& state, const SystemConfig& cfg) {
  if (cfg.epsilon > 0.0) return state.V / cfg.epsilon;
  if (state.V != 0.0) throw DomainError("W undefined: epsilon = 0 with nonzero piston velocity");
  return 0.0;
}

std::vector<double> SlowState::to_vector() const {
  std::vector<double> flat;
  flat.reserve(dimension());
  flat.push_back(X);
  flat.push_back(W);
  flat.insert(flat.end(), left.begin(), left.end());
  flat.insert(flat.end(), right.begin(), right.end());
  return flat;
}

SlowState SlowState::from_vector(std::span<const double> flat, std::size_t n1, SlowMode mode) {
  if (flat.size() < 2 + n1) throw DomainError("slow vector too short");
  SlowState h;
  h.X = flat[0];
  h.W = flat[1];
  h.left.assign(flat.begin() + 2, flat.begin() + 2 + static_cast<std::ptrdiff_t>(n1));
  h.right.assign(flat.begin() + 2 + static_cast<std::ptrdiff_t>(n1), flat.end());
  h.mode = mode;
  return h;
}

double max_norm_distance(const SlowState& a, const SlowState& b) {
  if (a.mode != b.mode) throw DomainError("slow states in different modes");
  if (a.left.size() != b.left.size() || a.right.size() != b.right.size())
    throw DomainError("slow states have different shapes");
  double d = std::max(std::abs(a.X - b.X), std::abs(a.W - b.W));
  for (std::size_t j = 0; j < a.left.size(); ++j) d = std::max(d, std::abs(a.left[j] - b.left[j]));
  for (std::size_t j = 0; j < a.right.size(); ++j)
    d = std::max(d, std::abs(a.right[j] - b.right[j]));
  return d;
}

namespace {

void check_shape(const SlowState& h, const SystemConfig& cfg) {
  if (h.left.size() != cfg.n1() || h.right.size() != cfg.n2())
    throw DomainError("slow state shape does not match configuration");
}

}  // namespace

SlowState to_energies(const SlowState& h, const SystemConfig& cfg) {
  check_shape(h, cfg);
  if (h.mode == SlowMode::SoftEnergies) return h;
  SlowState out = h;
  out.mode = SlowMode::SoftEnergies;
  for (Side side : {Side::Left, Side::Right}) {
    auto& vals = out.values(side);
    const auto& m = cfg.masses(side);
    for (std::size_t j = 0; j < vals.size(); ++j) vals[j] = 0.5 * m[j] * vals[j] * vals[j];
  }
  return out;
}

SlowState to_speeds(const SlowState& h, const SystemConfig& cfg) {
  check_shape(h, cfg);
  if (h.mode == SlowMode::HardSpeeds) return h;
  SlowState out = h;
  out.mode = SlowMode::HardSpeeds;
  for (Side side : {Side::Left, Side::Right}) {
    auto& vals = out.values(side);
    const auto& m = cfg.masses(side);
    for (std::size_t j = 0; j < vals.size(); ++j) {
      if (vals[j] < 0.0) throw DomainError("negative energy has no speed");
      vals[j] = std::sqrt(2.0 * vals[j] / m[j]);
    }
  }
  return out;
}

SlowState with_mode(const SlowState& h, SlowMode mode, const SystemConfig& cfg) {
  return mode == SlowMode::HardSpeeds ? to_speeds(h, cfg) : to_energies(h, cfg);
}

SlowState slow_state_of(const FullState& full, const SystemConfig& cfg,
                        const PotentialProfile* profile) {
  check_consistent(full, cfg);
  SlowState h;
  h.X = full.X;
  h.W = piston_W(full, cfg);
  h.left.resize(cfg.n1());
  h.right.resize(cfg.n2());
  if (!cfg.soft()) {
    h.mode = SlowMode::HardSpeeds;
    for (std::size_t j = 0; j < cfg.n1(); ++j) h.left[j] = std::abs(full.v_left[j]);
    for (std::size_t j = 0; j < cfg.n2(); ++j) h.right[j] = std::abs(full.v_right[j]);
    return h;
  }
  const PotentialProfile fallback = PotentialProfile::cubic();
  const PotentialProfile& kappa = profile ? *profile : fallback;
  h.mode = SlowMode::SoftEnergies;
  for (Side side : {Side::Left, Side::Right}) {
    const auto& x = full.positions(side);
    const auto& v = full.velocities(side);
    const auto& m = cfg.masses(side);
    auto& out = h.values(side);
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] = soft::particle_energy(side, x[j], v[j], m[j], full.X, cfg.delta, kappa);
  }
  return h;
}

double side_energy(const SlowState& h, Side side, const SystemConfig& cfg) {
  check_shape(h, cfg);
  const auto& vals = h.values(side);
  double e = 0.0;
  if (h.mode == SlowMode::SoftEnergies) {
    for (double v : vals) e += v;
  } else {
    const auto& m = cfg.masses(side);
    for (std::size_t j = 0; j < vals.size(); ++j) e += 0.5 * m[j] * vals[j] * vals[j];
  }
  return e;
}

CompactSet CompactSet::hard_default() { return CompactSet{}; }

CompactSet CompactSet::soft_default(double barrier) {
  CompactSet set;
  set.mode = SlowMode::SoftEnergies;
  set.barrier = barrier;
  set.value_bounds = {0.05 * barrier, 0.95 * barrier};
  return set;
}

double CompactSet::margin() const {
  double m = std::min(x_bounds.lo, 1.0 - x_bounds.hi);
  m = std::min(m, value_bounds.lo);
  if (mode == SlowMode::SoftEnergies) m = std::min(m, barrier - value_bounds.hi);
  return m;
}

bool CompactSet::subset_of(const CompactSet& other) const {
  return mode == other.mode && x_bounds.within(other.x_bounds) && w_max <= other.w_max &&
         value_bounds.within(other.value_bounds);
}

bool membership(const SlowState& h, const CompactSet& set) {
  if (h.mode != set.mode) throw DomainError("slow state and compact set use different modes");
  if (!set.x_bounds.contains(h.X)) return false;
  if (!(std::abs(h.W) <= set.w_max)) return false;
  for (double v : h.left)
    if (!set.value_bounds.contains(v)) return false;
  for (double v : h.right)
    if (!set.value_bounds.contains(v)) return false;
  return true;
}

Pressures pressures(const SlowState& h, const SystemConfig& cfg) {
  if (!(h.X > 0.0 && h.X < 1.0)) throw DomainError("pressure undefined with piston on a wall");
  return {2.0 * side_energy(h, Side::Left, cfg) / h.X,
          2.0 * side_energy(h, Side::Right, cfg) / (1.0 - h.X)};
}

}  // namespace piston
