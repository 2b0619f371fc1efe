// Acceptance run: one PASS/FAIL line per criterion; exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "piston/averaged.hpp"
#include "piston/config.hpp"
#include "piston/hardcore.hpp"
#include "piston/harness.hpp"
#include "piston/softcore.hpp"

using namespace piston;

namespace {

// Tolerances.
constexpr double kSlopeLo = 0.7, kSlopeHi = 1.3;
constexpr double kUniformity = 3.0;
constexpr double kFirstIntegralTol = 1e-7;
constexpr double kPeriodicityTol = 1e-6;
constexpr double kPeriodStability = 0.2;
constexpr double kForceTol = 1e-6;
constexpr double kEquilibriumGrowth = 0.3;  // C(eps/2) / C(eps) within 2^(+-0.3)
constexpr double kHardDrift = 1e-12;
constexpr double kSoftDrift = 1e-8;
constexpr double kDeterminantTol = 1e-14;
constexpr double kCommutatorRatio = 4.0, kCommutatorSlack = 0.1;
constexpr double kNPistonTol = 1e-8;

const PotentialProfile kCubic = PotentialProfile::cubic();

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s criterion %d (%s):%s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
              o.detail.str().c_str(), secs);
  std::fflush(stdout);
}

RunConfig config(const std::string& name) {
  return load_config(std::string(PISTON_CONFIG_DIR) + "/" + name);
}

harness::EnsembleSpec ensemble(const RunConfig& rc) {
  harness::EnsembleSpec spec;
  spec.h0 = with_mode(*rc.initial, rc.compact_set.mode, rc.system);
  spec.n_phases = rc.study.n_phases;
  spec.seed = rc.system.seed;
  spec.epsilon_list = rc.study.epsilon_list;
  spec.delta_list = rc.study.delta_list;
  spec.T = rc.system.horizon_T;
  spec.set = rc.compact_set;
  return spec;
}

harness::RunOptions options(const RunConfig& rc) {
  harness::RunOptions o;
  o.samples_per_unit = rc.study.samples_per_unit;
  o.step.steps_per_skin = rc.study.steps_per_skin;
  o.ode.rtol = rc.study.rtol;
  return o;
}

bool monotone(std::vector<double> eps, const std::vector<double>& worst) {
  std::vector<std::size_t> idx(eps.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return eps[a] < eps[b]; });
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (worst[idx[i - 1]] > worst[idx[i]]) return false;
  return true;
}

double rel_spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return (*hi - *lo) / std::abs(v.front());
}

SlowState speeds(double X, double W, double s1, double s2) {
  SlowState h;
  h.X = X;
  h.W = W;
  h.left = {s1};
  h.right = {s2};
  return h;
}

void hard_convergence(Outcome& o) {
  const auto rc = config("default.json");
  const auto res = harness::convergence_study(ensemble(rc), rc.system, kCubic, options(rc));
  const auto& f = res.fits.front();
  const bool mono = monotone(f.epsilons, f.worst);
  o.detail << " slope " << f.fit.slope << ", monotone " << (mono ? "yes" : "no");
  o.require(f.fit.within(kSlopeLo, kSlopeHi), "slope in [0.7, 1.3]");
  o.require(mono, "errors nonincreasing as epsilon decreases");
}

void soft_convergence(Outcome& o) {
  const auto rc = config("soft.json");
  const auto spec = ensemble(rc);
  const double d0 = harness::select_delta0(spec.set, rc.system, kCubic);
  o.detail << " delta0 " << d0 << ";";
  for (double d : spec.delta_list) o.require(d <= d0, "delta <= delta0");
  const auto res = harness::convergence_study(spec, rc.system, kCubic, options(rc));
  for (const auto& f : res.fits) {
    o.detail << " slope(" << f.delta << ") " << f.fit.slope;
    o.require(f.fit.within(kSlopeLo, kSlopeHi), "slope in [0.7, 1.3] at delta " + std::to_string(f.delta));
  }
  const double ref_delta = *std::min_element(spec.delta_list.begin(), spec.delta_list.end());
  double worst_ratio = 0.0;
  for (double e : res.table.epsilons()) {
    double worst = 0.0;
    for (double d : spec.delta_list) worst = std::max(worst, res.table.worst(e, d));
    worst_ratio = std::max(worst_ratio, worst / res.table.worst(e, ref_delta));
  }
  o.detail << "; max over delta / delta=" << ref_delta << " error " << worst_ratio;
  o.require(worst_ratio <= kUniformity, "uniformity ratio <= 3");
}

void comparison(Outcome& o) {
  const auto rc = config("compare.json");
  const auto res = harness::hard_soft_comparison(ensemble(rc), rc.system, kCubic,
                                                 rc.study.delta_fixed, options(rc));
  o.detail << " A " << res.floors.A << ", B " << res.floors.B << ", delta-sweep slope "
           << res.delta_sweep.fit.slope << " (" << res.delta_sweep.fit.x.size()
           << " pts), epsilon-sweep slope " << res.epsilon_sweep.fit.slope << " ("
           << res.epsilon_sweep.fit.x.size() << " pts)";
  o.require(res.delta_sweep.fit.x.size() >= 3, "delta sweep has 3 points above the floor");
  o.require(res.epsilon_sweep.fit.x.size() >= 3, "epsilon sweep has 3 points above the floor");
  o.require(res.delta_sweep.fit.within(kSlopeLo, kSlopeHi), "delta-sweep slope");
  o.require(res.epsilon_sweep.fit.within(kSlopeLo, kSlopeHi), "epsilon-sweep slope");
}

void first_integrals(Outcome& o) {
  // hard-core flow: H_eff, s X, s (1 - X) and the phase integrals
  {
    SystemConfig cfg;
    const auto h0 = speeds(0.5, 0.0, 2.0, std::sqrt(2.0));
    const auto period = avg::find_period(h0, cfg, kCubic);
    o.require(period.has_value(), "hard averaged orbit has a period");
    if (!period) return;
    const auto traj = avg::solve_averaged(h0, 5.0 * *period, cfg, kCubic);
    std::vector<double> H, p1, p2, I1, I2;
    for (const auto& s : traj.states) {
      H.push_back(avg::effective_hamiltonian(s, h0, cfg));
      p1.push_back(s.left[0] * s.X);
      p2.push_back(s.right[0] * (1.0 - s.X));
      I1.push_back(avg::adiabatic_invariant(Side::Left, s.X, 0.5 * s.left[0] * s.left[0], 1.0, 0.0, kCubic));
      I2.push_back(avg::adiabatic_invariant(Side::Right, s.X, 0.5 * s.right[0] * s.right[0], 1.0, 0.0, kCubic));
    }
    const double worst = std::max({rel_spread(H), rel_spread(p1), rel_spread(p2), rel_spread(I1), rel_spread(I2)});
    o.detail << " hard: H_eff " << rel_spread(H) << ", sX " << std::max(rel_spread(p1), rel_spread(p2))
             << ", I " << std::max(rel_spread(I1), rel_spread(I2)) << ";";
    o.require(worst < kFirstIntegralTol, "hard first integrals");
  }
  // soft-core flow at delta = 0.05: the phase integrals
  {
    SystemConfig cfg;
    cfg.delta = 0.05;
    SlowState h0 = speeds(0.5, 0.0, 0.6, 0.3);
    h0.mode = SlowMode::SoftEnergies;
    const auto period = avg::find_period(h0, cfg, kCubic);
    o.require(period.has_value(), "soft averaged orbit has a period");
    if (!period) return;
    const auto traj = avg::solve_averaged(h0, 5.0 * *period, cfg, kCubic);
    std::vector<double> I1, I2;
    for (const auto& s : traj.states) {
      I1.push_back(avg::adiabatic_invariant(Side::Left, s.X, s.left[0], 1.0, cfg.delta, kCubic));
      I2.push_back(avg::adiabatic_invariant(Side::Right, s.X, s.right[0], 1.0, cfg.delta, kCubic));
    }
    const double worst = std::max(rel_spread(I1), rel_spread(I2));
    o.detail << " soft (delta 0.05): I " << worst;
    o.require(worst < kFirstIntegralTol, "soft phase integrals");
  }
}

void periodicity(Outcome& o) {
  SystemConfig cfg;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> ux(0.3, 0.7), uw(-1.0, 1.0), us(0.5, 2.0);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double X = ux(rng), W = uw(rng), s1 = us(rng), s2 = us(rng);
    const auto h0 = speeds(X, W, s1, s2);
    const auto period = avg::find_period(h0, cfg, kCubic);
    o.require(period.has_value(), "period found");
    if (!period) continue;
    const auto traj = avg::solve_averaged(h0, *period, cfg, kCubic);
    worst = std::max(worst, max_norm_distance(traj.at(*period), h0));
  }
  o.detail << " worst return distance " << worst << " over 10 initial states";
  o.require(worst < kPeriodicityTol, "return within 1e-6");
}

void period_formula(Outcome& o) {
  for (const auto& [X, E, m] : std::vector<std::array<double, 3>>{{0.5, 0.5, 1.0}, {0.4, 0.3, 2.0}}) {
    const double T0 = soft::period_T(Side::Left, X, E, m, 0.0, kCubic);
    std::vector<double> r;
    for (double d : {0.1, 0.05, 0.025})
      r.push_back(std::abs(soft::period_T(Side::Left, X, E, m, d, kCubic) - T0) / d);
    double spread = 0.0;
    for (std::size_t i = 1; i < r.size(); ++i) spread = std::max(spread, std::abs(r[i] / r[i - 1] - 1.0));
    o.detail << " |T(d) - T(0)| / d at (X " << X << ", E " << E << ", m " << m << ") varies by " << spread << ";";
    o.require(spread <= kPeriodStability, "stability under delta-halving");
  }
  const double t = soft::period_T(Side::Left, 0.5, 1.0, 2.0, 0.0, kCubic);
  o.detail << " T(0) at m=2, E=1, X=0.5 is " << t;
  o.require(t == 1.0, "period_T(0) == 1 exactly");
}

void averaged_force(Outcome& o) {
  const double X = 0.45;
  double worst = 0.0;
  for (const auto& [E, d] : std::vector<std::pair<double, double>>{
           {0.3, 0.1}, {0.5, 0.05}, {0.7, 0.025}, {0.4, 0.075}, {0.6, 0.04}}) {
    SystemConfig cfg;
    cfg.delta = d;
    SlowState h = speeds(X, 1.0, E, 0.4);
    h.mode = SlowMode::SoftEnergies;
    // dE1/dtau = -W sqrt(8 m E) / T, so W = 1 exposes the averaged force
    const double field = -avg::avg_field_soft(h, cfg, kCubic).left[0];
    const double closed = std::sqrt(8.0 * E) / soft::period_T(Side::Left, X, E, 1.0, d, kCubic);
    const auto orbit = oracle::cubic_orbit_average(X, E, 1.0, d);
    worst = std::max({worst, std::abs(orbit.force - closed) / closed, std::abs(field - closed) / closed});
  }
  o.detail << " worst relative difference " << worst << " over 5 (E, delta) points";
  o.require(worst < kForceTol, "orbit average equals sqrt(8 m E) / T");
}

void equilibrium(Outcome& o) {
  const auto rc = config("eq.json");
  const auto rows = harness::equilibrium_study(ensemble(rc), rc.system);
  for (const auto& r : rows) o.detail << " C(" << r.epsilon << ") " << r.C;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double growth = std::log2(rows[i].C / rows[i - 1].C) / std::log2(rows[i - 1].epsilon / rows[i].epsilon);
    o.require(std::abs(growth) <= kEquilibriumGrowth, "C stable under epsilon-halving");
  }
}

void conservation(Outcome& o) {
  // hard core: 10 + 10 particles until at least 1e6 events
  {
    SystemConfig cfg;
    cfg.epsilon = 0.01;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    cfg.masses_left.clear();
    cfg.masses_right.clear();
    FullState z;
    z.X = 0.5;
    for (int j = 0; j < 10; ++j) {
      cfg.masses_left.push_back(0.5 + u(rng));
      cfg.masses_right.push_back(0.5 + u(rng));
      z.x_left.push_back(0.5 * u(rng));
      z.v_left.push_back((u(rng) < 0.5 ? -1 : 1) * (0.5 + 1.5 * u(rng)));
      z.x_right.push_back(0.5 + 0.5 * u(rng));
      z.v_right.push_back((u(rng) < 0.5 ? -1 : 1) * (0.5 + 1.5 * u(rng)));
    }
    const double e0 = hard::total_energy(z, cfg);
    double worst = 0.0;
    hard::EvolveOptions eo;
    eo.sample_dt = 10.0;
    const auto res = hard::evolve(z, 3.0e4, cfg, eo, [&](const FullState& s) {
      worst = std::max(worst, std::abs(hard::total_energy(s, cfg) - e0) / e0);
    });
    worst = std::max(worst, std::abs(hard::total_energy(res.state, cfg) - e0) / e0);
    o.detail << " hard: " << res.event_count << " events, drift " << worst << ";";
    o.require(res.event_count >= 1'000'000, "at least 1e6 events");
    o.require(worst <= kHardDrift, "hard energy drift <= 1e-12");
  }
  // soft core at the default step over t = 1/eps
  {
    auto sc = harness::soft_default_scenario();
    double worst = 0.0;
    for (double eps : {0.05, 0.01})
      for (double d : {0.1, 0.05, 0.025}) {
        SystemConfig cfg = sc.cfg;
        cfg.epsilon = eps;
        cfg.delta = d;
        const auto z = harness::sample_phase(sc.spec.h0, cfg, kCubic, 5, 0);
        const auto res = soft::integrate(z, 1.0 / eps, cfg, kCubic);
        worst = std::max(worst, res.max_relative_drift);
      }
    o.detail << " soft: drift " << worst << " over eps {0.05, 0.01} x delta {0.1, 0.05, 0.025}";
    o.require(worst <= kSoftDrift, "soft Hamiltonian drift <= 1e-8");
  }
}

void properties(Outcome& o) {
  double det = 0.0;
  for (double m : {0.5, 1.0, 3.0})
    for (double eps : {0.3, 0.1, 0.01, 0.001}) {
      const auto A = hard::collision_matrix(m, eps);
      det = std::max(det, std::abs(A[0][0] * A[1][1] - A[0][1] * A[1][0] - 1.0));
    }
  o.detail << " |det - 1| " << det << ";";
  o.require(det <= kDeterminantTol, "collision determinant");

  // simultaneous left and right hits applied in both orders
  std::vector<double> gaps;
  for (double eps : {0.04, 0.02, 0.01}) {
    SystemConfig cfg;
    cfg.epsilon = eps;
    const auto z = oracle::state(0.5, eps * 0.3, {0.5}, {1.2}, {0.5}, {-0.8});
    const auto lr = hard::apply_piston_collision(hard::apply_piston_collision(z, Side::Left, 0, cfg), Side::Right, 0, cfg);
    const auto rl = hard::apply_piston_collision(hard::apply_piston_collision(z, Side::Right, 0, cfg), Side::Left, 0, cfg);
    gaps.push_back(max_norm_distance(slow_state_of(lr, cfg), slow_state_of(rl, cfg)));
  }
  o.detail << " commutator ratios";
  for (std::size_t i = 1; i < gaps.size(); ++i) {
    const double r = gaps[i - 1] / gaps[i];
    o.detail << " " << r;
    o.require(std::abs(r / kCommutatorRatio - 1.0) <= kCommutatorSlack, "commutator is second order");
  }
  o.detail << ";";

  // the piston force vanishes outside the phase band around 1/2
  bool inside = true, attained = true;
  for (const auto& [X, E] : std::vector<std::pair<double, double>>{{0.5, 0.5}, {0.3, 0.25}, {0.7, 0.75}})
    for (double d : {0.1, 0.05, 0.025}) {
      const double w = soft::delta_band_width(Side::Left, X, E, 1.0, d, kCubic);
      bool reached = false;
      for (int k = 0; k < 4000; ++k) {
        const double phi = (k + 0.5) / 4000.0;
        const auto [x, v] = soft::soft_phase_point(Side::Left, phi, X, E, 1.0, d, kCubic);
        if (kCubic.kappa_delta_prime(X - x, d) != 0.0) {
          inside = inside && std::abs(phi - 0.5) <= w + 1e-9;
          reached = reached || std::abs(phi - 0.5) > 0.95 * w;
        }
      }
      attained = attained && reached;
    }
  o.detail << " force band " << (inside && attained ? "holds" : "violated") << ";";
  o.require(inside && attained, "force band");

  const auto rc = config("npiston.json");
  const auto& np = *rc.npiston;
  const auto traj = avg::solve_npiston(np.state, np.T);
  std::vector<double> H;
  for (const auto& s : traj.states) H.push_back(avg::npiston_hamiltonian(s, np.state));
  o.detail << " N=3 effective Hamiltonian spread " << rel_spread(H);
  o.require(rel_spread(H) < kNPistonTol, "N-piston Hamiltonian");
}

}  // namespace

int main() {
  criterion(1, "hard-core O(eps) convergence", hard_convergence);
  criterion(2, "soft-core uniform convergence", soft_convergence);
  criterion(3, "hard/soft comparison", comparison);
  criterion(4, "averaged first integrals", first_integrals);
  criterion(5, "averaged periodicity", periodicity);
  criterion(6, "soft period formula", period_formula);
  criterion(7, "averaged-force identity", averaged_force);
  criterion(8, "mechanical equilibrium", equilibrium);
  criterion(9, "exact conservation", conservation);
  criterion(10, "property suites", properties);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
