#pragma once

// Experiment harness: initial-phase ensembles, sup-deviation against the
// averaged solution, convergence and hard/soft comparison studies, slope
// fits, collision-rate audit and mechanical-equilibrium runs.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "piston/averaged.hpp"
#include "piston/core.hpp"
#include "piston/potential.hpp"
#include "piston/softcore.hpp"

namespace piston::harness {

struct EnsembleSpec {
  SlowState h0;
  std::size_t n_phases = 16;
  std::uint64_t seed = 0;
  std::vector<double> epsilon_list{0.1, 0.05, 0.02, 0.01, 0.005};
  std::vector<double> delta_list{0.0};
  double T = 1.0;
  CompactSet set;

  // Throws ConfigError on an invalid list or horizon.
  void validate() const;
};

// Named ready-made setups. The hard one starts at X=0.5, W=0, E1=2, E2=1
// with unit masses; the soft one scales energies below the unit barrier
// (E1=0.6, E2=0.3) and uses a compact set with margin 0.21.
struct Scenario {
  SystemConfig cfg;
  EnsembleSpec spec;
};
Scenario hard_default_scenario();
Scenario soft_default_scenario();
// P1 = P2 and W = 0: X=0.4, E1=0.8, E2=1.2.
Scenario equilibrium_scenario();

struct RunOptions {
  std::size_t jobs = 0;               // 0 = hardware concurrency
  std::size_t samples_per_unit = 512;  // per unit of slow time
  soft::StepControl step{};
  ode::Options ode{};
  double quad_margin = soft::kDefaultMargin;
};

// Runs fn(0..count-1) on a work queue with at most `jobs` threads. The first
// exception (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

// Uniform angles on the torus for phase `index`, inverted through the hard
// or soft angle map at h0 (soft needs h0 in energies and cfg.delta > 0).
FullState sample_phase(const SlowState& h0, const SystemConfig& cfg, const PotentialProfile& kappa,
                       std::uint64_t seed, std::size_t index,
                       double quad_margin = soft::kDefaultMargin);

// Positions uniform on the plateaus [d, w - d] with random direction and
// speed sqrt(2E/m), usable by both hard and soft runs with the same slow data.
FullState plateau_phase(const SlowState& h0_energies, const SystemConfig& cfg, double d,
                        std::uint64_t seed, std::size_t index);

struct Deviation {
  double sup_error = 0.0;
  std::optional<double> T_eps;  // empty = never left the compact set
  std::size_t compared = 0;
};

// Actual samples at micro-times t against the averaged path at tau = eps t,
// over tau <= min(T, T_eps).
Deviation sup_deviation(const std::vector<TrajectorySample>& actual, double epsilon,
                        const avg::AveragedTrajectory& averaged, const CompactSet& set, double T);

// Two actual runs sampled on the same micro-time grid.
Deviation sup_deviation(const std::vector<TrajectorySample>& a,
                        const std::vector<TrajectorySample>& b, double epsilon,
                        const CompactSet& set, double T);

struct ErrorRow {
  double epsilon = 0.0;
  double delta = 0.0;
  std::size_t phase = 0;
  double sup_error = 0.0;
  std::optional<double> first_exit;
  double wall_time = 0.0;
};

struct ErrorTable {
  std::vector<ErrorRow> rows;

  std::vector<double> epsilons() const;  // distinct, in first-seen order
  std::vector<double> deltas() const;
  // Worst sup_error over phases; throws if the cell is empty.
  double worst(double epsilon, double delta) const;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;  // of log(y) = intercept + slope log(x)
  double r2 = 0.0;
  std::vector<double> x, y;  // points used

  bool within(double lo, double hi) const { return slope >= lo && slope <= hi; }
};

// Least squares on log-log data. With restrict_to_small, only the three
// smallest x are used when the x range spans more than 1.5 decades.
SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y,
                          bool restrict_to_small = true);

struct DeltaFit {
  double delta = 0.0;
  std::vector<double> epsilons;
  std::vector<double> worst;
  SlopeFit fit;
};

struct ConvergenceResult {
  ErrorTable table;
  std::vector<DeltaFit> fits;  // one per delta
};

// For each (delta, eps, phase): run to t = T/eps, compare with the averaged
// solution (hard speeds when delta = 0, energies otherwise).
ConvergenceResult convergence_study(const EnsembleSpec& spec, const SystemConfig& base,
                                    const PotentialProfile& kappa, const RunOptions& options = {});

struct TwoFloorFit {
  double A = 0.0;  // err ~ A eps + B delta
  double B = 0.0;
};

struct SweepFit {
  double fixed = 0.0;  // the parameter held fixed
  double floor = 0.0;  // A eps or B delta at the fixed value
  std::vector<double> values;
  std::vector<double> worst;
  SlopeFit fit;  // slope of (worst - floor) over points with worst >= 2 floor
};

struct ComparisonResult {
  ErrorTable table;
  TwoFloorFit floors;
  SweepFit delta_sweep;    // at the smallest epsilon
  SweepFit epsilon_sweep;  // at delta_fixed
};

// Paired hard (delta = 0) and soft runs from identical plateau phases,
// compared in energies. spec.delta_list must be positive.
ComparisonResult hard_soft_comparison(const EnsembleSpec& spec, const SystemConfig& base,
                                      const PotentialProfile& kappa, double delta_fixed,
                                      const RunOptions& options = {});

// Nonnegative least squares fit of err ~ A eps + B delta.
TwoFloorFit fit_two_floor(const std::vector<double>& eps, const std::vector<double>& delta,
                          const std::vector<double>& err);

// Slope of (y - floor) against x on the points with y >= 2 floor.
SlopeFit fit_above_floor(const std::vector<double>& x, const std::vector<double>& y, double floor);

struct RateRow {
  Side side = Side::Left;
  std::size_t index = 0;
  std::uint64_t hits = 0;
  double rate = 0.0;       // hits / duration
  double predicted = 0.0;  // time average of s / (2 w)
  double relative_error = 0.0;
};

// Hard-core piston hits per particle over [0, duration] against s / (2X)
// and s / (2(1 - X)) averaged along the run.
std::vector<RateRow> collision_rate_audit(const SystemConfig& cfg, const FullState& initial,
                                          double duration);

struct EquilibriumRow {
  double epsilon = 0.0;
  double worst_shift = 0.0;  // worst over phases of sup |X - X(0)|, t <= 1/eps
  double C = 0.0;            // worst_shift / epsilon
};

std::vector<EquilibriumRow> equilibrium_study(const EnsembleSpec& spec, const SystemConfig& base,
                                              const RunOptions& options = {});

// Largest (margin/2) 2^-k whose worst force-band half-width over the compact
// set (soft mode) is below 1/4.
double select_delta0(const CompactSet& set, const SystemConfig& cfg, const PotentialProfile& kappa,
                     double quad_margin = soft::kDefaultMargin);

}  // namespace piston::harness
