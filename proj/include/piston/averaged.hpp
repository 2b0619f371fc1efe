#pragma once

// Averaged (first-order) slow dynamics: the hard and soft averaged fields,
// their solutions with first-exit bookkeeping, first integrals, adiabatic
// invariants and the N-piston generalization.

#include <cstddef>
#include <optional>
#include <vector>

#include "piston/core.hpp"
#include "piston/ode.hpp"
#include "piston/potential.hpp"
#include "piston/softcore.hpp"

namespace piston::avg {

// dX = W, dW = sum m s^2 / X - sum m s^2 / (1 - X), ds1 = -s1 W / X,
// ds2 = s2 W / (1 - X). Result uses the SlowState layout.
SlowState avg_field_hard(const SlowState& h, const SystemConfig& cfg);

// dW = sum sqrt(8 m E1) / T1 - sum sqrt(8 m E2) / T2,
// dE1 = -W sqrt(8 m E1) / T1, dE2 = W sqrt(8 m E2) / T2, with cfg.delta.
SlowState avg_field_soft(const SlowState& h, const SystemConfig& cfg,
                         const PotentialProfile& kappa, double margin = soft::kDefaultMargin);

// Hard field for HardSpeeds input, soft field for SoftEnergies input.
SlowState avg_field(const SlowState& h, const SystemConfig& cfg, const PotentialProfile& kappa,
                    double margin = soft::kDefaultMargin);

struct SolveOptions {
  ode::Options ode{};
  std::size_t samples_per_unit = 512;  // output grid density in slow time
  std::optional<CompactSet> compact_set;
  double margin = soft::kDefaultMargin;
};

struct AveragedTrajectory {
  std::vector<double> grid;
  std::vector<SlowState> states;
  std::optional<double> first_exit;  // first slow time outside the compact set
  ode::DenseSolution dense;
  SlowMode mode = SlowMode::HardSpeeds;
  std::size_t n1 = 0;

  SlowState at(double tau) const;
  double horizon() const { return dense.t_end(); }
};

// Solves on [0, T]. Throws SimulationError on step-size underflow.
AveragedTrajectory solve_averaged(const SlowState& h0, double T, const SystemConfig& cfg,
                                  const PotentialProfile& kappa, const SolveOptions& options = {});

// Period of the averaged piston oscillation from three consecutive zeros of
// W (two half-periods). Empty if W never changes sign within max_horizon.
std::optional<double> find_period(const SlowState& h0, const SystemConfig& cfg,
                                  const PotentialProfile& kappa, const SolveOptions& options = {},
                                  double max_horizon = 1e4);

// W^2/2 + E1(0) X(0)^2 / X^2 + E2(0) (1 - X(0))^2 / (1 - X)^2.
double effective_hamiltonian(const SlowState& h, const SlowState& h0, const SystemConfig& cfg);

// W^2/2 + E1 + E2; conserved by both averaged fields.
double averaged_energy(const SlowState& h, const SystemConfig& cfg);

// Phase-plane area {m v^2 / 2 + U <= E}:
// 2 sqrt(2/m) [(w - 2 delta) sqrt(E) + 2 delta G(E)], w the chamber width.
double adiabatic_invariant(Side side, double X, double E, double m, double delta,
                           const PotentialProfile& kappa, double margin = soft::kDefaultMargin);

// N chambers separated by N - 1 pistons at X[0] < ... < X[N-2].
struct NPistonState {
  std::vector<double> X;
  std::vector<double> W;
  std::vector<double> Mhat;                  // scaled piston masses
  std::vector<std::vector<double>> s;        // gas speeds per chamber
  std::vector<std::vector<double>> masses;   // gas masses per chamber

  std::size_t chambers() const { return s.size(); }
  double width(std::size_t chamber) const;
  double chamber_energy(std::size_t chamber) const;
  void validate() const;

  std::vector<double> to_vector() const;
  NPistonState with_values(const std::vector<double>& flat) const;
};

// Mhat_i dW_i = sum m s^2 / w_i - sum m s^2 / w_{i+1}; ds = -s (W_i - W_{i-1}) / w_i,
// W_0 = W_N = 0. Derivatives returned in the state layout.
NPistonState avg_field_npiston(const NPistonState& state);

// sum Mhat W^2 / 2 + sum_c E_c(0) (w_c(0) / w_c)^2.
double npiston_hamiltonian(const NPistonState& state, const NPistonState& initial);

struct NPistonTrajectory {
  std::vector<double> grid;
  std::vector<NPistonState> states;
};

NPistonTrajectory solve_npiston(const NPistonState& initial, double T,
                                const ode::Options& options = {},
                                std::size_t samples_per_unit = 512);

}  // namespace piston::avg
