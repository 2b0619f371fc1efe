#pragma once

// Soft-core piston: gas particles interact with walls and piston through
// kappa_delta. Periods, action integrals and angle variables of the frozen
// (epsilon = 0) motion, and a symplectic integrator for the full system.

#include <cstdint>
#include <utility>
#include <vector>

#include "piston/core.hpp"
#include "piston/potential.hpp"

namespace piston::soft {

// Default energy margin: band (margin, barrier - margin) for a unit barrier.
inline constexpr double kDefaultMargin = 0.05;

// Integrator steps across one potential skin at the fastest plateau speed.
inline constexpr int kDefaultStepsPerSkin = 1000;

// U1 = kd(x) + kd(X - x) on the left, U2 = kd(x - X) + kd(1 - x) on the right.
double potential_U(Side side, double x, double X, double delta, const PotentialProfile& kappa);

// E = m v^2 / 2 + U.
double particle_energy(Side side, double x, double v, double m, double X, double delta,
                       const PotentialProfile& kappa);

// W^2 / 2 + sum of particle energies.
double total_energy(const FullState& state, const SystemConfig& cfg,
                    const PotentialProfile& kappa);

// Force on the piston: sum -kd'(X - x_left) + sum kd'(x_right - X).
double piston_force(const FullState& state, double delta, const PotentialProfile& kappa);

struct Derivative {
  double dX = 0.0;
  double dV = 0.0;
  std::vector<double> dx_left, dv_left, dx_right, dv_right;
};

// Hamiltonian vector field in (X, V, x, v) coordinates. Requires delta > 0.
Derivative rhs(const FullState& state, const SystemConfig& cfg, const PotentialProfile& kappa);

enum class Scheme { PositionVerlet, Yoshida4 };

struct StepControl {
  double dt = 0.0;           // 0 selects default_step()
  int steps_per_skin = kDefaultStepsPerSkin;  // used by default_step()
  double sample_dt = 0.0;    // grid spacing for samples; 0 disables
  double drift_tolerance = 1e-6;
  Scheme scheme = Scheme::PositionVerlet;
};

// delta / (steps_per_skin * v_max), v_max the largest plateau speed.
double default_step(const FullState& state, const SystemConfig& cfg,
                    const PotentialProfile& kappa, int steps_per_skin = kDefaultStepsPerSkin);

struct IntegrateResult {
  FullState state;
  std::vector<TrajectorySample> samples;
  double max_relative_drift = 0.0;  // relative energy change between quiet states (all on plateaus)
  double max_energy_error = 0.0;    // |H - H0| / |H0| over all checks, skins included
  std::uint64_t steps = 0;
};

// Fixed-step symplectic integration to until_t. Samples (if requested) land
// exactly on t0 + k * sample_dt and on until_t. Throws SimulationError on a
// barrier breach or when the relative energy drift exceeds the tolerance.
// The energy is checked every 64 steps and at every sample.
IntegrateResult integrate(FullState state, double until_t, const SystemConfig& cfg,
                          const PotentialProfile& kappa, const StepControl& control = {});

// F(E) = int_{kinv(E)}^1 ds / sqrt(E - kappa(s)), evaluated in the form
// int_0^E -kinv'(u) / sqrt(E - u) du split at margin / 2.
double F_integral(double E, const PotentialProfile& kappa, double margin = kDefaultMargin);
double F_integral_prime(double E, const PotentialProfile& kappa,
                        double margin = kDefaultMargin);

// G(E) = int_{kinv(E)}^1 sqrt(E - kappa(s)) ds; G' = F / 2.
double action_integral(double E, const PotentialProfile& kappa, double margin = kDefaultMargin);

// Turning-point depth a = delta * kinv(E).
double turning_point(double E, double delta, const PotentialProfile& kappa);

// Period of the frozen-piston motion of one gas particle:
// sqrt(m/2) * [(2w - 4 delta) / sqrt(E) + 4 delta F(E)], w the chamber width.
double period_T(Side side, double X, double E, double m, double delta,
                const PotentialProfile& kappa, double margin = kDefaultMargin);

struct PeriodPartials {
  double dT_dX = 0.0;
  double dT_dE = 0.0;
};

PeriodPartials period_partials(Side side, double X, double E, double m, double delta,
                               const PotentialProfile& kappa, double margin = kDefaultMargin);

// Half-width of the phase window around 1/2 outside which the piston force
// vanishes: sqrt(m/2) * delta * F(E) / T.
double delta_band_width(Side side, double X, double E, double m, double delta,
                        const PotentialProfile& kappa, double margin = kDefaultMargin);

// Angle of one particle: elapsed frozen-piston time since the wall turning
// point divided by the period.
double soft_angle(Side side, double x, double v, double m, double X, double delta,
                  const PotentialProfile& kappa, double margin = kDefaultMargin);

AngleState soft_angle_variables(const FullState& state, const SystemConfig& cfg,
                                const PotentialProfile& kappa, double margin = kDefaultMargin);

// Inverse of soft_angle on the energy level E: the (x, v) with angle phi.
std::pair<double, double> soft_phase_point(Side side, double phi, double X, double E, double m,
                                           double delta, const PotentialProfile& kappa,
                                           double margin = kDefaultMargin);

}  // namespace piston::soft
