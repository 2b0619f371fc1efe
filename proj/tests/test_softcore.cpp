#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "piston/errors.hpp"
#include "piston/potential.hpp"
#include "piston/quadrature.hpp"
#include "piston/softcore.hpp"

using namespace piston;
using namespace piston::soft;

namespace {

const PotentialProfile kCubic = PotentialProfile::cubic();

SystemConfig soft_config(double eps, double delta, double m = 1.0) {
  SystemConfig cfg;
  cfg.epsilon = eps;
  cfg.delta = delta;
  cfg.masses_left = {m};
  cfg.masses_right = {m};
  return cfg;
}

}  // namespace

TEST_CASE("quadrature facade") {
  CHECK(quad::adaptive([](double x) { return std::exp(x); }, 0.0, 1.0) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
  CHECK(quad::tanh_sinh([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("skin potential") {
  CHECK(potential_U(Side::Left, 0.3, 0.5, 0.1, kCubic) == 0.0);
  CHECK(potential_U(Side::Left, 0.0, 0.5, 0.1, kCubic) == 1.0);
  CHECK(potential_U(Side::Left, 0.05, 0.5, 0.1, kCubic) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(potential_U(Side::Right, 0.95, 0.5, 0.1, kCubic) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(potential_U(Side::Right, 0.55, 0.5, 0.1, kCubic) == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("turning point lies inside the skin") {
  for (double E : {0.05, 0.3, 0.9}) {
    const double a = turning_point(E, 0.1, kCubic);
    CHECK(a > 0.0);
    CHECK(a < 0.1);
    CHECK(kCubic.kappa_delta(a, 0.1) == doctest::Approx(E).epsilon(1e-12));
  }
}

TEST_CASE("rhs: free flight on the plateaus") {
  const auto cfg = soft_config(0.1, 0.05);
  const auto z = oracle::state(0.5, 0.02, {0.25}, {0.7}, {0.8}, {-0.3});
  const auto d = rhs(z, cfg, kCubic);
  CHECK(d.dV == 0.0);
  CHECK(d.dv_left[0] == 0.0);
  CHECK(d.dv_right[0] == 0.0);
  CHECK(d.dx_left[0] == 0.7);
  CHECK(piston_force(z, 0.05, kCubic) == 0.0);
  CHECK_THROWS(rhs(z, soft_config(0.1, 0.0), kCubic));
}

TEST_CASE("rhs: particle energy changes at rate eps W kd'(X - x)") {
  const double eps = 0.1, delta = 0.05, W = 0.8;
  const auto cfg = soft_config(eps, delta);
  const auto z = oracle::state(0.5, eps * W, {0.47}, {0.6}, {0.8}, {-0.3});
  const auto d = rhs(z, cfg, kCubic);
  auto energy_at = [&](double h) {
    return particle_energy(Side::Left, z.x_left[0] + h * d.dx_left[0],
                           z.v_left[0] + h * d.dv_left[0], 1.0, z.X + h * d.dX, delta, kCubic);
  };
  const double h = 1e-6;
  const double dE = (energy_at(h) - energy_at(-h)) / (2.0 * h);
  CHECK(dE == doctest::Approx(eps * W * kCubic.kappa_delta_prime(0.03, delta)).epsilon(1e-7));
}

TEST_CASE("F, F' and G against Beta-function closed forms") {
  for (double E = 0.06; E < 0.95; E += 0.04) {
    CHECK(F_integral(E, kCubic) == doctest::Approx(oracle::cubic_F(E)).epsilon(1e-12));
    CHECK(F_integral_prime(E, kCubic) == doctest::Approx(oracle::cubic_F_prime(E)).epsilon(1e-9));
    CHECK(action_integral(E, kCubic) == doctest::Approx(oracle::cubic_G(E)).epsilon(1e-12));
  }
  double prev = INFINITY;
  for (double E = 0.06; E < 0.95; E += 0.01) {
    const double F = F_integral(E, kCubic);
    CHECK(std::isfinite(F));
    CHECK(F < prev);
    prev = F;
  }
  CHECK_THROWS_AS(F_integral(0.01, kCubic), DomainError);
  CHECK_THROWS_AS(F_integral(0.99, kCubic), DomainError);
}

TEST_CASE("G' = F / 2") {
  const double E = 0.4, h = 1e-5;
  const double dG = (action_integral(E + h, kCubic) - action_integral(E - h, kCubic)) / (2 * h);
  CHECK(dG == doctest::Approx(0.5 * F_integral(E, kCubic)).epsilon(1e-8));
}

TEST_CASE("period_T") {
  CHECK(period_T(Side::Left, 0.5, 1.0, 2.0, 0.0, kCubic) == 1.0);
  for (double m : {0.5, 1.0, 3.0}) {
    const double E = 0.7, X = 0.35;
    const double s = std::sqrt(2.0 * E / m);
    CHECK(period_T(Side::Left, X, E, m, 0.0, kCubic) == doctest::Approx(2.0 * X / s).epsilon(1e-15));
    CHECK(period_T(Side::Right, X, E, m, 0.0, kCubic) ==
          doctest::Approx(2.0 * (1.0 - X) / s).epsilon(1e-15));
    CHECK(period_T(Side::Left, X, 0.5, m, 0.1, kCubic) ==
          doctest::Approx(oracle::cubic_period(X, 0.5, m, 0.1)).epsilon(1e-12));
  }
  CHECK_THROWS(period_T(Side::Left, 0.5, 0.99, 1.0, 0.1, kCubic));
  CHECK_THROWS(period_T(Side::Left, 0.15, 0.5, 1.0, 0.1, kCubic));
}

TEST_CASE("period_T is first order in delta") {
  std::vector<double> c;
  for (double d : {0.1, 0.05, 0.025})
    c.push_back(std::abs(period_T(Side::Left, 0.5, 0.5, 2.0, d, kCubic) -
                         period_T(Side::Left, 0.5, 0.5, 2.0, 0.0, kCubic)) /
                d);
  for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(c[i - 1]).epsilon(0.2));
}

TEST_CASE("period partials") {
  const auto p0 = period_partials(Side::Left, 0.5, 0.8, 2.0, 0.0, kCubic);
  CHECK(p0.dT_dX == doctest::Approx(2.0 / std::sqrt(0.8)).epsilon(1e-15));
  const auto p1 = period_partials(Side::Left, 0.3, 0.8, 2.0, 0.0, kCubic);
  CHECK(p1.dT_dX == p0.dT_dX);
  const auto pr = period_partials(Side::Right, 0.5, 0.8, 2.0, 0.0, kCubic);
  CHECK(pr.dT_dX == doctest::Approx(-2.0 / std::sqrt(0.8)).epsilon(1e-15));

  const double h = 1e-5;
  for (double delta : {0.0, 0.05, 0.1})
    for (double E : {0.2, 0.5, 0.8}) {
      const auto p = period_partials(Side::Left, 0.45, E, 1.0, delta, kCubic);
      const double fdE = (period_T(Side::Left, 0.45, E + h, 1.0, delta, kCubic) -
                          period_T(Side::Left, 0.45, E - h, 1.0, delta, kCubic)) /
                         (2 * h);
      const double fdX = (period_T(Side::Left, 0.45 + h, E, 1.0, delta, kCubic) -
                          period_T(Side::Left, 0.45 - h, E, 1.0, delta, kCubic)) /
                         (2 * h);
      CHECK(std::abs(p.dT_dE - fdE) <= 1e-6);
      CHECK(std::abs(p.dT_dX - fdX) <= 1e-6);
      if (delta <= 0.05) CHECK(p.dT_dE < 0.0);
    }
}

TEST_CASE("periods are not locked to each other") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double X = 0.3 + 0.4 * u(rng), E1 = 0.2 + 0.6 * u(rng), E2 = 0.2 + 0.6 * u(rng);
    const double r1 = period_T(Side::Left, X, E1, 1.0, 0.02, kCubic) /
                      period_T(Side::Right, X, E2, 1.0, 0.02, kCubic);
    const double r2 = period_T(Side::Left, X, E1 * 1.01, 1.0, 0.02, kCubic) /
                      period_T(Side::Right, X, E2, 1.0, 0.02, kCubic);
    CHECK(r2 < r1);
  }
}

TEST_CASE("soft angle landmarks") {
  const double X = 0.5, E = 0.4, m = 1.0, d = 0.1;
  const double a = turning_point(E, d, kCubic);
  CHECK(soft_angle(Side::Left, a, 0.0, m, X, d, kCubic) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(soft_angle(Side::Left, X - a, 0.0, m, X, d, kCubic) == doctest::Approx(0.5).epsilon(1e-12));
  // elapsed time from the wall turning point: one skin passage, then free flight
  const double x = 0.3, v = std::sqrt(2.0 * E / m);
  const double elapsed = std::sqrt(m / 2.0) * d * oracle::cubic_F(E) + (x - d) / v;
  CHECK(soft_angle(Side::Left, x, v, m, X, d, kCubic) ==
        doctest::Approx(elapsed / oracle::cubic_period(X, E, m, d)).epsilon(1e-12));
}

TEST_CASE("soft_phase_point inverts soft_angle") {
  for (Side side : {Side::Left, Side::Right})
    for (double phi = 0.01; phi < 1.0; phi += 0.049) {
      const auto [x, v] = soft_phase_point(side, phi, 0.45, 0.6, 1.3, 0.08, kCubic);
      CHECK(particle_energy(side, x, v, 1.3, 0.45, 0.08, kCubic) == doctest::Approx(0.6).epsilon(1e-12));
      // near the turning points phi ~ sqrt(distance), which costs half the digits
      const double tol = std::abs(phi - 0.5) < 0.02 ? 1e-7 : 1e-10;
      CHECK(std::abs(soft_angle(side, x, v, 1.3, 0.45, 0.08, kCubic) - phi) < tol);
    }
}

TEST_CASE("force band") {
  const double X = 0.5, E = 0.5, m = 1.0;
  std::vector<double> ratio;
  for (double d : {0.1, 0.05, 0.025}) {
    const double w = delta_band_width(Side::Left, X, E, m, d, kCubic);
    ratio.push_back(w / d);
    // sampled orbit: the piston force is nonzero only inside the window
    bool inside = true, attained = false;
    for (int k = 0; k < 20000; ++k) {
      const double phi = (k + 0.5) / 20000.0;
      const auto [x, v] = soft_phase_point(Side::Left, phi, X, E, m, d, kCubic);
      if (kCubic.kappa_delta_prime(X - x, d) != 0.0) {
        inside = inside && std::abs(phi - 0.5) <= w + 1e-9;
        attained = attained || std::abs(phi - 0.5) > 0.95 * w;
      }
    }
    CHECK(inside);
    CHECK(attained);
  }
  for (std::size_t i = 1; i < ratio.size(); ++i)
    CHECK(ratio[i] == doctest::Approx(ratio[i - 1]).epsilon(0.05));
}

TEST_CASE("frozen-piston orbit period matches period_T") {
  const double X = 0.5, E = 0.45, m = 1.0, d = 0.05;
  const auto cfg = soft_config(0.0, d, m);
  const double T = period_T(Side::Left, X, E, m, d, kCubic);
  const double x0 = 0.25, v0 = std::sqrt(2.0 * E / m);
  const auto z = oracle::state(X, 0.0, {x0}, {v0}, {0.75}, {-v0});
  StepControl step;
  step.scheme = Scheme::Yoshida4;
  step.dt = d / (200.0 * v0);
  // march in chunks and interpolate the upward crossing of x0, which lies on
  // the plateau where x is linear in t
  const double chunk = T / 4000.0;
  double t_cross = NAN, worst_drift = 0.0;
  auto state = z;
  for (double t = 0.0; t < 1.2 * T && std::isnan(t_cross); t += chunk) {
    const auto res = integrate(state, state.t + chunk, cfg, kCubic, step);
    worst_drift = std::max(worst_drift, res.max_relative_drift);
    const double xa = state.x_left[0], xb = res.state.x_left[0];
    if (state.t > 0.5 * T && xa < x0 && xb >= x0) t_cross = state.t + (x0 - xa) / (xb - xa) * chunk;
    state = res.state;
  }
  CHECK(t_cross == doctest::Approx(T).epsilon(1e-6));
  CHECK(worst_drift < 1e-10);
}

TEST_CASE("integrator is reversible") {
  const auto cfg = soft_config(0.1, 0.05);
  const auto z = oracle::state(0.5, 0.03, {0.48}, {0.9}, {0.53}, {-0.7});
  StepControl c;
  c.dt = 1e-4;
  auto fwd = integrate(z, 3.0, cfg, kCubic, c).state;
  fwd.V = -fwd.V;
  fwd.v_left[0] = -fwd.v_left[0];
  fwd.v_right[0] = -fwd.v_right[0];
  const auto back = integrate(fwd, 6.0, cfg, kCubic, c).state;
  CHECK(std::abs(back.X - z.X) < 1e-8);
  CHECK(std::abs(back.V + z.V) < 1e-8);
  CHECK(std::abs(back.x_left[0] - z.x_left[0]) < 1e-8);
  CHECK(std::abs(back.v_left[0] + z.v_left[0]) < 1e-8);
  CHECK(std::abs(back.x_right[0] - z.x_right[0]) < 1e-8);
}

TEST_CASE("energy bookkeeping on frozen-piston orbits") {
  const auto cfg = soft_config(0.0, 0.1);
  const auto z = oracle::state(0.5, 0.0, {0.03}, {0.2}, {0.9}, {0.5});
  StepControl c;
  c.sample_dt = 0.01;
  c.steps_per_skin = 20000;
  const double e1 = particle_energy(Side::Left, 0.03, 0.2, 1.0, 0.5, 0.1, kCubic);
  const auto res = integrate(z, 5.0, cfg, kCubic, c);
  for (const auto& s : res.samples) CHECK(s.h.left[0] == doctest::Approx(e1).epsilon(1e-7));
}

TEST_CASE("default step keeps the drift small") {
  const auto cfg = soft_config(0.05, 0.05);
  const auto z = oracle::state(0.5, 0.0, {0.2}, {1.0954451150103321}, {0.8}, {-0.7745966692414834});
  StepControl c;
  c.sample_dt = 1.0;
  const auto res = integrate(z, 20.0, cfg, kCubic, c);
  CHECK(res.max_relative_drift < 1e-8);
  CHECK(res.samples.size() == 21);
  CHECK(res.samples.back().t == 20.0);
}

TEST_CASE("integrator errors") {
  const auto cfg = soft_config(0.1, 0.05);
  // kinetic energy above the barrier: the particle crosses the piston
  const auto z = oracle::state(0.5, 0.0, {0.45}, {2.0}, {0.8}, {0.1});
  CHECK_THROWS_AS(integrate(z, 1.0, cfg, kCubic), SimulationError);
  StepControl coarse;
  coarse.dt = 0.02;
  coarse.drift_tolerance = 1e-9;
  const auto y = oracle::state(0.5, 0.0, {0.2}, {1.0}, {0.8}, {-1.0});
  CHECK_THROWS_AS(integrate(y, 5.0, cfg, kCubic, coarse), SimulationError);
  CHECK_THROWS_AS(integrate(y, 1.0, soft_config(0.1, 0.0), kCubic), DomainError);
}
