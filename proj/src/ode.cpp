#include "piston/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "piston/errors.hpp"

namespace piston::ode {

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

double scaled_norm(const Vector& v, const Vector& ya, const Vector& yb, const Options& o) {
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double sc = o.atol + o.rtol * std::max(std::abs(ya[i]), std::abs(yb[i]));
    sum += (v[i] / sc) * (v[i] / sc);
  }
  return std::sqrt(sum / static_cast<double>(std::max<std::size_t>(1, v.size())));
}

}  // namespace

Vector Segment::eval(double t) const {
  const double theta = (t - t0) / h;
  const double theta1 = 1.0 - theta;
  Vector y(rcont[0].size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = rcont[0][i] +
           theta * (rcont[1][i] +
                    theta1 * (rcont[2][i] + theta * (rcont[3][i] + theta1 * rcont[4][i])));
  return y;
}

Vector DenseSolution::operator()(double t) const {
  if (segments_.empty()) {
    if (t == t_end_) return y_end_;
    throw DomainError("dense solution has no steps");
  }
  const double span = t_end_ - t_begin();
  const double slack = 1e-12 * std::max(1.0, std::abs(span));
  if (t < t_begin() - slack || t > t_end_ + slack)
    throw DomainError("time " + std::to_string(t) + " outside the solution interval");
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double value, const Segment& s) { return value < s.t0; });
  if (it != segments_.begin()) --it;
  return it->eval(t);
}

DenseSolution integrate(const Field& f, double t0, const Vector& y0, double t1,
                        const Options& o, const std::function<bool(const Segment&)>& on_step) {
  if (!(t1 >= t0)) throw DomainError("integration interval must be forward in time");
  const std::size_t n = y0.size();
  DenseSolution sol;
  sol.t_start_ = t0;
  sol.t_end_ = t0;
  sol.y_end_ = y0;
  if (t1 == t0) return sol;

  Vector y = y0, y1(n), ytmp(n), err(n);
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  f(t0, y, k1);

  const double span = t1 - t0;
  double h = o.initial_step;
  if (!(h > 0.0)) {
    // Hairer's starting-step heuristic, simplified.
    const double d0 = scaled_norm(y, y, y, o);
    const double d1n = scaled_norm(k1, y, y, o);
    h = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h = std::min(h, span);
  }
  if (o.max_step > 0.0) h = std::min(h, o.max_step);

  double t = t0;
  const double h_floor = 1e-14 * std::max(1.0, std::abs(t1));
  std::size_t steps = 0;
  while (t < t1) {
    if (++steps > o.max_steps) throw SimulationError("ODE step limit reached at t = " + std::to_string(t));
    bool last = false;
    if (t + h >= t1 || t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }
    if (h < h_floor) throw SimulationError("ODE step size underflow at t = " + std::to_string(t));

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    f(t + c2 * h, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * h, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * h, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * h, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(t + h, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f(t + h, y1, k7);
    for (std::size_t i = 0; i < n; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);

    const double e = scaled_norm(err, y, y1, o);
    if (!std::isfinite(e)) {
      h *= 0.2;
      ++sol.rejected_;
      continue;
    }
    const double fac = std::clamp(0.9 * std::pow(std::max(e, 1e-300), -0.2), 0.2, 10.0);
    if (e > 1.0) {
      h *= std::max(0.2, fac);
      ++sol.rejected_;
      continue;
    }

    Segment seg;
    seg.t0 = t;
    seg.h = h;
    seg.rcont.assign(5, Vector(n));
    for (std::size_t i = 0; i < n; ++i) {
      const double ydiff = y1[i] - y[i];
      const double bspl = h * k1[i] - ydiff;
      seg.rcont[0][i] = y[i];
      seg.rcont[1][i] = ydiff;
      seg.rcont[2][i] = bspl;
      seg.rcont[3][i] = ydiff - h * k7[i] - bspl;
      seg.rcont[4][i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] +
                             d7 * k7[i]);
    }
    t = last ? t1 : t + h;
    y.swap(y1);
    k1.swap(k7);
    sol.segments_.push_back(std::move(seg));
    sol.t_end_ = t;
    sol.y_end_ = y;
    if (on_step && !on_step(sol.segments_.back())) break;

    h *= fac;
    if (o.max_step > 0.0) h = std::min(h, o.max_step);
  }
  return sol;
}

}  // namespace piston::ode
