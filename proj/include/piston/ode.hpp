#pragma once

// Dormand-Prince 5(4) with step-size control and the 4th-order continuous
// extension of Hairer, Norsett & Wanner.

#include <cstddef>
#include <functional>
#include <vector>

namespace piston::ode {

using Vector = std::vector<double>;
using Field = std::function<void(double t, const Vector& y, Vector& dydt)>;

struct Options {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 0.0;  // 0 picks one automatically
  double max_step = 0.0;      // 0 means unbounded
  std::size_t max_steps = 10'000'000;
};

// One accepted step with its interpolation data.
struct Segment {
  double t0 = 0.0;
  double h = 0.0;
  std::vector<Vector> rcont;  // five coefficient vectors

  Vector eval(double t) const;
};

class DenseSolution {
 public:
  double t_begin() const { return segments_.empty() ? t_start_ : segments_.front().t0; }
  double t_end() const { return t_end_; }
  const Vector& y_end() const { return y_end_; }
  std::size_t steps() const { return segments_.size(); }
  std::size_t rejected() const { return rejected_; }
  const std::vector<Segment>& segments() const { return segments_; }

  // Continuous extension; t must lie in [t_begin, t_end].
  Vector operator()(double t) const;

 private:
  friend DenseSolution integrate(const Field&, double, const Vector&, double, const Options&,
                                 const std::function<bool(const Segment&)>&);
  double t_start_ = 0.0;
  double t_end_ = 0.0;
  Vector y_end_;
  std::vector<Segment> segments_;
  std::size_t rejected_ = 0;
};

// Integrates from (t0, y0) to t1 > t0. on_step is called after every accepted
// step; returning false stops the integration at the end of that step.
// Throws SimulationError on step-size underflow or when max_steps is hit.
DenseSolution integrate(const Field& f, double t0, const Vector& y0, double t1,
                        const Options& options = {},
                        const std::function<bool(const Segment&)>& on_step = {});

}  // namespace piston::ode
