#include "piston/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "piston/errors.hpp"

namespace piston {

double PotentialProfile::Model::inverse_prime(double y) const {
  return 1.0 / kappa_prime(inverse(y));
}

double PotentialProfile::Model::inverse_second(double y) const {
  const double u = inverse(y);
  const double k1 = kappa_prime(u);
  return -kappa_second(u) / (k1 * k1 * k1);
}

namespace {

class CubicModel final : public PotentialProfile::Model {
 public:
  double kappa(double u) const override {
    if (u >= 1.0) return 0.0;
    const double r = 1.0 - u;
    return r * r * r;
  }
  double kappa_prime(double u) const override {
    if (u >= 1.0) return 0.0;
    const double r = 1.0 - u;
    return -3.0 * r * r;
  }
  double kappa_second(double u) const override {
    if (u >= 1.0) return 0.0;
    return 6.0 * (1.0 - u);
  }
  double inverse(double y) const override { return 1.0 - std::cbrt(std::clamp(y, 0.0, 1.0)); }
  double inverse_prime(double y) const override {
    const double c = std::cbrt(y);
    return -1.0 / (3.0 * c * c);
  }
  double inverse_second(double y) const override {
    return 2.0 / (9.0 * y * std::cbrt(y * y));
  }
  double barrier() const override { return 1.0; }
  std::string name() const override { return "cubic"; }
};

class TabulatedModel final : public PotentialProfile::Model {
 public:
  TabulatedModel(std::vector<double> u, std::vector<double> k, std::vector<double> dk)
      : u_(std::move(u)), k_(std::move(k)), dk_(std::move(dk)) {}

  double kappa(double u) const override {
    if (u >= 1.0) return 0.0;
    if (u <= 0.0) return k_.front() + dk_.front() * u;
    const auto [i, t, h] = locate(u);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * k_[i] + (t3 - 2 * t2 + t) * h * dk_[i] +
           (-2 * t3 + 3 * t2) * k_[i + 1] + (t3 - t2) * h * dk_[i + 1];
  }

  double kappa_prime(double u) const override {
    if (u >= 1.0) return 0.0;
    if (u <= 0.0) return dk_.front();
    const auto [i, t, h] = locate(u);
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * k_[i] + (3 * t2 - 4 * t + 1) * h * dk_[i] +
            (-6 * t2 + 6 * t) * k_[i + 1] + (3 * t2 - 2 * t) * h * dk_[i + 1]) /
           h;
  }

  double kappa_second(double u) const override {
    if (u >= 1.0 || u <= 0.0) return 0.0;
    const auto [i, t, h] = locate(u);
    return ((12 * t - 6) * k_[i] + (6 * t - 4) * h * dk_[i] + (-12 * t + 6) * k_[i + 1] +
            (6 * t - 2) * h * dk_[i + 1]) /
           (h * h);
  }

  double inverse(double y) const override {
    if (y <= 0.0) return 1.0;
    if (y >= k_.front()) return 0.0;
    // k_ is strictly decreasing: first node with k <= y bounds the root.
    const auto it = std::lower_bound(k_.begin(), k_.end(), y, std::greater<>());
    const std::size_t hi = static_cast<std::size_t>(it - k_.begin());
    double a = u_[hi - 1], b = u_[hi];
    double u = 0.5 * (a + b);
    for (int iter = 0; iter < 100; ++iter) {
      const double f = kappa(u) - y;
      if (f > 0.0) a = u; else b = u;
      const double d = kappa_prime(u);
      double next = (d < 0.0) ? u - f / d : 0.5 * (a + b);
      if (!(next > a && next < b)) next = 0.5 * (a + b);
      if (std::abs(next - u) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, u)) {
        u = next;
        break;
      }
      u = next;
    }
    return u;
  }

  double barrier() const override { return k_.front(); }
  std::string name() const override { return "tabulated"; }

 private:
  struct Cell {
    std::size_t i;
    double t;
    double h;
  };

  Cell locate(double u) const {
    auto it = std::upper_bound(u_.begin(), u_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - u_.begin());
    i = std::clamp<std::size_t>(i, 1, u_.size() - 1) - 1;
    const double h = u_[i + 1] - u_[i];
    return {i, (u - u_[i]) / h, h};
  }

  std::vector<double> u_, k_, dk_;
};

}  // namespace

PotentialProfile PotentialProfile::cubic() {
  static const auto model = std::make_shared<const CubicModel>();
  return PotentialProfile(model);
}

PotentialProfile PotentialProfile::tabulated(std::vector<double> u, std::vector<double> kappa,
                                             std::vector<double> kappa_prime) {
  const std::size_t n = u.size();
  if (n < 2 || kappa.size() != n || kappa_prime.size() != n)
    throw ConfigError("potential", "table needs >= 2 rows with u, kappa, kappa_prime");
  if (u.front() != 0.0 || u.back() != 1.0)
    throw ConfigError("potential", "table must span u = 0 .. 1");
  if (std::abs(kappa.back()) > 1e-12 || std::abs(kappa_prime.back()) > 1e-12)
    throw ConfigError("potential", "kappa and kappa' must vanish at u = 1");
  kappa.back() = 0.0;
  kappa_prime.back() = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = u[i + 1] - u[i];
    if (!(h > 0.0)) throw ConfigError("potential", "u must be strictly increasing");
    if (!(kappa[i + 1] < kappa[i]))
      throw ConfigError("potential", "kappa must be strictly decreasing (row " +
                                         std::to_string(i + 1) + ")");
    if (!(kappa_prime[i] < 0.0))
      throw ConfigError("potential", "kappa' must be negative for u < 1 (row " +
                                         std::to_string(i) + ")");
    const double slope = (kappa[i + 1] - kappa[i]) / h;
    const double alpha = kappa_prime[i] / slope;
    const double beta = kappa_prime[i + 1] / slope;
    if (alpha * alpha + beta * beta > 9.0)
      throw ConfigError("potential", "interpolant not monotone on interval " +
                                         std::to_string(i));
  }
  return PotentialProfile(std::make_shared<const TabulatedModel>(
      std::move(u), std::move(kappa), std::move(kappa_prime)));
}

PotentialProfile PotentialProfile::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("potential", "cannot open " + path);
  std::vector<double> u, k, dk;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double a, b, c;
    if (!(fields >> a >> b >> c)) {
      if (first) {  // header
        first = false;
        continue;
      }
      throw ConfigError("potential", "malformed row in " + path + ": " + line);
    }
    first = false;
    u.push_back(a);
    k.push_back(b);
    dk.push_back(c);
  }
  return tabulated(std::move(u), std::move(k), std::move(dk));
}

PotentialProfile PotentialProfile::from_name(const std::string& name) {
  if (name == "cubic") return cubic();
  const std::string prefix = "tabulated:";
  if (name.rfind(prefix, 0) == 0) return load_csv(name.substr(prefix.size()));
  throw ConfigError("potential", "unknown profile '" + name + "'");
}

}  // namespace piston
