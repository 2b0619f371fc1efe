#pragma once

#include <memory>
#include <string>
#include <vector>

namespace piston {

// Wall/piston interaction profile kappa on [0, inf): C^2, strictly decreasing
// on [0, 1), identically zero on [1, inf). The scaled potential is
// kappa_delta(x) = kappa(x / delta).
//
// Immutable; copies share the underlying model.
class PotentialProfile {
 public:
  class Model {
   public:
    virtual ~Model() = default;
    virtual double kappa(double u) const = 0;
    virtual double kappa_prime(double u) const = 0;
    virtual double kappa_second(double u) const = 0;
    // Inverse of kappa restricted to [0, 1], defined on [0, barrier].
    virtual double inverse(double y) const = 0;
    virtual double inverse_prime(double y) const;
    virtual double inverse_second(double y) const;
    virtual double barrier() const = 0;
    virtual std::string name() const = 0;
  };

  // kappa(u) = (1 - u)^3 on [0, 1], 0 beyond.
  static PotentialProfile cubic();

  // Piecewise cubic Hermite interpolant through (u, kappa, kappa') samples.
  // Nodes must start at u = 0, end at u = 1 with kappa = kappa' = 0 there, be
  // strictly decreasing in kappa, and satisfy the Fritsch-Carlson monotonicity
  // bound on every interval. Throws ConfigError otherwise.
  static PotentialProfile tabulated(std::vector<double> u, std::vector<double> kappa,
                                    std::vector<double> kappa_prime);

  // CSV with header and columns u,kappa,kappa_prime.
  static PotentialProfile load_csv(const std::string& path);

  // "cubic" or "tabulated:<path>".
  static PotentialProfile from_name(const std::string& name);

  double kappa(double u) const { return model_->kappa(u); }
  double kappa_prime(double u) const { return model_->kappa_prime(u); }
  double kappa_second(double u) const { return model_->kappa_second(u); }
  double inverse(double y) const { return model_->inverse(y); }
  double inverse_prime(double y) const { return model_->inverse_prime(y); }
  double inverse_second(double y) const { return model_->inverse_second(y); }
  double barrier() const { return model_->barrier(); }
  std::string name() const { return model_->name(); }

  double kappa_delta(double x, double delta) const { return kappa(x / delta); }
  double kappa_delta_prime(double x, double delta) const {
    return kappa_prime(x / delta) / delta;
  }

 private:
  explicit PotentialProfile(std::shared_ptr<const Model> model) : model_(std::move(model)) {}

  std::shared_ptr<const Model> model_;
};

}  // namespace piston
