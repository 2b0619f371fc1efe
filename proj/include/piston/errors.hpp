#pragma once

#include <stdexcept>
#include <string>

namespace piston {

// Invalid configuration. `field` names the offending key (dotted path).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Argument outside the domain where a quantity is defined (X on a wall,
// energy outside the band, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Runtime failure of a simulation or solver.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace piston
