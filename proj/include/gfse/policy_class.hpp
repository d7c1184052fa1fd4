#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gfse/core.hpp"
#include "gfse/rng.hpp"

namespace gfse {

struct ParamRange {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
};

/// A parameterized family of stopping rules over a box-shaped parameter space.
class PolicyClass {
 public:
  using Factory = std::function<PolicyPtr(std::span<const double>)>;

  PolicyClass(std::string class_id, std::vector<ParamRange> box, unsigned d_hint, Factory make);

  const std::string& class_id() const noexcept { return class_id_; }
  const std::vector<ParamRange>& box() const noexcept { return box_; }
  std::size_t dimension() const noexcept { return box_.size(); }
  /// Heuristic VC dimension (free parameters + 1). Not a proven value.
  unsigned d_hint() const noexcept { return d_hint_; }

  /// Builds the policy for a parameter vector. Throws InvalidInput when
  /// theta has the wrong arity or leaves the box.
  PolicyPtr make(std::span<const double> theta) const;
  /// Uniform draw from the box.
  PolicyPtr sample(Rng& rng) const;

  /// Maps [0,1]^d onto the box and back; used by the Bayesian optimizer.
  std::vector<double> from_unit(std::span<const double> u) const;
  std::vector<double> to_unit(std::span<const double> theta) const;

 private:
  std::string class_id_;
  std::vector<ParamRange> box_;
  unsigned d_hint_;
  Factory make_;
};

using PolicyClassPtr = std::shared_ptr<const PolicyClass>;

}  // namespace gfse
