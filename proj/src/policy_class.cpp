#include "gfse/policy_class.hpp"

#include <algorithm>
#include <cmath>

#include "gfse/errors.hpp"

namespace gfse {

PolicyClass::PolicyClass(std::string class_id, std::vector<ParamRange> box, unsigned d_hint,
                         Factory make)
    : class_id_(std::move(class_id)), box_(std::move(box)), d_hint_(d_hint), make_(std::move(make)) {
  if (box_.empty()) throw InvalidInput("policy class with no parameters");
  for (const auto& r : box_) {
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      throw InvalidInput("bad range for parameter '" + r.name + "'");
    }
  }
}

PolicyPtr PolicyClass::make(std::span<const double> theta) const {
  if (theta.size() != box_.size()) {
    throw InvalidInput(class_id_ + " expects " + std::to_string(box_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!(theta[i] >= box_[i].lo && theta[i] <= box_[i].hi)) {
      throw InvalidInput("parameter '" + box_[i].name + "' outside its range");
    }
  }
  return make_(theta);
}

PolicyPtr PolicyClass::sample(Rng& rng) const {
  std::vector<double> theta(box_.size());
  for (std::size_t i = 0; i < box_.size(); ++i) {
    std::uniform_real_distribution<double> u(box_[i].lo, box_[i].hi);
    theta[i] = box_[i].lo == box_[i].hi ? box_[i].lo : u(rng);
  }
  return make(theta);
}

std::vector<double> PolicyClass::from_unit(std::span<const double> u) const {
  std::vector<double> theta(box_.size());
  for (std::size_t i = 0; i < box_.size(); ++i) {
    const double x = std::clamp(u[i], 0.0, 1.0);
    theta[i] = std::clamp(box_[i].lo + x * (box_[i].hi - box_[i].lo), box_[i].lo, box_[i].hi);
  }
  return theta;
}

std::vector<double> PolicyClass::to_unit(std::span<const double> theta) const {
  std::vector<double> u(box_.size());
  for (std::size_t i = 0; i < box_.size(); ++i) {
    const double w = box_[i].hi - box_[i].lo;
    u[i] = w > 0.0 ? (theta[i] - box_[i].lo) / w : 0.0;
  }
  return u;
}

}  // namespace gfse
