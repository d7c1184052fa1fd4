#include "gfse/core.hpp"

#include <algorithm>

#include "gfse/errors.hpp"

namespace gfse {

FeatureSchema::FeatureSchema(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw InvalidInput("feature schema needs at least one feature");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw InvalidInput("empty feature name");
    for (std::size_t j = 0; j < i; ++j) {
      if (names_[i] == names_[j]) throw InvalidInput("duplicate feature name: " + names_[i]);
    }
  }
}

std::optional<std::size_t> FeatureSchema::find(std::string_view name) const noexcept {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t FeatureSchema::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw SchemaError("observation has no feature '" + std::string(name) + "'");
}

Prefix::Prefix(const FeatureSchema& schema, std::span<const double> rows)
    : schema_(&schema), rows_(rows), size_(rows.size() / schema.size()) {
  if (rows.size() % schema.size() != 0) {
    throw InvalidInput("prefix storage is not a whole number of observations");
  }
}

ObservationView Prefix::operator[](std::size_t i) const {
  const std::size_t w = schema_->size();
  return ObservationView(*schema_, rows_.subspan(i * w, w));
}

Prefix Prefix::first(std::size_t t) const {
  if (t > size_) throw InvalidInput("prefix longer than the sequence it views");
  return Prefix(*schema_, rows_.first(t * schema_->size()));
}

Trajectory::Trajectory(SchemaPtr schema, std::vector<double> rows, std::size_t horizon,
                       std::uint64_t seed, std::string domain_id)
    : schema_(std::move(schema)),
      rows_(std::move(rows)),
      length_(0),
      horizon_(horizon),
      seed_(seed),
      domain_id_(std::move(domain_id)) {
  if (!schema_) throw InvalidInput("trajectory without schema");
  if (rows_.size() % schema_->size() != 0) {
    throw InvalidInput("trajectory storage is not a whole number of observations");
  }
  length_ = rows_.size() / schema_->size();
  if (length_ > horizon_) throw InvalidInput("trajectory longer than its horizon");
}

bool Trajectory::operator==(const Trajectory& other) const {
  return *schema_ == *other.schema_ && rows_ == other.rows_ && horizon_ == other.horizon_ &&
         seed_ == other.seed_ && domain_id_ == other.domain_id_;
}

std::optional<std::size_t> Policy::first_halt(const Prefix& observations) const {
  for (std::size_t t = 1; t <= observations.size(); ++t) {
    if (decide(observations.first(t)) == Action::Halt) return t;
  }
  return std::nullopt;
}

void Policy::check_schema(const FeatureSchema& schema) const {
  for (const auto& f : required_features()) {
    if (!schema.find(f)) {
      throw SchemaError("policy class '" + class_id() + "' needs feature '" + f +
                        "' which the trajectory does not provide");
    }
  }
}

Trajectory StoppingDomain::sample(std::uint64_t seed) const {
  auto stream = open(seed);
  const std::size_t w = schema()->size();
  const std::size_t h = stream->horizon();
  std::vector<double> rows(h * w);
  for (std::size_t t = 0; t < h; ++t) {
    stream->next(std::span<double>(rows).subspan(t * w, w));
  }
  return Trajectory(schema(), std::move(rows), h, seed, id());
}

std::size_t halt_time(const Policy& policy, const Trajectory& trajectory) {
  if (trajectory.length() == 0) throw InvalidInput("halt_time on an empty trajectory");
  if (!trajectory.is_full()) throw InvalidInput("halt_time needs a full-horizon trajectory");
  policy.check_schema(*trajectory.schema());
  return policy.first_halt(trajectory.prefix()).value_or(trajectory.horizon());
}

std::optional<std::size_t> halt_time_within(const Policy& policy, const Trajectory& trajectory) {
  if (trajectory.length() == 0) throw InvalidInput("halt_time on an empty trajectory");
  policy.check_schema(*trajectory.schema());
  if (auto t = policy.first_halt(trajectory.prefix())) return t;
  if (trajectory.is_full()) return trajectory.horizon();
  return std::nullopt;
}

double simulate_return(const Policy& policy, const Trajectory& trajectory,
                       const RewardModel& reward) {
  return reward.return_of(trajectory.prefix(halt_time(policy, trajectory)));
}

Episode run_on_policy(const Policy& policy, const StoppingDomain& domain, std::uint64_t seed) {
  policy.check_schema(*domain.schema());
  auto stream = domain.open(seed);
  const auto& schema = *domain.schema();
  const std::size_t w = schema.size();
  const std::size_t h = stream->horizon();
  if (h == 0) throw InvalidInput("episode with zero horizon");
  std::vector<double> rows;
  rows.reserve(h * w);
  for (std::size_t t = 1;; ++t) {
    rows.resize(t * w);
    stream->next(std::span<double>(rows).subspan((t - 1) * w, w));
    Prefix seen(schema, rows);
    if (t == h || policy.decide(seen) == Action::Halt) {
      double r = domain.reward().return_of(seen);
      return Episode{Trajectory(domain.schema(), std::move(rows), h, seed, domain.id()), r};
    }
  }
}

}  // namespace gfse
