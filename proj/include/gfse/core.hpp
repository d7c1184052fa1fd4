#pragma once

// Domain-independent stopping-problem types: observation schemas, trajectory
// storage, prefix views, and the Policy / RewardModel / StoppingDomain
// contracts every other module is written against.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gfse {

/// Ordered feature names shared by every observation of a domain.
class FeatureSchema {
 public:
  explicit FeatureSchema(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<std::size_t> find(std::string_view name) const noexcept;
  /// Throws SchemaError if `name` is absent.
  std::size_t index_of(std::string_view name) const;

  bool operator==(const FeatureSchema&) const = default;

 private:
  std::vector<std::string> names_;
};

using SchemaPtr = std::shared_ptr<const FeatureSchema>;

/// Non-owning view of one observation row.
class ObservationView {
 public:
  ObservationView(const FeatureSchema& schema, std::span<const double> values)
      : schema_(&schema), values_(values) {}

  double operator[](std::size_t i) const { return values_[i]; }
  double get(std::string_view feature) const { return values_[schema_->index_of(feature)]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  const FeatureSchema* schema_;
  std::span<const double> values_;
};

/// The first t observations of a trajectory, stored row-major. A prefix of
/// length zero is the empty history.
class Prefix {
 public:
  Prefix(const FeatureSchema& schema, std::span<const double> rows);

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  const FeatureSchema& schema() const noexcept { return *schema_; }
  ObservationView operator[](std::size_t i) const;
  ObservationView back() const { return (*this)[size_ - 1]; }
  Prefix first(std::size_t t) const;
  std::span<const double> rows() const noexcept { return rows_; }

 private:
  const FeatureSchema* schema_;
  std::span<const double> rows_;
  std::size_t size_;
};

/// Immutable observation sequence produced by a domain. A trajectory is
/// full when its length equals its horizon; shorter ones come from
/// on-policy episodes that halted early.
class Trajectory {
 public:
  Trajectory(SchemaPtr schema, std::vector<double> rows, std::size_t horizon,
             std::uint64_t seed, std::string domain_id);

  std::size_t length() const noexcept { return length_; }
  std::size_t horizon() const noexcept { return horizon_; }
  bool is_full() const noexcept { return length_ == horizon_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& domain_id() const noexcept { return domain_id_; }
  const SchemaPtr& schema() const noexcept { return schema_; }
  const std::vector<double>& rows() const noexcept { return rows_; }

  ObservationView operator[](std::size_t i) const { return prefix()[i]; }
  Prefix prefix() const { return Prefix(*schema_, rows_); }
  Prefix prefix(std::size_t t) const { return prefix().first(t); }

  bool operator==(const Trajectory& other) const;

 private:
  SchemaPtr schema_;
  std::vector<double> rows_;
  std::size_t length_;
  std::size_t horizon_;
  std::uint64_t seed_;
  std::string domain_id_;
};

enum class Action { Continue, Halt };

using NamedValues = std::vector<std::pair<std::string, double>>;

/// A parameterized stopping rule. `decide` must be a pure function of the
/// prefix; consumers treat the horizon step as a forced halt.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual const std::string& class_id() const = 0;
  /// Searchable parameter vector.
  virtual std::vector<double> theta() const = 0;
  /// Every parameter needed to rebuild the policy, searchable or fixed.
  virtual NamedValues parameters() const = 0;
  virtual std::vector<std::string> required_features() const = 0;
  virtual Action decide(const Prefix& prefix) const = 0;

  /// Smallest t in [1, observations.size()] with decide(first t) == Halt.
  /// Subclasses may override with an incremental scan that gives the same answer.
  virtual std::optional<std::size_t> first_halt(const Prefix& observations) const;

  /// Throws SchemaError when `schema` lacks a required feature.
  void check_schema(const FeatureSchema& schema) const;
};

using PolicyPtr = std::shared_ptr<const Policy>;

/// Deterministic return for halting at the end of a prefix, bounded by v_max.
class RewardModel {
 public:
  virtual ~RewardModel() = default;
  virtual double v_max() const = 0;
  virtual double return_of(const Prefix& halted) const = 0;
};

/// A single seeded episode of a domain's observation process.
class ObservationStream {
 public:
  virtual ~ObservationStream() = default;
  virtual std::size_t horizon() const = 0;
  /// Writes the next observation into `out` (size == schema width).
  virtual void next(std::span<double> out) = 0;
};

/// A stochastic observation process plus its reward model. Observation
/// generation never depends on the agent's actions, so a stream drained to
/// the horizon is the full trajectory every policy would have seen.
class StoppingDomain {
 public:
  virtual ~StoppingDomain() = default;

  virtual const std::string& id() const = 0;
  virtual const SchemaPtr& schema() const = 0;
  /// Maximum horizon over all episodes.
  virtual std::size_t horizon() const = 0;
  virtual const RewardModel& reward() const = 0;
  virtual std::unique_ptr<ObservationStream> open(std::uint64_t seed) const = 0;
  /// Parameters sufficient to rebuild the domain (see make_domain).
  virtual NamedValues describe() const = 0;

  /// Full-horizon trajectory for `seed`.
  Trajectory sample(std::uint64_t seed) const;
};

using DomainPtr = std::shared_ptr<const StoppingDomain>;

/// Halting step of `policy` on a full trajectory; the horizon if it never halts.
std::size_t halt_time(const Policy& policy, const Trajectory& trajectory);

/// Halting step on a possibly truncated trajectory, or nullopt when the
/// trajectory ends before the policy halts (it then carries no information
/// about this policy's return).
std::optional<std::size_t> halt_time_within(const Policy& policy, const Trajectory& trajectory);

double simulate_return(const Policy& policy, const Trajectory& trajectory,
                       const RewardModel& reward);

struct Episode {
  Trajectory observed;  // observations up to and including the halt step
  double ret;
};

/// Runs `policy` live: observations are generated one at a time and the
/// episode stops at the first Halt.
Episode run_on_policy(const Policy& policy, const StoppingDomain& domain, std::uint64_t seed);

}  // namespace gfse
