#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gfse/core.hpp"

namespace gfse {

/// Append-only set of trajectories from one domain. All share a schema;
/// lengths match unless the domain is variable-horizon (ticket replay), in
/// which case `horizon()` is the longest one.
class TrajectoryPool {
 public:
  TrajectoryPool(SchemaPtr schema, std::string domain_id, std::uint64_t created_seed);

  void append(Trajectory t);

  std::size_t size() const noexcept { return trajectories_.size(); }
  bool empty() const noexcept { return trajectories_.empty(); }
  const Trajectory& operator[](std::size_t i) const { return trajectories_[i]; }
  auto begin() const noexcept { return trajectories_.begin(); }
  auto end() const noexcept { return trajectories_.end(); }
  const std::vector<Trajectory>& trajectories() const noexcept { return trajectories_; }

  const SchemaPtr& schema() const noexcept { return schema_; }
  const std::string& domain_id() const noexcept { return domain_id_; }
  std::uint64_t created_seed() const noexcept { return created_seed_; }
  std::size_t horizon() const noexcept { return horizon_; }
  bool variable_horizon() const noexcept { return variable_; }

 private:
  SchemaPtr schema_;
  std::string domain_id_;
  std::uint64_t created_seed_;
  std::size_t horizon_ = 0;
  bool variable_ = false;
  std::vector<Trajectory> trajectories_;
};

struct EvalReport {
  std::vector<double> policy_theta;
  double estimate = 0.0;
  std::size_t n_used = 0;
  std::vector<double> per_trajectory_returns;

  double std_error() const;
};

/// n i.i.d. full trajectories; trajectory i uses split_seed(seed, i).
TrajectoryPool gather_full(const StoppingDomain& domain, std::size_t n, std::uint64_t seed);

/// Off-policy value estimate: simulate the policy on every stored full trajectory.
EvalReport evaluate(const Policy& policy, const TrajectoryPool& pool, const RewardModel& reward);

/// Same as evaluate() for every policy. Reports land in input order and are
/// identical for any worker count (0 = hardware concurrency).
std::vector<EvalReport> evaluate_batch(std::span<const PolicyPtr> policies,
                                       const TrajectoryPool& pool, const RewardModel& reward,
                                       unsigned workers = 0);

/// Estimate over the stored trajectories that determine this policy's
/// return: full ones always, truncated ones only if the policy halts within
/// them. n_used may be smaller than the pool.
EvalReport evaluate_where_valid(const Policy& policy, std::span<const Trajectory> stored,
                                const RewardModel& reward);

/// On-policy Monte Carlo: each of the k policies runs floor(budget / k)
/// fresh episodes. Policy j's episode e uses split_seed(split_seed(seed, j), e).
std::vector<EvalReport> monte_carlo_on_policy(std::span<const PolicyPtr> policies,
                                              const StoppingDomain& domain, std::size_t budget,
                                              std::uint64_t seed);

/// Index of the largest estimate; ties go to the lowest index.
std::size_t argmax_estimate(std::span<const EvalReport> reports);

}  // namespace gfse
