#include "gfse/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gfse/errors.hpp"
#include "gfse/parallel.hpp"
#include "gfse/rng.hpp"

namespace gfse {

TrajectoryPool::TrajectoryPool(SchemaPtr schema, std::string domain_id, std::uint64_t created_seed)
    : schema_(std::move(schema)), domain_id_(std::move(domain_id)), created_seed_(created_seed) {
  if (!schema_) throw InvalidInput("trajectory pool without schema");
}

void TrajectoryPool::append(Trajectory t) {
  if (!(*t.schema() == *schema_)) throw SchemaError("trajectory schema differs from pool schema");
  if (!t.is_full()) throw InvalidInput("only full trajectories can be pooled");
  if (t.length() == 0) throw InvalidInput("empty trajectory");
  if (!trajectories_.empty() && t.horizon() != horizon_) variable_ = true;
  horizon_ = std::max(horizon_, t.horizon());
  trajectories_.push_back(std::move(t));
}

double EvalReport::std_error() const {
  const std::size_t n = per_trajectory_returns.size();
  if (n < 2) return 0.0;
  double ss = 0.0;
  for (double r : per_trajectory_returns) ss += (r - estimate) * (r - estimate);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

TrajectoryPool gather_full(const StoppingDomain& domain, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidInput("gather_full needs n >= 1");
  TrajectoryPool pool(domain.schema(), domain.id(), seed);
  for (std::size_t i = 0; i < n; ++i) pool.append(domain.sample(split_seed(seed, i)));
  return pool;
}

namespace {

EvalReport make_report(const Policy& policy, std::vector<double> returns) {
  EvalReport r;
  r.policy_theta = policy.theta();
  r.n_used = returns.size();
  // Summing in sorted order makes the mean independent of pool order, bit for bit.
  std::vector<double> sorted = returns;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double x : sorted) sum += x;
  r.estimate = returns.empty() ? 0.0 : sum / static_cast<double>(returns.size());
  r.per_trajectory_returns = std::move(returns);
  return r;
}

}  // namespace

EvalReport evaluate(const Policy& policy, const TrajectoryPool& pool, const RewardModel& reward) {
  if (pool.empty()) throw InvalidInput("cannot evaluate on an empty trajectory pool");
  policy.check_schema(*pool.schema());
  std::vector<double> returns;
  returns.reserve(pool.size());
  for (const auto& t : pool) returns.push_back(simulate_return(policy, t, reward));
  return make_report(policy, std::move(returns));
}

std::vector<EvalReport> evaluate_batch(std::span<const PolicyPtr> policies,
                                       const TrajectoryPool& pool, const RewardModel& reward,
                                       unsigned workers) {
  if (pool.empty()) throw InvalidInput("cannot evaluate on an empty trajectory pool");
  std::vector<EvalReport> out(policies.size());
  parallel_for(policies.size(), workers,
               [&](std::size_t i) { out[i] = evaluate(*policies[i], pool, reward); });
  return out;
}

EvalReport evaluate_where_valid(const Policy& policy, std::span<const Trajectory> stored,
                                const RewardModel& reward) {
  std::vector<double> returns;
  returns.reserve(stored.size());
  for (const auto& t : stored) {
    if (auto h = halt_time_within(policy, t)) returns.push_back(reward.return_of(t.prefix(*h)));
  }
  return make_report(policy, std::move(returns));
}

std::vector<EvalReport> monte_carlo_on_policy(std::span<const PolicyPtr> policies,
                                              const StoppingDomain& domain, std::size_t budget,
                                              std::uint64_t seed) {
  const std::size_t k = policies.size();
  if (k == 0) throw InvalidInput("monte_carlo_on_policy needs at least one policy");
  if (budget < k) throw InvalidInput("budget smaller than the number of policies");
  const std::size_t per_policy = budget / k;
  std::vector<EvalReport> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::uint64_t policy_seed = split_seed(seed, j);
    std::vector<double> returns;
    returns.reserve(per_policy);
    for (std::size_t e = 0; e < per_policy; ++e) {
      returns.push_back(run_on_policy(*policies[j], domain, split_seed(policy_seed, e)).ret);
    }
    out.push_back(make_report(*policies[j], std::move(returns)));
  }
  return out;
}

std::size_t argmax_estimate(std::span<const EvalReport> reports) {
  if (reports.empty()) throw InvalidInput("argmax over no reports");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].estimate > reports[best].estimate) best = i;
  }
  return best;
}

}  // namespace gfse
