#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "gfse/bounds.hpp"
#include "gfse/core.hpp"
#include "gfse/evaluation.hpp"
#include "gfse/policy_class.hpp"

namespace gfse {

enum class SearchMethod { RandomSearch };

struct SearchConfig {
  SearchMethod method = SearchMethod::RandomSearch;
  std::size_t n_candidates = 500;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0 = hardware concurrency

  void validate() const;
};

struct GfseResult {
  PolicyPtr best_policy;
  std::size_t best_index = 0;
  std::vector<PolicyPtr> candidates;
  std::vector<EvalReport> reports;
  std::size_t pool_size = 0;
};

/// Either an explicit trajectory budget or accuracy targets for the bound.
using GatherBudget = std::variant<std::size_t, BoundInputs>;

/// Seed used for the candidate draw of a search run.
std::uint64_t candidate_seed(const SearchConfig& cfg);
/// Seed from which environment episodes of a run are split.
std::uint64_t environment_seed(const SearchConfig& cfg);

std::vector<PolicyPtr> sample_candidates(const PolicyClass& cls, std::size_t n, std::uint64_t seed);

/// Evaluates every candidate on the same pool and keeps the empirical best
/// (ties to the lowest index).
GfseResult select_best(std::vector<PolicyPtr> candidates, const TrajectoryPool& pool,
                       const RewardModel& reward, unsigned workers = 0);

/// Random search over the class using a pool that is already gathered.
GfseResult search_pool(const PolicyClass& cls, const TrajectoryPool& pool,
                       const RewardModel& reward, const SearchConfig& cfg);

/// Gather full trajectories (count from the budget or the bound), search the
/// class on them, return the best candidate.
GfseResult gfse(const StoppingDomain& domain, const PolicyClass& cls, const SearchConfig& cfg,
                const GatherBudget& budget);

/// Runs the policy for `episodes` on-policy episodes; episode e uses split_seed(seed, e).
std::vector<double> execute(const Policy& policy, const StoppingDomain& domain,
                            std::size_t episodes, std::uint64_t seed);

struct OnlineRun {
  std::vector<double> returns;          // per episode
  std::vector<double> cumulative_mean;  // running mean of returns
  std::vector<std::size_t> n_used;      // trajectories behind the chosen policy's estimate (0 while gathering)
  PolicyPtr final_policy;
};

/// Observer for each search inside an online run: (episode, reports over candidates).
using SearchObserver = std::function<void(std::size_t, std::span<const EvalReport>)>;

/// Online GFSE: the first `initial_budget` episodes run to the horizon, then
/// one search picks a policy that is executed for the remaining episodes.
OnlineRun gfse_online(const StoppingDomain& domain, const PolicyClass& cls, const SearchConfig& cfg,
                      std::size_t initial_budget, std::size_t total_episodes);

/// GFSE with reuse: after the initial full trajectories, every episode reruns
/// the search over everything stored so far (truncated on-policy trajectories
/// count only for candidates that halt within them), executes the winner and
/// stores what it observed. Episode e uses split_seed(environment_seed(cfg), e - 1).
OnlineRun gfse_re(const StoppingDomain& domain, const PolicyClass& cls, const SearchConfig& cfg,
                  std::size_t initial_budget, std::size_t total_episodes,
                  const SearchObserver& observer = {});

std::vector<double> running_mean(std::span<const double> xs);

}  // namespace gfse
