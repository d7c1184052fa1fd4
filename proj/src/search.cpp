#include "gfse/search.hpp"

#include "gfse/errors.hpp"
#include "gfse/parallel.hpp"
#include "gfse/rng.hpp"

namespace gfse {

void SearchConfig::validate() const {
  if (n_candidates < 1) throw InvalidInput("n_candidates must be >= 1");
}

std::uint64_t candidate_seed(const SearchConfig& cfg) { return split_seed(cfg.seed, 2); }
std::uint64_t environment_seed(const SearchConfig& cfg) { return split_seed(cfg.seed, 1); }

std::vector<PolicyPtr> sample_candidates(const PolicyClass& cls, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PolicyPtr> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(cls.sample(rng));
  return out;
}

GfseResult select_best(std::vector<PolicyPtr> candidates, const TrajectoryPool& pool,
                       const RewardModel& reward, unsigned workers) {
  if (candidates.empty()) throw InvalidInput("no candidate policies");
  GfseResult r;
  r.reports = evaluate_batch(candidates, pool, reward, workers);
  r.best_index = argmax_estimate(r.reports);
  r.best_policy = candidates[r.best_index];
  r.candidates = std::move(candidates);
  r.pool_size = pool.size();
  return r;
}

GfseResult search_pool(const PolicyClass& cls, const TrajectoryPool& pool,
                       const RewardModel& reward, const SearchConfig& cfg) {
  cfg.validate();
  return select_best(sample_candidates(cls, cfg.n_candidates, candidate_seed(cfg)), pool, reward,
                     cfg.workers);
}

GfseResult gfse(const StoppingDomain& domain, const PolicyClass& cls, const SearchConfig& cfg,
                const GatherBudget& budget) {
  cfg.validate();
  const std::size_t n = std::holds_alternative<std::size_t>(budget)
                            ? std::get<std::size_t>(budget)
                            : static_cast<std::size_t>(required_trajectories(std::get<BoundInputs>(budget)));
  const auto pool = gather_full(domain, n, environment_seed(cfg));
  return search_pool(cls, pool, domain.reward(), cfg);
}

std::vector<double> execute(const Policy& policy, const StoppingDomain& domain,
                            std::size_t episodes, std::uint64_t seed) {
  if (episodes < 1) throw InvalidInput("execute needs at least one episode");
  std::vector<double> out;
  out.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    out.push_back(run_on_policy(policy, domain, split_seed(seed, e)).ret);
  }
  return out;
}

std::vector<double> running_mean(std::span<const double> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sum += xs[i];
    out.push_back(sum / static_cast<double>(i + 1));
  }
  return out;
}

namespace {

void check_online(std::size_t initial_budget, std::size_t total_episodes) {
  if (initial_budget < 1) throw InvalidInput("initial budget must be >= 1");
  if (total_episodes <= initial_budget) {
    throw InvalidInput("total episodes must exceed the initial budget");
  }
}

}  // namespace

OnlineRun gfse_online(const StoppingDomain& domain, const PolicyClass& cls, const SearchConfig& cfg,
                      std::size_t initial_budget, std::size_t total_episodes) {
  cfg.validate();
  check_online(initial_budget, total_episodes);
  const std::uint64_t env = environment_seed(cfg);
  OnlineRun run;
  const auto pool = gather_full(domain, initial_budget, env);
  for (const auto& t : pool) {
    run.returns.push_back(domain.reward().return_of(t.prefix()));
    run.n_used.push_back(0);
  }
  auto found = search_pool(cls, pool, domain.reward(), cfg);
  for (std::size_t e = initial_budget + 1; e <= total_episodes; ++e) {
    run.returns.push_back(run_on_policy(*found.best_policy, domain, split_seed(env, e - 1)).ret);
    run.n_used.push_back(found.reports[found.best_index].n_used);
  }
  run.final_policy = found.best_policy;
  run.cumulative_mean = running_mean(run.returns);
  return run;
}

OnlineRun gfse_re(const StoppingDomain& domain, const PolicyClass& cls, const SearchConfig& cfg,
                  std::size_t initial_budget, std::size_t total_episodes,
                  const SearchObserver& observer) {
  cfg.validate();
  check_online(initial_budget, total_episodes);
  const std::uint64_t env = environment_seed(cfg);
  const auto candidates = sample_candidates(cls, cfg.n_candidates, candidate_seed(cfg));

  OnlineRun run;
  std::vector<Trajectory> stored;
  for (std::size_t e = 1; e <= initial_budget; ++e) {
    stored.push_back(domain.sample(split_seed(env, e - 1)));
    run.returns.push_back(domain.reward().return_of(stored.back().prefix()));
    run.n_used.push_back(0);
  }

  std::vector<EvalReport> reports(candidates.size());
  for (std::size_t e = initial_budget + 1; e <= total_episodes; ++e) {
    parallel_for(candidates.size(), cfg.workers, [&](std::size_t i) {
      reports[i] = evaluate_where_valid(*candidates[i], stored, domain.reward());
    });
    if (observer) observer(e, reports);
    // Full trajectories evaluate every candidate, so each report is nonempty.
    const std::size_t best = argmax_estimate(reports);
    auto episode = run_on_policy(*candidates[best], domain, split_seed(env, e - 1));
    run.returns.push_back(episode.ret);
    run.n_used.push_back(reports[best].n_used);
    run.final_policy = candidates[best];
    stored.push_back(std::move(episode.observed));
  }
  run.cumulative_mean = running_mean(run.returns);
  return run;
}

}  // namespace gfse
