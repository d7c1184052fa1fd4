#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gfse/bkt_filter.hpp"
#include "gfse/core.hpp"
#include "gfse/environments.hpp"
#include "gfse/evaluation.hpp"

namespace gfse {

struct EmConfig {
  std::size_t restarts = 10;
  std::size_t max_iterations = 200;
  double tolerance = 1e-7;  // on the log-likelihood
  std::uint64_t seed = 0;
};

struct FittedBkt {
  BktParams params;
  double log_likelihood = 0.0;
  /// Log-likelihood after every iteration of the winning restart, starting
  /// with its initial point.
  std::vector<double> trace;
};

/// log P(pool | params) under the BKT hidden Markov model.
double bkt_log_likelihood(const BktParams& params, std::span<const Trajectory> pool);

/// One Baum-Welch update restricted to the BKT structure (no forgetting).
/// Probabilities are kept in [1e-6, 1 - 1e-6].
BktParams bkt_em_step(const BktParams& params, std::span<const Trajectory> pool);

/// Maximum-likelihood BKT fit by EM from `restarts` random starting points.
FittedBkt fit_bkt_mle(const TrajectoryPool& pool, const EmConfig& cfg = {});

struct FittedAfm {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double log_likelihood = 0.0;
};

/// Logistic regression of each response on the number of earlier correct
/// responses (Newton iterations with a small ridge term).
FittedAfm fit_afm(const TrajectoryPool& pool);

/// Tutoring cost with the posttest success probability predicted by a
/// fitted AFM model instead of the true student model.
class AfmTutoringReward final : public RewardModel {
 public:
  AfmTutoringReward(const FittedAfm& model, const BktDomainConfig& cost) : model_(model), cost_(cost) {}
  double v_max() const override;
  double return_of(const Prefix& halted) const override;

 private:
  FittedAfm model_;
  BktDomainConfig cost_;  // horizon, problem_cost and posttest_penalty are used
};

/// Students whose response probabilities follow a fitted AFM model; reward
/// is supplied by the caller.
class AfmSimDomain final : public StoppingDomain {
 public:
  static inline const std::string kId = "afm_sim";
  AfmSimDomain(const FittedAfm& model, std::size_t horizon, const RewardModel& reward);

  const std::string& id() const override { return kId; }
  const SchemaPtr& schema() const override { return schema_; }
  std::size_t horizon() const override { return horizon_; }
  const RewardModel& reward() const override { return reward_; }
  std::unique_ptr<ObservationStream> open(std::uint64_t seed) const override;
  NamedValues describe() const override;

 private:
  FittedAfm model_;
  std::size_t horizon_;
  SchemaPtr schema_;
  const RewardModel& reward_;
};

enum class ModelFamily { Bkt, Afm };

struct ModelBasedConfig {
  ModelFamily family = ModelFamily::Bkt;
  std::vector<double> threshold_grid;  // empty = 0, 0.01, ..., 1
  std::size_t sim_trajectories = 2000;
  std::uint64_t seed = 0;
  EmConfig em{};
};

struct ModelBasedResult {
  PolicyPtr policy;
  std::vector<double> grid;
  std::vector<double> grid_scores;  // simulated value of each threshold
  std::uint64_t simulation_seed = 0;
  BktParams bkt{};
  FittedAfm afm{};
};

/// Fits the chosen model family to the pool, simulates sim_trajectories
/// students from the fit (one shared set for every threshold), scores each
/// grid threshold with the fitted model's own tutoring reward and returns
/// the best threshold policy built on the fitted parameters. EM restarts
/// use cfg.em.seed; simulation uses split_seed(cfg.seed, 0x51).
ModelBasedResult model_based_policy(const TrajectoryPool& pool, const BktDomain& domain,
                                    const ModelBasedConfig& cfg);

std::vector<double> default_threshold_grid();

}  // namespace gfse
