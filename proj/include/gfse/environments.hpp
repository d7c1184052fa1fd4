#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "gfse/bkt_filter.hpp"
#include "gfse/core.hpp"
#include "gfse/evaluation.hpp"

namespace gfse {

// ====================================================================== tutoring

struct BktDomainConfig {
  BktParams params{};
  std::size_t horizon = 20;
  double posttest_penalty = 20.0;  // kappa
  double problem_cost = 1.0;
};

/// Cost of tutoring: every delivered problem costs `problem_cost`, and on
/// halting at step t the student's expected posttest error is charged at
/// `posttest_penalty`. The posttest success probability is the true
/// model's prediction for response t given responses 1..t-1.
class TutoringReward final : public RewardModel {
 public:
  explicit TutoringReward(const BktDomainConfig& cfg) : cfg_(cfg) {}
  double v_max() const override;
  double return_of(const Prefix& halted) const override;

 private:
  BktDomainConfig cfg_;
};

/// Students simulated by a two-state BKT hidden Markov model.
class BktDomain final : public StoppingDomain {
 public:
  static inline const std::string kId = "bkt";

  explicit BktDomain(const BktDomainConfig& cfg);

  const std::string& id() const override { return kId; }
  const SchemaPtr& schema() const override { return schema_; }
  std::size_t horizon() const override { return cfg_.horizon; }
  const RewardModel& reward() const override { return reward_; }
  std::unique_ptr<ObservationStream> open(std::uint64_t seed) const override;
  NamedValues describe() const override;

  const BktDomainConfig& config() const noexcept { return cfg_; }

  struct LatentSample {
    Trajectory trajectory;
    std::vector<bool> mastered;  // latent state at each step
  };
  /// Same trajectory as sample(seed), plus the hidden mastery states.
  LatentSample sample_with_latent(std::uint64_t seed) const;

 private:
  BktDomainConfig cfg_;
  SchemaPtr schema_;
  TutoringReward reward_;
};

// ====================================================================== asset

/// Surrogate depreciating-asset model: value starts at x_max and falls by a
/// zero-truncated Gaussian amount each step; d-1 noisy signals of the value
/// are emitted alongside it.
struct AssetDomainConfig {
  std::size_t dim = 3;  // observation dimension d
  double x_max = 100.0;
  double depreciation_mean = 5.0;
  double depreciation_std = 2.0;
  double signal_noise_std = 5.0;
  double utility_per_step = 10.0;
  double replacement_cost_base = 50.0;
  double replacement_growth = 0.1;
  double worthless_penalty = 100.0;
  std::size_t horizon = 30;
};

/// Return for replacing at step t:
///   sum_{s<=t} utility_per_step * X_s / x_max
///   - replacement_cost_base * (1 + replacement_growth * t)
///   - worthless_penalty * [X_t == 0]
class AssetReward final : public RewardModel {
 public:
  explicit AssetReward(const AssetDomainConfig& cfg) : cfg_(cfg) {}
  double v_max() const override;
  double return_of(const Prefix& halted) const override;

 private:
  AssetDomainConfig cfg_;
};

class AssetDomain final : public StoppingDomain {
 public:
  static inline const std::string kId = "asset";

  explicit AssetDomain(const AssetDomainConfig& cfg);

  const std::string& id() const override { return kId; }
  const SchemaPtr& schema() const override { return schema_; }
  std::size_t horizon() const override { return cfg_.horizon; }
  const RewardModel& reward() const override { return reward_; }
  std::unique_ptr<ObservationStream> open(std::uint64_t seed) const override;
  NamedValues describe() const override;

  const AssetDomainConfig& config() const noexcept { return cfg_; }
  /// Mean of one depreciation step (the truncated Gaussian's mean).
  double expected_depreciation() const;

 private:
  AssetDomainConfig cfg_;
  SchemaPtr schema_;
  AssetReward reward_;
};

// ====================================================================== tickets

struct PriceSeries {
  std::string route;
  std::string departure_date;  // ISO-8601 date
  std::vector<double> days_to_depart;  // strictly decreasing
  std::vector<double> prices;          // > 0
};

struct PriceDataset {
  std::vector<PriceSeries> series;
  double max_price() const;
  double min_price() const;
  double max_days() const;
};

/// Parses `route,departure_date,days_to_depart,price` rows. Rows sharing a
/// (route, departure_date) key form one series in file order. An empty file
/// is an empty dataset.
PriceDataset read_price_csv(std::istream& in);
PriceDataset load_price_csv(const std::filesystem::path& path);
void write_price_csv(std::ostream& out, const PriceDataset& data);

SchemaPtr ticket_schema();

/// One trajectory per commencement point: a series of length T yields
/// suffixes of lengths T, T-1, ..., 1, each its own full trajectory with
/// horizon equal to its length. Suffixes shorter than min_length are dropped.
TrajectoryPool expand_commencements(const PriceDataset& data, std::size_t min_length = 30);

/// Synthetic fares. Each series has a base fare m0 (lognormal around
/// base_price) and mean path m0 * (1 + drift * s^drift_shape), s going from
/// 0 at the first quote to 1 at departure. Prices are the mean path times a
/// mean-one lognormal AR(1) factor that starts at 1, so the expected
/// final / initial ratio is 1 + drift.
struct SynthPriceConfig {
  std::size_t n_series = 150;
  std::size_t min_length = 40;
  std::size_t max_length = 60;
  double base_price = 300.0;
  double base_spread = 0.05;
  double volatility = 0.12;
  double reversion = 0.7;
  double drift = 0.6;
  double drift_shape = 3.0;
  std::string route = "SYN-RTE";

  void validate() const;
};

PriceDataset synth_prices(const SynthPriceConfig& cfg, std::uint64_t seed);

/// Return is minus the price paid at the halting step.
class TicketReward final : public RewardModel {
 public:
  explicit TicketReward(double max_price);
  double v_max() const override { return max_price_; }
  double return_of(const Prefix& halted) const override;

 private:
  double max_price_;
};

/// Replays recorded commencement trajectories; an episode's seed picks one
/// uniformly. Horizons vary per episode.
class TicketReplayDomain final : public StoppingDomain {
 public:
  static inline const std::string kId = "tickets";

  explicit TicketReplayDomain(TrajectoryPool pool);

  const std::string& id() const override { return kId; }
  const SchemaPtr& schema() const override { return pool_.schema(); }
  std::size_t horizon() const override { return pool_.horizon(); }
  const RewardModel& reward() const override { return reward_; }
  std::unique_ptr<ObservationStream> open(std::uint64_t seed) const override;
  NamedValues describe() const override;

  const TrajectoryPool& pool() const noexcept { return pool_; }

 private:
  TrajectoryPool pool_;
  TicketReward reward_;
};

/// Largest |price| in a ticket pool, used as its v_max.
double max_price(const TrajectoryPool& pool);

/// Best return available in hindsight on one trajectory (max over halting steps).
double hindsight_return(const Trajectory& trajectory, const RewardModel& reward);

/// Rebuilds a simulated domain ("bkt" or "asset") from describe() output.
DomainPtr make_domain(const std::string& id, const NamedValues& params);

}  // namespace gfse
