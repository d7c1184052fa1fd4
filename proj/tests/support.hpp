#pragma once

// Helpers shared by the unit tests and the acceptance binary: hand-built
// ticket trajectories and a four-step binary toy domain whose policy values
// are known exactly by enumeration.

#include <array>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gfse/core.hpp"
#include "gfse/environments.hpp"
#include "gfse/rng.hpp"

namespace gfse::testing {

inline Trajectory ticket_trajectory(const std::vector<double>& prices,
                                    const std::vector<double>& days, std::uint64_t seed = 0) {
  std::vector<double> rows;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    rows.push_back(prices[i]);
    rows.push_back(days[i]);
  }
  return Trajectory(ticket_schema(), rows, prices.size(), seed, "tickets");
}

/// Prices p with days n-1, ..., 0.
inline Trajectory ticket_countdown(const std::vector<double>& prices, std::uint64_t seed = 0) {
  std::vector<double> days;
  for (std::size_t i = 0; i < prices.size(); ++i) days.push_back(double(prices.size() - 1 - i));
  return ticket_trajectory(prices, days, seed);
}

// ------------------------------------------------------------------ toy domain

inline constexpr std::size_t kToyHorizon = 4;
inline constexpr double kToyFirstOne = 0.5;
inline constexpr double kToyStay = 0.7;

/// Return (2 * ones - t) / 4 for halting at step t; lies in [-1, 1].
class ToyReward final : public RewardModel {
 public:
  double v_max() const override { return 1.0; }
  double return_of(const Prefix& halted) const override {
    double ones = 0.0;
    for (std::size_t i = 0; i < halted.size(); ++i) ones += halted[i][0];
    return (2.0 * ones - double(halted.size())) / 4.0;
  }
};

/// Binary Markov chain: P(o1 = 1) = 0.5, each later bit repeats the
/// previous one with probability 0.7.
class ToyDomain final : public StoppingDomain {
 public:
  static inline const std::string kId = "toy";
  ToyDomain() : schema_(std::make_shared<FeatureSchema>(std::vector<std::string>{"bit"})) {}

  const std::string& id() const override { return kId; }
  const SchemaPtr& schema() const override { return schema_; }
  std::size_t horizon() const override { return kToyHorizon; }
  const RewardModel& reward() const override { return reward_; }
  NamedValues describe() const override { return {}; }

  std::unique_ptr<ObservationStream> open(std::uint64_t seed) const override {
    struct Stream final : ObservationStream {
      explicit Stream(std::uint64_t s) : rng(s) {}
      std::size_t horizon() const override { return kToyHorizon; }
      void next(std::span<double> out) override {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const int bit = first ? (u < kToyFirstOne) : (u < kToyStay ? prev : 1 - prev);
        first = false;
        prev = bit;
        out[0] = bit;
      }
      Rng rng;
      bool first = true;
      int prev = 0;
    };
    return std::make_unique<Stream>(seed);
  }

  /// Probability of one full bit sequence.
  static double probability(const std::array<int, kToyHorizon>& bits) {
    double p = bits[0] ? kToyFirstOne : 1.0 - kToyFirstOne;
    for (std::size_t i = 1; i < kToyHorizon; ++i) p *= bits[i] == bits[i - 1] ? kToyStay : 1.0 - kToyStay;
    return p;
  }

 private:
  SchemaPtr schema_;
  ToyReward reward_;
};

/// Halts once `target` has been seen `count` times or at step `deadline`.
class ToyPolicy final : public Policy {
 public:
  static inline const std::string kClassId = "toy_count";
  ToyPolicy(int target, int count, int deadline) : target_(target), count_(count), deadline_(deadline) {}

  const std::string& class_id() const override { return kClassId; }
  std::vector<double> theta() const override { return {double(target_), double(count_), double(deadline_)}; }
  NamedValues parameters() const override {
    return {{"target", double(target_)}, {"count", double(count_)}, {"deadline", double(deadline_)}};
  }
  std::vector<std::string> required_features() const override { return {"bit"}; }
  Action decide(const Prefix& prefix) const override {
    int seen = 0;
    for (std::size_t i = 0; i < prefix.size(); ++i) seen += int(prefix[i][0]) == target_;
    return seen >= count_ || int(prefix.size()) >= deadline_ ? Action::Halt : Action::Continue;
  }

 private:
  int target_;
  int count_;
  int deadline_;
};

/// All 32 toy policies.
inline std::vector<PolicyPtr> toy_policy_class() {
  std::vector<PolicyPtr> out;
  for (int target = 0; target <= 1; ++target)
    for (int count = 1; count <= 4; ++count)
      for (int deadline = 1; deadline <= 4; ++deadline)
        out.push_back(std::make_shared<ToyPolicy>(target, count, deadline));
  return out;
}

/// Exact value of a policy by enumerating all 16 observation sequences.
inline double toy_exact_value(const Policy& policy) {
  ToyDomain domain;
  double v = 0.0;
  for (int mask = 0; mask < 16; ++mask) {
    std::array<int, kToyHorizon> bits{};
    std::vector<double> rows;
    for (std::size_t i = 0; i < kToyHorizon; ++i) {
      bits[i] = (mask >> i) & 1;
      rows.push_back(bits[i]);
    }
    const Trajectory t(domain.schema(), rows, kToyHorizon, 0, ToyDomain::kId);
    v += ToyDomain::probability(bits) * simulate_return(policy, t, domain.reward());
  }
  return v;
}

}  // namespace gfse::testing
