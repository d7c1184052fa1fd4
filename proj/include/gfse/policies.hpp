#pragma once

// Concrete stopping-rule families for the ticket, tutoring and asset domains.
//
// Tutoring rules predict the response at step t from the responses before
// it, so when deciding on a prefix of length t they look at its first t-1
// observations. Ticket and asset rules look at the newest observation.

#include <iosfwd>
#include <string>
#include <vector>

#include "gfse/bkt_filter.hpp"
#include "gfse/core.hpp"
#include "gfse/policy_class.hpp"

namespace gfse {

namespace features {
inline constexpr const char* kPrice = "price";
inline constexpr const char* kDaysToDepart = "days_to_depart";
inline constexpr const char* kCorrect = "correct";
inline constexpr const char* kValue = "X";
}  // namespace features

/// wait while (price > theta0 and days_to_depart > theta1), otherwise buy.
class TicketSimplePolicy final : public Policy {
 public:
  static inline const std::string kClassId = "ticket_simple";

  TicketSimplePolicy(double theta0, double theta1);

  const std::string& class_id() const override { return kClassId; }
  std::vector<double> theta() const override { return {theta0_, theta1_}; }
  NamedValues parameters() const override;
  std::vector<std::string> required_features() const override;
  Action decide(const Prefix& prefix) const override;
  std::optional<std::size_t> first_halt(const Prefix& observations) const override;

  bool buys(double price, double days) const noexcept {
    return !(price > theta0_ && days > theta1_);
  }

 private:
  double theta0_, theta1_;
};

/// Banded price thresholds. With day boundaries b1 >= b2 >= b3 >= 0:
/// days > b1 uses p1, (b2, b1] uses p2, (b3, b2] uses p3, and at
/// days <= b3 the ticket is bought unconditionally.
class TicketComplexPolicy final : public Policy {
 public:
  static inline const std::string kClassId = "ticket_complex";

  /// Day boundaries may be given in any order; they are sorted descending.
  TicketComplexPolicy(double p1, double p2, double p3, double b1, double b2, double b3);

  const std::string& class_id() const override { return kClassId; }
  std::vector<double> theta() const override;
  NamedValues parameters() const override;
  std::vector<std::string> required_features() const override;
  Action decide(const Prefix& prefix) const override;
  std::optional<std::size_t> first_halt(const Prefix& observations) const override;

  bool buys(double price, double days) const noexcept;

 private:
  double p_[3];
  double b_[3];
};

/// Halts once the BKT-predicted probability of a correct next response,
/// under the policy's own model parameters, exceeds theta0.
class BktThresholdPolicy final : public Policy {
 public:
  static inline const std::string kClassId = "bkt_threshold";

  BktThresholdPolicy(const BktParams& model, double theta0);

  const std::string& class_id() const override { return kClassId; }
  std::vector<double> theta() const override;
  NamedValues parameters() const override;
  std::vector<std::string> required_features() const override;
  Action decide(const Prefix& prefix) const override;
  std::optional<std::size_t> first_halt(const Prefix& observations) const override;

  /// P(next response correct | history); the history may be empty.
  double predict_correct(const Prefix& history) const;
  /// Halt iff predict_correct(history) > theta0.
  Action decide_on_history(const Prefix& history) const;

  const BktParams& model() const noexcept { return model_; }
  double threshold() const noexcept { return theta0_; }

 private:
  BktParams model_;
  double theta0_;
};

/// Additive-factors rule: P(correct) = logistic(beta1 + beta2 * n_c), with
/// n_c the number of correct responses so far; halts when it exceeds theta0.
class AfmThresholdPolicy final : public Policy {
 public:
  static inline const std::string kClassId = "afm_threshold";

  AfmThresholdPolicy(double beta1, double beta2, double theta0);

  const std::string& class_id() const override { return kClassId; }
  std::vector<double> theta() const override { return {beta1_, beta2_, theta0_}; }
  NamedValues parameters() const override;
  std::vector<std::string> required_features() const override;
  Action decide(const Prefix& prefix) const override;
  std::optional<std::size_t> first_halt(const Prefix& observations) const override;

  double predict_correct(const Prefix& history) const;
  Action decide_on_history(const Prefix& history) const;

 private:
  double beta1_, beta2_, theta0_;
};

/// Replace when logistic(beta1 + beta2 * depr) > beta3, where
/// depr = (x_max - X) / x_max clamped to [0, 1] at the newest observation.
/// x_max is a property of the domain, not a searched parameter.
class AssetLogisticPolicy final : public Policy {
 public:
  static inline const std::string kClassId = "asset_logistic";

  AssetLogisticPolicy(double beta1, double beta2, double beta3, double x_max);

  const std::string& class_id() const override { return kClassId; }
  std::vector<double> theta() const override { return {beta1_, beta2_, beta3_}; }
  NamedValues parameters() const override;
  std::vector<std::string> required_features() const override;
  Action decide(const Prefix& prefix) const override;
  std::optional<std::size_t> first_halt(const Prefix& observations) const override;

  double depreciation(double value) const noexcept;
  /// Depreciation level at which the rule first fires when value only falls:
  /// 0 for rules that fire on a new asset, 1 for rules that never fire below
  /// full depreciation.
  double halting_depreciation() const noexcept;

 private:
  double beta1_, beta2_, beta3_, x_max_;
};

/// Halts on the first observation.
class AlwaysHaltPolicy final : public Policy {
 public:
  static inline const std::string kClassId = "always_halt";
  const std::string& class_id() const override { return kClassId; }
  std::vector<double> theta() const override { return {}; }
  NamedValues parameters() const override { return {}; }
  std::vector<std::string> required_features() const override { return {}; }
  Action decide(const Prefix&) const override { return Action::Halt; }
};

/// Never halts; stops only at the forced horizon.
class NeverHaltPolicy final : public Policy {
 public:
  static inline const std::string kClassId = "never_halt";
  const std::string& class_id() const override { return kClassId; }
  std::vector<double> theta() const override { return {}; }
  NamedValues parameters() const override { return {}; }
  std::vector<std::string> required_features() const override { return {}; }
  Action decide(const Prefix&) const override { return Action::Continue; }
  std::optional<std::size_t> first_halt(const Prefix&) const override { return std::nullopt; }
};

// Policy classes with their default search boxes.
PolicyClassPtr ticket_simple_class(double price_lo, double price_hi, double days_hi);
PolicyClassPtr ticket_complex_class(double price_lo, double price_hi, double days_hi);
PolicyClassPtr bkt_threshold_class(double prob_lo = 0.01, double prob_hi = 0.99);
PolicyClassPtr afm_threshold_class(ParamRange beta1 = {"beta1", -4.0, 4.0},
                                   ParamRange beta2 = {"beta2", -2.0, 2.0});
PolicyClassPtr asset_logistic_class(double x_max, ParamRange beta1 = {"beta1", -10.0, 10.0},
                                    ParamRange beta2 = {"beta2", -20.0, 20.0});

/// Rebuilds a policy from its class id and named parameters.
PolicyPtr make_policy(const std::string& class_id, const NamedValues& params);

/// Flat "key = value" record: a class_id line then one line per parameter.
/// Values are written in shortest round-trip form.
void write_policy(std::ostream& out, const Policy& policy);
PolicyPtr read_policy(std::istream& in);

}  // namespace gfse
