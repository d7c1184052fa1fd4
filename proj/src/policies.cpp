#include "gfse/policies.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <map>
#include <ostream>

#include "gfse/errors.hpp"
#include "gfse/text.hpp"

namespace gfse {

namespace {

double binary_response(const ObservationView& o, std::size_t idx) {
  const double v = o[idx];
  if (v != 0.0 && v != 1.0) throw SchemaError("correctness observation must be 0 or 1");
  return v;
}

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput(std::string(what) + " must lie in [0, 1]");
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw InvalidInput(std::string(what) + " must be finite");
}

}  // namespace

// ---------------------------------------------------------------- tickets

TicketSimplePolicy::TicketSimplePolicy(double theta0, double theta1)
    : theta0_(theta0), theta1_(theta1) {
  if (!(theta0 >= 0.0) || !std::isfinite(theta0)) throw InvalidInput("theta0 must be >= 0");
  if (!(theta1 >= 0.0) || !std::isfinite(theta1)) throw InvalidInput("theta1 must be >= 0");
}

NamedValues TicketSimplePolicy::parameters() const { return {{"theta0", theta0_}, {"theta1", theta1_}}; }

std::vector<std::string> TicketSimplePolicy::required_features() const {
  return {features::kPrice, features::kDaysToDepart};
}

Action TicketSimplePolicy::decide(const Prefix& prefix) const {
  const auto o = prefix.back();
  return buys(o.get(features::kPrice), o.get(features::kDaysToDepart)) ? Action::Halt
                                                                         : Action::Continue;
}

std::optional<std::size_t> TicketSimplePolicy::first_halt(const Prefix& obs) const {
  const auto ip = obs.schema().index_of(features::kPrice);
  const auto id = obs.schema().index_of(features::kDaysToDepart);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto o = obs[i];
    if (buys(o[ip], o[id])) return i + 1;
  }
  return std::nullopt;
}

TicketComplexPolicy::TicketComplexPolicy(double p1, double p2, double p3, double b1, double b2,
                                         double b3)
    : p_{p1, p2, p3}, b_{b1, b2, b3} {
  for (double p : p_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidInput("price thresholds must be >= 0");
  }
  for (double b : b_) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw InvalidInput("day boundaries must be >= 0");
  }
  std::sort(std::begin(b_), std::end(b_), std::greater<>());
}

std::vector<double> TicketComplexPolicy::theta() const {
  return {p_[0], p_[1], p_[2], b_[0], b_[1], b_[2]};
}

NamedValues TicketComplexPolicy::parameters() const {
  return {{"p1", p_[0]}, {"p2", p_[1]}, {"p3", p_[2]}, {"b1", b_[0]}, {"b2", b_[1]}, {"b3", b_[2]}};
}

std::vector<std::string> TicketComplexPolicy::required_features() const {
  return {features::kPrice, features::kDaysToDepart};
}

bool TicketComplexPolicy::buys(double price, double days) const noexcept {
  if (days <= b_[2]) return true;
  const double threshold = days > b_[0] ? p_[0] : days > b_[1] ? p_[1] : p_[2];
  return price <= threshold;
}

Action TicketComplexPolicy::decide(const Prefix& prefix) const {
  const auto o = prefix.back();
  return buys(o.get(features::kPrice), o.get(features::kDaysToDepart)) ? Action::Halt
                                                                         : Action::Continue;
}

std::optional<std::size_t> TicketComplexPolicy::first_halt(const Prefix& obs) const {
  const auto ip = obs.schema().index_of(features::kPrice);
  const auto id = obs.schema().index_of(features::kDaysToDepart);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const auto o = obs[i];
    if (buys(o[ip], o[id])) return i + 1;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- tutoring

BktThresholdPolicy::BktThresholdPolicy(const BktParams& model, double theta0)
    : model_(model), theta0_(theta0) {
  model_.validate_closed();
  require_probability(theta0, "theta0");
}

std::vector<double> BktThresholdPolicy::theta() const {
  return {model_.p_init, model_.p_learn, model_.p_guess, model_.p_slip, theta0_};
}

NamedValues BktThresholdPolicy::parameters() const {
  return {{"p_init", model_.p_init},
          {"p_learn", model_.p_learn},
          {"p_guess", model_.p_guess},
          {"p_slip", model_.p_slip},
          {"theta0", theta0_}};
}

std::vector<std::string> BktThresholdPolicy::required_features() const { return {features::kCorrect}; }

double BktThresholdPolicy::predict_correct(const Prefix& history) const {
  const auto ic = history.schema().index_of(features::kCorrect);
  BktFilter f(model_);
  for (std::size_t i = 0; i < history.size(); ++i) f.observe(binary_response(history[i], ic) == 1.0);
  return f.predict_correct();
}

Action BktThresholdPolicy::decide_on_history(const Prefix& history) const {
  return predict_correct(history) > theta0_ ? Action::Halt : Action::Continue;
}

Action BktThresholdPolicy::decide(const Prefix& prefix) const {
  if (prefix.empty()) throw InvalidInput("decide on an empty prefix");
  return decide_on_history(prefix.first(prefix.size() - 1));
}

std::optional<std::size_t> BktThresholdPolicy::first_halt(const Prefix& obs) const {
  const auto ic = obs.schema().index_of(features::kCorrect);
  BktFilter f(model_);
  for (std::size_t t = 1; t <= obs.size(); ++t) {
    if (f.predict_correct() > theta0_) return t;
    f.observe(binary_response(obs[t - 1], ic) == 1.0);
  }
  return std::nullopt;
}

AfmThresholdPolicy::AfmThresholdPolicy(double beta1, double beta2, double theta0)
    : beta1_(beta1), beta2_(beta2), theta0_(theta0) {
  require_finite(beta1, "beta1");
  require_finite(beta2, "beta2");
  require_probability(theta0, "theta0");
}

NamedValues AfmThresholdPolicy::parameters() const {
  return {{"beta1", beta1_}, {"beta2", beta2_}, {"theta0", theta0_}};
}

std::vector<std::string> AfmThresholdPolicy::required_features() const { return {features::kCorrect}; }

double AfmThresholdPolicy::predict_correct(const Prefix& history) const {
  const auto ic = history.schema().index_of(features::kCorrect);
  double n_correct = 0.0;
  for (std::size_t i = 0; i < history.size(); ++i) n_correct += binary_response(history[i], ic);
  return logistic(beta1_ + beta2_ * n_correct);
}

Action AfmThresholdPolicy::decide_on_history(const Prefix& history) const {
  return predict_correct(history) > theta0_ ? Action::Halt : Action::Continue;
}

Action AfmThresholdPolicy::decide(const Prefix& prefix) const {
  if (prefix.empty()) throw InvalidInput("decide on an empty prefix");
  return decide_on_history(prefix.first(prefix.size() - 1));
}

std::optional<std::size_t> AfmThresholdPolicy::first_halt(const Prefix& obs) const {
  const auto ic = obs.schema().index_of(features::kCorrect);
  double n_correct = 0.0;
  for (std::size_t t = 1; t <= obs.size(); ++t) {
    if (logistic(beta1_ + beta2_ * n_correct) > theta0_) return t;
    n_correct += binary_response(obs[t - 1], ic);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- asset

AssetLogisticPolicy::AssetLogisticPolicy(double beta1, double beta2, double beta3, double x_max)
    : beta1_(beta1), beta2_(beta2), beta3_(beta3), x_max_(x_max) {
  require_finite(beta1, "beta1");
  require_finite(beta2, "beta2");
  require_probability(beta3, "beta3");
  if (!(x_max > 0.0) || !std::isfinite(x_max)) throw InvalidInput("x_max must be > 0");
}

NamedValues AssetLogisticPolicy::parameters() const {
  return {{"beta1", beta1_}, {"beta2", beta2_}, {"beta3", beta3_}, {"x_max", x_max_}};
}

std::vector<std::string> AssetLogisticPolicy::required_features() const { return {features::kValue}; }

double AssetLogisticPolicy::depreciation(double value) const noexcept {
  return std::clamp((x_max_ - value) / x_max_, 0.0, 1.0);
}

Action AssetLogisticPolicy::decide(const Prefix& prefix) const {
  const double depr = depreciation(prefix.back().get(features::kValue));
  return logistic(beta1_ + beta2_ * depr) > beta3_ ? Action::Halt : Action::Continue;
}

std::optional<std::size_t> AssetLogisticPolicy::first_halt(const Prefix& obs) const {
  const auto ix = obs.schema().index_of(features::kValue);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (logistic(beta1_ + beta2_ * depreciation(obs[i][ix])) > beta3_) return i + 1;
  }
  return std::nullopt;
}

double AssetLogisticPolicy::halting_depreciation() const noexcept {
  if (logistic(beta1_) > beta3_) return 0.0;
  if (beta2_ <= 0.0 || beta3_ >= 1.0) return 1.0;
  const double crossing = (logit(beta3_) - beta1_) / beta2_;
  return std::clamp(crossing, 0.0, 1.0);
}

// ---------------------------------------------------------------- classes

PolicyClassPtr ticket_simple_class(double price_lo, double price_hi, double days_hi) {
  return std::make_shared<PolicyClass>(
      TicketSimplePolicy::kClassId,
      std::vector<ParamRange>{{"theta0", price_lo, price_hi}, {"theta1", 0.0, days_hi}}, 3,
      [](std::span<const double> t) { return std::make_shared<TicketSimplePolicy>(t[0], t[1]); });
}

PolicyClassPtr ticket_complex_class(double price_lo, double price_hi, double days_hi) {
  return std::make_shared<PolicyClass>(
      TicketComplexPolicy::kClassId,
      std::vector<ParamRange>{{"p1", price_lo, price_hi},
                              {"p2", price_lo, price_hi},
                              {"p3", price_lo, price_hi},
                              {"b1", 0.0, days_hi},
                              {"b2", 0.0, days_hi},
                              {"b3", 0.0, days_hi}},
      7, [](std::span<const double> t) {
        return std::make_shared<TicketComplexPolicy>(t[0], t[1], t[2], t[3], t[4], t[5]);
      });
}

PolicyClassPtr bkt_threshold_class(double prob_lo, double prob_hi) {
  return std::make_shared<PolicyClass>(
      BktThresholdPolicy::kClassId,
      std::vector<ParamRange>{{"p_init", prob_lo, prob_hi},
                              {"p_learn", prob_lo, prob_hi},
                              {"p_guess", prob_lo, prob_hi},
                              {"p_slip", prob_lo, prob_hi},
                              {"theta0", 0.0, 1.0}},
      6, [](std::span<const double> t) {
        return std::make_shared<BktThresholdPolicy>(BktParams{t[0], t[1], t[2], t[3]}, t[4]);
      });
}

PolicyClassPtr afm_threshold_class(ParamRange beta1, ParamRange beta2) {
  beta1.name = "beta1";
  beta2.name = "beta2";
  return std::make_shared<PolicyClass>(
      AfmThresholdPolicy::kClassId,
      std::vector<ParamRange>{beta1, beta2, {"theta0", 0.0, 1.0}}, 4,
      [](std::span<const double> t) { return std::make_shared<AfmThresholdPolicy>(t[0], t[1], t[2]); });
}

PolicyClassPtr asset_logistic_class(double x_max, ParamRange beta1, ParamRange beta2) {
  beta1.name = "beta1";
  beta2.name = "beta2";
  return std::make_shared<PolicyClass>(
      AssetLogisticPolicy::kClassId, std::vector<ParamRange>{beta1, beta2, {"beta3", 0.0, 1.0}}, 4,
      [x_max](std::span<const double> t) {
        return std::make_shared<AssetLogisticPolicy>(t[0], t[1], t[2], x_max);
      });
}

// ---------------------------------------------------------------- records

namespace {

double take(const std::map<std::string, double>& kv, const char* key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw ValidationError(std::string("policy record is missing '") + key + "'");
  return it->second;
}

}  // namespace

PolicyPtr make_policy(const std::string& class_id, const NamedValues& params) {
  std::map<std::string, double> kv(params.begin(), params.end());
  if (class_id == TicketSimplePolicy::kClassId) {
    return std::make_shared<TicketSimplePolicy>(take(kv, "theta0"), take(kv, "theta1"));
  }
  if (class_id == TicketComplexPolicy::kClassId) {
    return std::make_shared<TicketComplexPolicy>(take(kv, "p1"), take(kv, "p2"), take(kv, "p3"),
                                                 take(kv, "b1"), take(kv, "b2"), take(kv, "b3"));
  }
  if (class_id == BktThresholdPolicy::kClassId) {
    return std::make_shared<BktThresholdPolicy>(
        BktParams{take(kv, "p_init"), take(kv, "p_learn"), take(kv, "p_guess"), take(kv, "p_slip")},
        take(kv, "theta0"));
  }
  if (class_id == AfmThresholdPolicy::kClassId) {
    return std::make_shared<AfmThresholdPolicy>(take(kv, "beta1"), take(kv, "beta2"),
                                                take(kv, "theta0"));
  }
  if (class_id == AssetLogisticPolicy::kClassId) {
    return std::make_shared<AssetLogisticPolicy>(take(kv, "beta1"), take(kv, "beta2"),
                                                 take(kv, "beta3"), take(kv, "x_max"));
  }
  if (class_id == AlwaysHaltPolicy::kClassId) return std::make_shared<AlwaysHaltPolicy>();
  if (class_id == NeverHaltPolicy::kClassId) return std::make_shared<NeverHaltPolicy>();
  throw ValidationError("unknown policy class '" + class_id + "'");
}

void write_policy(std::ostream& out, const Policy& policy) {
  out << "class_id = " << policy.class_id() << '\n';
  for (const auto& [k, v] : policy.parameters()) out << k << " = " << format_double(v) << '\n';
}

PolicyPtr read_policy(std::istream& in) {
  std::string class_id;
  NamedValues params;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (key == "class_id") {
      class_id = std::string(value);
    } else {
      params.emplace_back(key, parse_double(value, line_no));
    }
  }
  if (class_id.empty()) throw ParseError("policy record has no class_id", 0);
  return make_policy(class_id, params);
}

}  // namespace gfse
