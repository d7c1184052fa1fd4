#pragma once

#include <cmath>

namespace gfse {

/// Bayesian Knowledge Tracing parameters: prior mastery, learn rate,
/// guess and slip probabilities.
struct BktParams {
  double p_init = 0.18;
  double p_learn = 0.2;
  double p_guess = 0.2;
  double p_slip = 0.1;

  /// Throws InvalidInput unless every probability lies in [0, 1].
  void validate_closed() const;
  /// Throws InvalidInput unless every probability lies in (0, 1).
  void validate_open() const;
};

/// Forward filter over the two-state (unmastered / mastered) chain, where
/// mastery is absorbing. Holds P(mastered) before the next response.
class BktFilter {
 public:
  explicit BktFilter(const BktParams& p) : p_(p), mastered_(p.p_init) {}

  double p_mastered() const noexcept { return mastered_; }

  double predict_correct() const noexcept {
    return mastered_ * (1.0 - p_.p_slip) + (1.0 - mastered_) * p_.p_guess;
  }

  /// Bayes update on a response, then the learning transition.
  void observe(bool correct) noexcept {
    const double like_m = correct ? 1.0 - p_.p_slip : p_.p_slip;
    const double like_u = correct ? p_.p_guess : 1.0 - p_.p_guess;
    const double num = mastered_ * like_m;
    const double den = num + (1.0 - mastered_) * like_u;
    // den == 0 only for a response the model says is impossible; keep the prior.
    const double post = den > 0.0 ? num / den : mastered_;
    mastered_ = post + (1.0 - post) * p_.p_learn;
  }

 private:
  BktParams p_;
  double mastered_;
};

inline double logistic(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }

inline double logit(double p) noexcept { return std::log(p / (1.0 - p)); }

}  // namespace gfse
