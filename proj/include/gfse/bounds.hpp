#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace gfse {

struct EvalReport;

/// Inputs to the uniform-convergence trajectory count. `vc_dim` is the VC
/// dimension of the policy class viewed as maps from histories to actions;
/// `constant_c` is the multiplicative constant the asymptotic bound leaves
/// unspecified.
struct BoundInputs {
  double epsilon = 0.1;
  double delta = 0.05;
  double v_max = 1.0;
  unsigned vc_dim = 1;
  std::size_t horizon = 2;
  double constant_c = 1.0;

  /// Throws InvalidInput on out-of-range fields.
  void validate() const;
};

/// Number of full trajectories after which, with probability >= 1 - delta,
/// every policy's empirical value is within epsilon of its true value:
///
///   n = ceil(c * (v_max / epsilon)^2 * (d ln H + ln(1/delta)))
///
/// Natural logarithms; any other base folds into c.
std::uint64_t required_trajectories(const BoundInputs& in);

/// True iff the reports were computed from a pool at least as large as
/// required_trajectories(in). Throws InvalidInput if reports disagree on
/// their pool size.
bool certify_estimates(std::span<const EvalReport> reports, const BoundInputs& in);

/// Pool-size form used when there are no reports yet.
bool certify_pool_size(std::uint64_t n, const BoundInputs& in);

}  // namespace gfse
