#include "gfse/bounds.hpp"

#include <cmath>
#include <limits>

#include "gfse/errors.hpp"
#include "gfse/evaluation.hpp"

namespace gfse {

void BoundInputs::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidInput("epsilon must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("delta must lie in (0, 1)");
  if (!(v_max > 0.0) || !std::isfinite(v_max)) throw InvalidInput("v_max must be > 0");
  if (vc_dim < 1) throw InvalidInput("VC dimension must be a positive integer");
  if (horizon < 2) throw InvalidInput("horizon must be at least 2");
  if (!(constant_c > 0.0) || !std::isfinite(constant_c)) throw InvalidInput("constant must be > 0");
}

std::uint64_t required_trajectories(const BoundInputs& in) {
  in.validate();
  const double scale = (in.v_max / in.epsilon) * (in.v_max / in.epsilon);
  const double capacity = static_cast<double>(in.vc_dim) * std::log(static_cast<double>(in.horizon)) +
                          std::log(1.0 / in.delta);
  const double n = std::ceil(in.constant_c * scale * capacity);
  if (!(n < static_cast<double>(std::numeric_limits<std::uint64_t>::max()))) {
    throw InvalidInput("required trajectory count overflows");
  }
  return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

bool certify_pool_size(std::uint64_t n, const BoundInputs& in) {
  return n >= required_trajectories(in);
}

bool certify_estimates(std::span<const EvalReport> reports, const BoundInputs& in) {
  const std::uint64_t needed = required_trajectories(in);
  if (reports.empty()) return false;
  const std::size_t n = reports.front().n_used;
  for (const auto& r : reports) {
    if (r.n_used != n) throw InvalidInput("reports come from trajectory sets of different sizes");
  }
  return n >= needed;
}

}  // namespace gfse
