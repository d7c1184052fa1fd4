#include "gfse/model_based.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "gfse/errors.hpp"
#include "gfse/parallel.hpp"
#include "gfse/policies.hpp"
#include "gfse/rng.hpp"

namespace gfse {

namespace {

constexpr double kProbFloor = 1e-6;

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

using Responses = std::vector<std::vector<unsigned char>>;

Responses binary_responses(std::span<const Trajectory> pool) {
  Responses out;
  out.reserve(pool.size());
  for (const auto& t : pool) {
    const std::size_t col = t.schema()->index_of(features::kCorrect);
    const std::size_t width = t.schema()->size();
    std::vector<unsigned char> r(t.length());
    for (std::size_t i = 0; i < t.length(); ++i) {
      const double v = t.rows()[i * width + col];
      if (v != 0.0 && v != 1.0) throw SchemaError("responses must be 0 or 1");
      r[i] = v == 1.0;
    }
    out.push_back(std::move(r));
  }
  return out;
}

double emission(const BktParams& p, int state, bool correct) {
  const double pc = state == 1 ? 1.0 - p.p_slip : p.p_guess;
  return correct ? pc : 1.0 - pc;
}

struct Counts {
  double init_mastered = 0.0;
  double sequences = 0.0;
  double learn_num = 0.0;   // expected 0 -> 1 transitions
  double learn_den = 0.0;   // expected time in state 0 before a transition
  double guess_num = 0.0;   // expected correct responses in state 0
  double unmastered = 0.0;  // expected responses in state 0
  double slip_num = 0.0;    // expected wrong responses in state 1
  double mastered = 0.0;    // expected responses in state 1
  double log_likelihood = 0.0;
};

// Scaled forward-backward over one sequence; adds expected counts to `c`.
void accumulate(const BktParams& p, const std::vector<unsigned char>& obs, Counts& c) {
  const std::size_t n = obs.size();
  if (n == 0) return;
  std::vector<std::array<double, 2>> alpha(n), beta(n);
  std::vector<double> scale(n);
  const double a01 = p.p_learn;
  for (std::size_t t = 0; t < n; ++t) {
    std::array<double, 2> prior;
    if (t == 0) {
      prior = {1.0 - p.p_init, p.p_init};
    } else {
      prior = {alpha[t - 1][0] * (1.0 - a01), alpha[t - 1][0] * a01 + alpha[t - 1][1]};
    }
    alpha[t] = {prior[0] * emission(p, 0, obs[t]), prior[1] * emission(p, 1, obs[t])};
    scale[t] = alpha[t][0] + alpha[t][1];
    if (!(scale[t] > 0.0)) throw NumericError("BKT forward pass underflow");
    alpha[t][0] /= scale[t];
    alpha[t][1] /= scale[t];
    c.log_likelihood += std::log(scale[t]);
  }
  beta[n - 1] = {1.0, 1.0};
  for (std::size_t t = n - 1; t-- > 0;) {
    const double e0 = emission(p, 0, obs[t + 1]) * beta[t + 1][0];
    const double e1 = emission(p, 1, obs[t + 1]) * beta[t + 1][1];
    beta[t] = {((1.0 - a01) * e0 + a01 * e1) / scale[t + 1], e1 / scale[t + 1]};
  }
  for (std::size_t t = 0; t < n; ++t) {
    const double g0 = alpha[t][0] * beta[t][0];
    const double g1 = alpha[t][1] * beta[t][1];
    const double norm = g0 + g1;
    const double q0 = g0 / norm;
    const double q1 = g1 / norm;
    if (t == 0) c.init_mastered += q1;
    c.unmastered += q0;
    c.mastered += q1;
    if (obs[t]) c.guess_num += q0;
    else c.slip_num += q1;
    if (t + 1 < n) {
      const double xi01 =
          alpha[t][0] * a01 * emission(p, 1, obs[t + 1]) * beta[t + 1][1] / scale[t + 1];
      c.learn_num += xi01;
      c.learn_den += q0;
    }
  }
  c.sequences += 1.0;
}

Counts expected_counts(const BktParams& p, const Responses& data) {
  Counts c;
  for (const auto& r : data) accumulate(p, r, c);
  return c;
}

BktParams maximize(const Counts& c, const BktParams& previous) {
  auto ratio = [](double num, double den, double fallback) {
    return den > 0.0 ? num / den : fallback;
  };
  BktParams next;
  next.p_init = clamp_prob(ratio(c.init_mastered, c.sequences, previous.p_init));
  next.p_learn = clamp_prob(ratio(c.learn_num, c.learn_den, previous.p_learn));
  next.p_guess = clamp_prob(ratio(c.guess_num, c.unmastered, previous.p_guess));
  next.p_slip = clamp_prob(ratio(c.slip_num, c.mastered, previous.p_slip));
  return next;
}

FittedBkt run_em(BktParams start, const Responses& data, const EmConfig& cfg) {
  FittedBkt fit;
  fit.params = start;
  Counts c = expected_counts(start, data);
  fit.log_likelihood = c.log_likelihood;
  fit.trace.push_back(c.log_likelihood);
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    const BktParams next = maximize(c, fit.params);
    const Counts nc = expected_counts(next, data);
    // Clamping can cost a sliver of likelihood; keep the monotone path.
    if (nc.log_likelihood < fit.log_likelihood) break;
    const double gain = nc.log_likelihood - fit.log_likelihood;
    fit.params = next;
    fit.log_likelihood = nc.log_likelihood;
    fit.trace.push_back(nc.log_likelihood);
    c = nc;
    if (gain < cfg.tolerance) break;
  }
  return fit;
}

}  // namespace

double bkt_log_likelihood(const BktParams& params, std::span<const Trajectory> pool) {
  params.validate_open();
  return expected_counts(params, binary_responses(pool)).log_likelihood;
}

BktParams bkt_em_step(const BktParams& params, std::span<const Trajectory> pool) {
  params.validate_open();
  return maximize(expected_counts(params, binary_responses(pool)), params);
}

FittedBkt fit_bkt_mle(const TrajectoryPool& pool, const EmConfig& cfg) {
  if (pool.empty()) throw InvalidInput("cannot fit BKT to an empty pool");
  if (cfg.restarts < 1) throw InvalidInput("EM needs at least one restart");
  std::vector<Trajectory> trajs(pool.begin(), pool.end());
  const Responses data = binary_responses(trajs);

  std::vector<BktParams> starts(cfg.restarts);
  starts[0] = BktParams{0.5, 0.1, 0.2, 0.2};
  Rng rng(split_seed(cfg.seed, 0xB4));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 1; i < starts.size(); ++i) {
    starts[i] = BktParams{0.05 + 0.9 * u(rng), 0.02 + 0.5 * u(rng), 0.05 + 0.4 * u(rng),
                          0.05 + 0.4 * u(rng)};
  }
  std::vector<FittedBkt> fits(starts.size());
  parallel_for(starts.size(), 0, [&](std::size_t i) { fits[i] = run_em(starts[i], data, cfg); });

  std::size_t best = 0;
  for (std::size_t i = 1; i < fits.size(); ++i) {
    if (fits[i].log_likelihood > fits[best].log_likelihood) best = i;
  }
  return fits[best];
}

// ---------------------------------------------------------------- AFM

FittedAfm fit_afm(const TrajectoryPool& pool) {
  if (pool.empty()) throw InvalidInput("cannot fit AFM to an empty pool");
  std::vector<Trajectory> trajs(pool.begin(), pool.end());
  const Responses data = binary_responses(trajs);

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& r : data) {
    double nc = 0.0;
    for (unsigned char y : r) {
      xs.push_back(nc);
      ys.push_back(y);
      nc += y;
    }
  }
  if (xs.empty()) throw InvalidInput("cannot fit AFM without responses");

  // Newton's method on the ridge-penalized log-likelihood.
  constexpr double kRidge = 1e-4;
  double b1 = 0.0;
  double b2 = 0.0;
  for (int it = 0; it < 200; ++it) {
    double g1 = -kRidge * b1;
    double g2 = -kRidge * b2;
    double h11 = kRidge;
    double h12 = 0.0;
    double h22 = kRidge;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double p = logistic(b1 + b2 * xs[i]);
      const double r = ys[i] - p;
      const double w = p * (1.0 - p);
      g1 += r;
      g2 += r * xs[i];
      h11 += w;
      h12 += w * xs[i];
      h22 += w * xs[i] * xs[i];
    }
    const double det = h11 * h22 - h12 * h12;
    if (!(det > 0.0)) throw NumericError("AFM Hessian is singular");
    const double d1 = (h22 * g1 - h12 * g2) / det;
    const double d2 = (h11 * g2 - h12 * g1) / det;
    b1 += d1;
    b2 += d2;
    if (std::abs(d1) + std::abs(d2) < 1e-10) break;
  }
  FittedAfm fit{b1, b2, 0.0};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double p = logistic(b1 + b2 * xs[i]);
    fit.log_likelihood += ys[i] ? std::log(p) : std::log1p(-p);
  }
  return fit;
}

namespace {

class AfmStream final : public ObservationStream {
 public:
  AfmStream(const FittedAfm& m, std::size_t horizon, std::uint64_t seed)
      : m_(m), horizon_(horizon), rng_(seed) {}
  std::size_t horizon() const override { return horizon_; }
  void next(std::span<double> out) override {
    const bool correct = u_(rng_) < logistic(m_.beta1 + m_.beta2 * n_correct_);
    n_correct_ += correct;
    out[0] = correct ? 1.0 : 0.0;
  }

 private:
  FittedAfm m_;
  std::size_t horizon_;
  Rng rng_;
  std::uniform_real_distribution<double> u_{0.0, 1.0};
  double n_correct_ = 0.0;
};

}  // namespace

AfmSimDomain::AfmSimDomain(const FittedAfm& model, std::size_t horizon, const RewardModel& reward)
    : model_(model),
      horizon_(horizon),
      schema_(std::make_shared<FeatureSchema>(std::vector<std::string>{features::kCorrect})),
      reward_(reward) {
  if (horizon < 1) throw InvalidInput("horizon must be >= 1");
}

std::unique_ptr<ObservationStream> AfmSimDomain::open(std::uint64_t seed) const {
  return std::make_unique<AfmStream>(model_, horizon_, seed);
}

NamedValues AfmSimDomain::describe() const {
  return {{"beta1", model_.beta1},
          {"beta2", model_.beta2},
          {"horizon", static_cast<double>(horizon_)}};
}

// ---------------------------------------------------------------- selection

std::vector<double> default_threshold_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 100; ++i) g.push_back(i / 100.0);
  return g;
}

double AfmTutoringReward::v_max() const {
  return cost_.problem_cost * static_cast<double>(cost_.horizon) + cost_.posttest_penalty;
}

double AfmTutoringReward::return_of(const Prefix& halted) const {
  if (halted.empty()) throw InvalidInput("tutoring return needs at least one step");
  const auto ic = halted.schema().index_of(features::kCorrect);
  double n_correct = 0.0;
  for (std::size_t i = 0; i + 1 < halted.size(); ++i) n_correct += halted[i][ic] == 1.0 ? 1.0 : 0.0;
  const double p = 1.0 / (1.0 + std::exp(-(model_.beta1 + model_.beta2 * n_correct)));
  const double t = static_cast<double>(halted.size());
  return -(cost_.problem_cost * t + cost_.posttest_penalty * (1.0 - p));
}

ModelBasedResult model_based_policy(const TrajectoryPool& pool, const BktDomain& domain,
                                    const ModelBasedConfig& cfg) {
  if (cfg.sim_trajectories < 1) throw InvalidInput("sim_trajectories must be >= 1");
  ModelBasedResult r;
  r.grid = cfg.threshold_grid.empty() ? default_threshold_grid() : cfg.threshold_grid;
  r.simulation_seed = split_seed(cfg.seed, 0x51);

  std::vector<PolicyPtr> candidates;
  candidates.reserve(r.grid.size());
  // The posttest term depends on the student's latent knowledge, so the
  // fitted model supplies it as well as the dynamics.
  std::unique_ptr<StoppingDomain> model;
  std::unique_ptr<AfmTutoringReward> afm_reward;
  if (cfg.family == ModelFamily::Bkt) {
    r.bkt = fit_bkt_mle(pool, cfg.em).params;
    BktDomainConfig fitted = domain.config();
    fitted.params = r.bkt;
    model = std::make_unique<BktDomain>(fitted);
    for (double th : r.grid) candidates.push_back(std::make_shared<BktThresholdPolicy>(r.bkt, th));
  } else {
    r.afm = fit_afm(pool);
    afm_reward = std::make_unique<AfmTutoringReward>(r.afm, domain.config());
    model = std::make_unique<AfmSimDomain>(r.afm, domain.horizon(), *afm_reward);
    for (double th : r.grid) {
      candidates.push_back(std::make_shared<AfmThresholdPolicy>(r.afm.beta1, r.afm.beta2, th));
    }
  }

  const auto simulated = gather_full(*model, cfg.sim_trajectories, r.simulation_seed);
  const auto reports = evaluate_batch(candidates, simulated, model->reward());
  r.grid_scores.reserve(reports.size());
  for (const auto& rep : reports) r.grid_scores.push_back(rep.estimate);
  r.policy = candidates[argmax_estimate(reports)];
  return r;
}

}  // namespace gfse
