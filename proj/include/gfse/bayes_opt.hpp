#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gfse/core.hpp"
#include "gfse/policy_class.hpp"
#include "gfse/rng.hpp"

namespace gfse {

/// Squared-exponential ARD kernel hyperparameters, stored as logs.
struct GpHyper {
  Eigen::VectorXd log_length;  // one per input dimension
  double log_signal_var = 0.0;
  double log_noise_var = std::log(0.1);

  static GpHyper defaults(std::size_t dim);
};

/// Box for hyperparameter search (natural scale, not logs).
struct GpBounds {
  double length_lo = 0.03;
  double length_hi = 3.0;
  double signal_lo = 0.05;
  double signal_hi = 20.0;
  double noise_lo = 1e-6;
  double noise_hi = 2.0;
};

/// Zero-mean GP regression. Inputs are rows of x. The kernel matrix is
/// factorized once; if it is not positive definite, diagonal jitter grows
/// by factors of 10 up to 1e-2 of the signal variance, then NumericError.
class GaussianProcess {
 public:
  GaussianProcess(Eigen::MatrixXd x, Eigen::VectorXd y, GpHyper hyper);

  struct Prediction {
    double mean;
    double variance;  // latent function variance, >= 0
  };
  Prediction predict(const Eigen::VectorXd& x) const;

  double log_marginal_likelihood() const;
  /// Gradient with respect to (log_length..., log_signal_var, log_noise_var).
  Eigen::VectorXd lml_gradient() const;

  const GpHyper& hyper() const noexcept { return hyper_; }
  double jitter() const noexcept { return jitter_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(x_.rows()); }

 private:
  double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  GpHyper hyper_;
  Eigen::VectorXd inv_len2_;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
};

/// Maximizes the log marginal likelihood inside the bounds by projected
/// gradient ascent with backtracking, starting from `start` and from the
/// defaults; returns the better end point.
GpHyper fit_hyperparameters(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const GpHyper& start, const GpBounds& bounds = {},
                            int iterations = 100);

/// E[max(f - incumbent, 0)] for f ~ N(mean, sd^2). Never negative.
double expected_improvement(double mean, double sd, double incumbent);

struct BoConfig {
  std::uint64_t seed = 0;
  std::size_t refit_every = 5;
  std::size_t initial_random = 1;
  std::size_t ei_random_points = 512;
  std::size_t ei_local_starts = 4;
  std::size_t ei_local_iterations = 40;
  GpBounds bounds{};

  void validate() const;
};

/// Sequential maximizer over [0,1]^dim. Observed values are standardized
/// before fitting; the incumbent is the observed point with the highest
/// posterior mean.
class BayesOptimizer {
 public:
  BayesOptimizer(std::size_t dim, BoConfig cfg);

  std::vector<double> propose();
  void observe(std::span<const double> x, double y);

  std::size_t size() const noexcept { return ys_.size(); }
  std::size_t dimension() const noexcept { return dim_; }
  /// Observed point with the highest posterior mean. Requires size() >= 1.
  std::vector<double> incumbent() const;
  /// EI under the current model; requires size() >= 1.
  double expected_improvement_at(std::span<const double> x) const;
  const GaussianProcess& model() const;

 private:
  void refresh();
  double ei(const Eigen::VectorXd& x) const;

  std::size_t dim_;
  BoConfig cfg_;
  Rng rng_;
  std::vector<Eigen::VectorXd> xs_;
  std::vector<double> ys_;
  GpHyper hyper_;
  std::size_t fitted_at_ = 0;
  std::optional<GaussianProcess> gp_;
  double incumbent_value_ = 0.0;
  std::size_t incumbent_index_ = 0;
};

struct BoRun {
  std::vector<double> returns;          // fresh on-policy return per episode
  std::vector<double> observed_values;  // value handed to the surrogate
  std::vector<double> cumulative_mean;
  std::vector<std::vector<double>> thetas;
  PolicyPtr best_policy;
};

/// GP-EI policy search: every episode proposes a parameter vector, runs it
/// once on-policy and feeds the return to the surrogate. Episode e uses
/// split_seed(split_seed(cfg.seed, 1), e - 1), matching the GFSE runners.
BoRun bo_search(const StoppingDomain& domain, const PolicyClass& cls, std::size_t total_episodes,
                const BoConfig& cfg);

/// As bo_search, but each proposal's value is the mean of its fresh return
/// and its simulated returns on every stored trajectory it is valid for.
/// Stored trajectories start with `initial` and grow by each episode.
BoRun bo_re_search(const StoppingDomain& domain, const PolicyClass& cls,
                   std::size_t total_episodes, const BoConfig& cfg,
                   std::span<const Trajectory> initial = {});

}  // namespace gfse
