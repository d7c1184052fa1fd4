#include "gfse/bayes_opt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "gfse/errors.hpp"
#include "gfse/evaluation.hpp"
#include "gfse/search.hpp"

namespace gfse {

GpHyper GpHyper::defaults(std::size_t dim) {
  GpHyper h;
  h.log_length = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), std::log(0.3));
  h.log_signal_var = 0.0;
  h.log_noise_var = std::log(0.1);
  return h;
}

GaussianProcess::GaussianProcess(Eigen::MatrixXd x, Eigen::VectorXd y, GpHyper hyper)
    : x_(std::move(x)), y_(std::move(y)), hyper_(std::move(hyper)) {
  const auto n = x_.rows();
  if (n < 1 || y_.size() != n) throw InvalidInput("GP needs matching, nonempty x and y");
  if (hyper_.log_length.size() != x_.cols()) throw InvalidInput("GP length-scale arity mismatch");
  inv_len2_ = (-2.0 * hyper_.log_length.array()).exp().matrix();

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) k(i, j) = k(j, i) = kernel(x_.row(i), x_.row(j));
  }
  k.diagonal().array() += std::exp(hyper_.log_noise_var);

  const double signal = std::exp(hyper_.log_signal_var);
  for (double jitter = 0.0;;) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    chol_.compute(kj);
    // Eigen reports success on NaN input, so also require a finite factor.
    if (chol_.info() == Eigen::Success && chol_.matrixLLT().allFinite()) {
      jitter_ = jitter;
      break;
    }
    jitter = jitter == 0.0 ? 1e-10 * signal : jitter * 10.0;
    if (jitter > 1e-2 * signal) {
      std::ostringstream msg;
      msg << "GP kernel matrix not positive definite after jitter (n=" << n
          << ", log_signal_var=" << hyper_.log_signal_var
          << ", log_noise_var=" << hyper_.log_noise_var << ")";
      throw NumericError(msg.str());
    }
  }
  alpha_ = chol_.solve(y_);
}

double GaussianProcess::kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  const double r2 = ((a - b).array().square() * inv_len2_.array()).sum();
  return std::exp(hyper_.log_signal_var - 0.5 * r2);
}

GaussianProcess::Prediction GaussianProcess::predict(const Eigen::VectorXd& x) const {
  Eigen::VectorXd ks(x_.rows());
  for (Eigen::Index i = 0; i < x_.rows(); ++i) ks(i) = kernel(x, x_.row(i));
  const double mean = ks.dot(alpha_);
  const Eigen::VectorXd v = chol_.matrixL().solve(ks);
  const double var = std::exp(hyper_.log_signal_var) - v.squaredNorm();
  return {mean, std::max(var, 0.0)};
}

double GaussianProcess::log_marginal_likelihood() const {
  const double logdet = 2.0 * chol_.matrixLLT().diagonal().array().log().sum();
  const double n = static_cast<double>(y_.size());
  return -0.5 * y_.dot(alpha_) - 0.5 * logdet - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

Eigen::VectorXd GaussianProcess::lml_gradient() const {
  const auto n = x_.rows();
  const auto d = x_.cols();
  const Eigen::MatrixXd kinv = chol_.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd w = alpha_ * alpha_.transpose() - kinv;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d + 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double kf = kernel(x_.row(i), x_.row(j));
      for (Eigen::Index c = 0; c < d; ++c) {
        const double diff = x_(i, c) - x_(j, c);
        g(c) += 0.5 * w(i, j) * kf * diff * diff * inv_len2_(c);
      }
      g(d) += 0.5 * w(i, j) * kf;
    }
  }
  g(d + 1) = 0.5 * std::exp(hyper_.log_noise_var) * w.trace();
  return g;
}

namespace {

Eigen::VectorXd pack(const GpHyper& h) {
  Eigen::VectorXd p(h.log_length.size() + 2);
  p.head(h.log_length.size()) = h.log_length;
  p(p.size() - 2) = h.log_signal_var;
  p(p.size() - 1) = h.log_noise_var;
  return p;
}

GpHyper unpack(const Eigen::VectorXd& p) {
  GpHyper h;
  h.log_length = p.head(p.size() - 2);
  h.log_signal_var = p(p.size() - 2);
  h.log_noise_var = p(p.size() - 1);
  return h;
}

Eigen::VectorXd project(Eigen::VectorXd p, const GpBounds& b) {
  const auto d = p.size() - 2;
  for (Eigen::Index i = 0; i < d; ++i) {
    p(i) = std::clamp(p(i), std::log(b.length_lo), std::log(b.length_hi));
  }
  p(d) = std::clamp(p(d), std::log(b.signal_lo), std::log(b.signal_hi));
  p(d + 1) = std::clamp(p(d + 1), std::log(b.noise_lo), std::log(b.noise_hi));
  return p;
}

struct Scored {
  Eigen::VectorXd p;
  double lml;
};

std::optional<Scored> score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const Eigen::VectorXd& p) {
  try {
    GaussianProcess gp(x, y, unpack(p));
    return Scored{p, gp.log_marginal_likelihood()};
  } catch (const NumericError&) {
    return std::nullopt;
  }
}

Scored ascend(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Scored cur,
              const GpBounds& bounds, int iterations) {
  double step = 0.5;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd g = GaussianProcess(x, y, unpack(cur.p)).lml_gradient();
    if (!g.allFinite()) break;
    const double gn = g.norm();
    if (gn < 1e-8) break;
    bool moved = false;
    for (int tries = 0; tries < 30 && !moved; ++tries, step *= 0.5) {
      const Eigen::VectorXd cand = project(cur.p + (step / gn) * g, bounds);
      if ((cand - cur.p).norm() < 1e-12) break;
      if (auto s = score(x, y, cand); s && s->lml > cur.lml) {
        moved = (s->lml - cur.lml) > 1e-12;
        cur = *s;
      }
    }
    if (!moved) break;
    step = std::min(step * 4.0, 2.0);
  }
  return cur;
}

}  // namespace

GpHyper fit_hyperparameters(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const GpHyper& start, const GpBounds& bounds, int iterations) {
  std::optional<Scored> best;
  for (const auto& s0 : {start, GpHyper::defaults(static_cast<std::size_t>(x.cols()))}) {
    auto s = score(x, y, project(pack(s0), bounds));
    if (!s) continue;
    const Scored end = ascend(x, y, *s, bounds, iterations);
    if (!best || end.lml > best->lml) best = end;
  }
  if (!best) throw NumericError("GP hyperparameter fit found no positive definite start");
  return unpack(best->p);
}

double expected_improvement(double mean, double sd, double incumbent) {
  const double gap = mean - incumbent;
  if (!(sd > 1e-12)) return std::max(gap, 0.0);
  const double z = gap / sd;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return std::max(gap * cdf + sd * pdf, 0.0);
}

// ---------------------------------------------------------------- optimizer

void BoConfig::validate() const {
  if (refit_every < 1) throw InvalidInput("refit_every must be >= 1");
  if (ei_random_points < 1) throw InvalidInput("ei_random_points must be >= 1");
  if (ei_local_starts > ei_random_points) {
    throw InvalidInput("ei_local_starts cannot exceed ei_random_points");
  }
}

BayesOptimizer::BayesOptimizer(std::size_t dim, BoConfig cfg)
    : dim_(dim), cfg_(std::move(cfg)), rng_(split_seed(cfg_.seed, 3)), hyper_(GpHyper::defaults(dim)) {
  if (dim < 1) throw InvalidInput("optimizer dimension must be >= 1");
  cfg_.validate();
}

void BayesOptimizer::observe(std::span<const double> x, double y) {
  if (x.size() != dim_) throw InvalidInput("observation has the wrong dimension");
  if (!std::isfinite(y)) throw InvalidInput("observed value must be finite");
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < dim_; ++i) v(static_cast<Eigen::Index>(i)) = std::clamp(x[i], 0.0, 1.0);
  xs_.push_back(std::move(v));
  ys_.push_back(y);
  refresh();
}

void BayesOptimizer::refresh() {
  const auto n = static_cast<Eigen::Index>(ys_.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(dim_));
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = xs_[static_cast<std::size_t>(i)];
  const Eigen::Map<const Eigen::VectorXd> raw(ys_.data(), n);
  const double mu = raw.mean();
  const double sd = n > 1 ? std::sqrt((raw.array() - mu).square().sum() / static_cast<double>(n - 1)) : 0.0;
  const Eigen::VectorXd y = (raw.array() - mu) / (sd > 0.0 ? sd : 1.0);

  if (ys_.size() >= fitted_at_ + cfg_.refit_every) {
    hyper_ = fit_hyperparameters(x, y, hyper_, cfg_.bounds);
    fitted_at_ = ys_.size();
  }
  gp_.emplace(std::move(x), y, hyper_);

  incumbent_index_ = 0;
  incumbent_value_ = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    const double m = gp_->predict(xs_[i]).mean;
    if (m > incumbent_value_) {
      incumbent_value_ = m;
      incumbent_index_ = i;
    }
  }
}

const GaussianProcess& BayesOptimizer::model() const {
  if (!gp_) throw InvalidInput("optimizer has no observations yet");
  return *gp_;
}

std::vector<double> BayesOptimizer::incumbent() const {
  model();
  const auto& v = xs_[incumbent_index_];
  return {v.data(), v.data() + v.size()};
}

double BayesOptimizer::ei(const Eigen::VectorXd& x) const {
  const auto p = gp_->predict(x);
  return expected_improvement(p.mean, std::sqrt(p.variance), incumbent_value_);
}

double BayesOptimizer::expected_improvement_at(std::span<const double> x) const {
  model();
  if (x.size() != dim_) throw InvalidInput("point has the wrong dimension");
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < dim_; ++i) v(static_cast<Eigen::Index>(i)) = x[i];
  return ei(v);
}

std::vector<double> BayesOptimizer::propose() {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(dim_);
  auto draw = [&] {
    Eigen::VectorXd v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = u(rng_);
    return v;
  };
  if (ys_.size() < std::max<std::size_t>(cfg_.initial_random, 1)) {
    const Eigen::VectorXd v = draw();
    return {v.data(), v.data() + v.size()};
  }

  struct Point {
    Eigen::VectorXd x;
    double value;
  };
  std::vector<Point> pts;
  pts.reserve(cfg_.ei_random_points);
  for (std::size_t i = 0; i < cfg_.ei_random_points; ++i) {
    Eigen::VectorXd v = draw();
    const double e = ei(v);
    pts.push_back({std::move(v), e});
  }
  std::stable_sort(pts.begin(), pts.end(),
                   [](const Point& a, const Point& b) { return a.value > b.value; });

  Point best = pts.front();
  for (std::size_t s = 0; s < cfg_.ei_local_starts; ++s) {
    Point cur = pts[s];
    double step = 0.05;
    for (std::size_t it = 0; it < cfg_.ei_local_iterations && step > 1e-4; ++it) {
      bool improved = false;
      for (Eigen::Index c = 0; c < d && !improved; ++c) {
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd cand = cur.x;
          cand(c) = std::clamp(cand(c) + sign * step, 0.0, 1.0);
          const double e = ei(cand);
          if (e > cur.value) {
            cur = {std::move(cand), e};
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (cur.value > best.value) best = cur;
  }
  return {best.x.data(), best.x.data() + best.x.size()};
}

// ---------------------------------------------------------------- episodes

namespace {

BoRun run_bo(const StoppingDomain& domain, const PolicyClass& cls, std::size_t total_episodes,
             const BoConfig& cfg, bool reuse, std::span<const Trajectory> initial) {
  if (total_episodes < 2) throw InvalidInput("BO needs at least two episodes");
  SearchConfig sc;
  sc.seed = cfg.seed;
  const std::uint64_t env = environment_seed(sc);

  BayesOptimizer opt(cls.dimension(), cfg);
  std::vector<Trajectory> stored(initial.begin(), initial.end());
  BoRun run;
  for (std::size_t e = 1; e <= total_episodes; ++e) {
    const auto unit = opt.propose();
    auto theta = cls.from_unit(unit);
    const auto policy = cls.make(theta);
    auto episode = run_on_policy(*policy, domain, split_seed(env, e - 1));
    double value = episode.ret;
    if (reuse && !stored.empty()) {
      const auto rep = evaluate_where_valid(*policy, stored, domain.reward());
      value = (episode.ret + rep.estimate * static_cast<double>(rep.n_used)) /
              static_cast<double>(rep.n_used + 1);
    }
    opt.observe(unit, value);
    run.returns.push_back(episode.ret);
    run.observed_values.push_back(value);
    run.thetas.push_back(std::move(theta));
    if (reuse) stored.push_back(std::move(episode.observed));
  }
  run.best_policy = cls.make(cls.from_unit(opt.incumbent()));
  run.cumulative_mean = running_mean(run.returns);
  return run;
}

}  // namespace

BoRun bo_search(const StoppingDomain& domain, const PolicyClass& cls, std::size_t total_episodes,
                const BoConfig& cfg) {
  return run_bo(domain, cls, total_episodes, cfg, false, {});
}

BoRun bo_re_search(const StoppingDomain& domain, const PolicyClass& cls,
                   std::size_t total_episodes, const BoConfig& cfg,
                   std::span<const Trajectory> initial) {
  return run_bo(domain, cls, total_episodes, cfg, true, initial);
}

}  // namespace gfse
