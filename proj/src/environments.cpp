#include "gfse/environments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>

#include "gfse/errors.hpp"
#include "gfse/policies.hpp"
#include "gfse/rng.hpp"
#include "gfse/text.hpp"

namespace gfse {

namespace {

double lookup(const NamedValues& params, const std::string& key, double fallback) {
  for (const auto& [k, v] : params) {
    if (k == key) return v;
  }
  return fallback;
}

std::size_t lookup_size(const NamedValues& params, const std::string& key, std::size_t fallback) {
  const double v = lookup(params, key, static_cast<double>(fallback));
  if (!(v >= 0.0) || v != std::floor(v)) throw ValidationError(key + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

// ====================================================================== tutoring

double TutoringReward::v_max() const {
  return cfg_.problem_cost * static_cast<double>(cfg_.horizon) + cfg_.posttest_penalty;
}

double TutoringReward::return_of(const Prefix& halted) const {
  if (halted.empty()) throw InvalidInput("tutoring return needs at least one step");
  const auto ic = halted.schema().index_of(features::kCorrect);
  BktFilter f(cfg_.params);
  for (std::size_t i = 0; i + 1 < halted.size(); ++i) f.observe(halted[i][ic] == 1.0);
  const double t = static_cast<double>(halted.size());
  return -(cfg_.problem_cost * t + cfg_.posttest_penalty * (1.0 - f.predict_correct()));
}

namespace {

class BktStream final : public ObservationStream {
 public:
  BktStream(const BktDomainConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {}

  std::size_t horizon() const override { return cfg_.horizon; }

  void next(std::span<double> out) override {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (step_ == 0) {
      mastered_ = u(rng_) < cfg_.params.p_init;
    } else if (!mastered_) {
      mastered_ = u(rng_) < cfg_.params.p_learn;
    }
    const double p_correct = mastered_ ? 1.0 - cfg_.params.p_slip : cfg_.params.p_guess;
    out[0] = u(rng_) < p_correct ? 1.0 : 0.0;
    ++step_;
  }

  bool mastered() const noexcept { return mastered_; }

 private:
  BktDomainConfig cfg_;
  Rng rng_;
  std::size_t step_ = 0;
  bool mastered_ = false;
};

}  // namespace

BktDomain::BktDomain(const BktDomainConfig& cfg)
    : cfg_(cfg),
      schema_(std::make_shared<FeatureSchema>(std::vector<std::string>{features::kCorrect})),
      reward_(cfg) {
  cfg_.params.validate_closed();
  if (cfg_.horizon < 1) throw InvalidInput("BKT horizon must be >= 1");
  if (!(cfg_.posttest_penalty >= 0.0)) throw InvalidInput("posttest penalty must be >= 0");
  if (!(cfg_.problem_cost > 0.0)) throw InvalidInput("problem cost must be > 0");
}

std::unique_ptr<ObservationStream> BktDomain::open(std::uint64_t seed) const {
  return std::make_unique<BktStream>(cfg_, seed);
}

NamedValues BktDomain::describe() const {
  return {{"p_init", cfg_.params.p_init},
          {"p_learn", cfg_.params.p_learn},
          {"p_guess", cfg_.params.p_guess},
          {"p_slip", cfg_.params.p_slip},
          {"horizon", static_cast<double>(cfg_.horizon)},
          {"posttest_penalty", cfg_.posttest_penalty},
          {"problem_cost", cfg_.problem_cost}};
}

BktDomain::LatentSample BktDomain::sample_with_latent(std::uint64_t seed) const {
  BktStream stream(cfg_, seed);
  std::vector<double> rows(cfg_.horizon);
  std::vector<bool> mastered(cfg_.horizon);
  for (std::size_t t = 0; t < cfg_.horizon; ++t) {
    stream.next(std::span<double>(rows).subspan(t, 1));
    mastered[t] = stream.mastered();
  }
  return {Trajectory(schema_, std::move(rows), cfg_.horizon, seed, kId), std::move(mastered)};
}

// ====================================================================== asset

double AssetReward::v_max() const {
  const double h = static_cast<double>(cfg_.horizon);
  return cfg_.utility_per_step * h +
         cfg_.replacement_cost_base * (1.0 + cfg_.replacement_growth * h) + cfg_.worthless_penalty;
}

double AssetReward::return_of(const Prefix& halted) const {
  if (halted.empty()) throw InvalidInput("asset return needs at least one step");
  const auto ix = halted.schema().index_of(features::kValue);
  double utility = 0.0;
  for (std::size_t s = 0; s < halted.size(); ++s) {
    utility += cfg_.utility_per_step * halted[s][ix] / cfg_.x_max;
  }
  const double t = static_cast<double>(halted.size());
  const double replacement = cfg_.replacement_cost_base * (1.0 + cfg_.replacement_growth * t);
  const double penalty = halted.back()[ix] <= 0.0 ? cfg_.worthless_penalty : 0.0;
  return utility - replacement - penalty;
}

namespace {

class AssetStream final : public ObservationStream {
 public:
  AssetStream(const AssetDomainConfig& cfg, std::uint64_t seed)
      : cfg_(cfg), rng_(seed), value_(cfg.x_max) {}

  std::size_t horizon() const override { return cfg_.horizon; }

  void next(std::span<double> out) override {
    out[0] = value_;
    std::normal_distribution<double> noise(0.0, cfg_.signal_noise_std);
    for (std::size_t j = 1; j < cfg_.dim; ++j) {
      out[j] = cfg_.signal_noise_std > 0.0 ? value_ + noise(rng_) : value_;
    }
    value_ = std::max(0.0, value_ - draw_depreciation());
  }

 private:
  double draw_depreciation() {
    if (cfg_.depreciation_std <= 0.0) return std::max(0.0, cfg_.depreciation_mean);
    std::normal_distribution<double> d(cfg_.depreciation_mean, cfg_.depreciation_std);
    for (;;) {
      const double x = d(rng_);
      if (x >= 0.0) return x;
    }
  }

  AssetDomainConfig cfg_;
  Rng rng_;
  double value_;
};

SchemaPtr asset_schema(std::size_t dim) {
  std::vector<std::string> names{features::kValue};
  for (std::size_t j = 1; j < dim; ++j) names.push_back("Y" + std::to_string(j));
  return std::make_shared<FeatureSchema>(std::move(names));
}

}  // namespace

AssetDomain::AssetDomain(const AssetDomainConfig& cfg)
    : cfg_(cfg), schema_(nullptr), reward_(cfg) {
  if (cfg_.dim < 2) throw InvalidInput("asset observation dimension must be >= 2");
  if (!(cfg_.x_max > 0.0)) throw InvalidInput("x_max must be > 0");
  if (cfg_.horizon < 1) throw InvalidInput("asset horizon must be >= 1");
  if (!(cfg_.depreciation_std >= 0.0) || !(cfg_.signal_noise_std >= 0.0)) {
    throw InvalidInput("standard deviations must be >= 0");
  }
  if (cfg_.depreciation_std > 0.0 && cfg_.depreciation_mean / cfg_.depreciation_std < -5.0) {
    throw InvalidInput("depreciation distribution has almost no mass above zero");
  }
  schema_ = asset_schema(cfg_.dim);
}

std::unique_ptr<ObservationStream> AssetDomain::open(std::uint64_t seed) const {
  return std::make_unique<AssetStream>(cfg_, seed);
}

NamedValues AssetDomain::describe() const {
  return {{"dim", static_cast<double>(cfg_.dim)},
          {"x_max", cfg_.x_max},
          {"depreciation_mean", cfg_.depreciation_mean},
          {"depreciation_std", cfg_.depreciation_std},
          {"signal_noise_std", cfg_.signal_noise_std},
          {"utility_per_step", cfg_.utility_per_step},
          {"replacement_cost_base", cfg_.replacement_cost_base},
          {"replacement_growth", cfg_.replacement_growth},
          {"worthless_penalty", cfg_.worthless_penalty},
          {"horizon", static_cast<double>(cfg_.horizon)}};
}

double AssetDomain::expected_depreciation() const {
  const double mu = cfg_.depreciation_mean;
  const double sigma = cfg_.depreciation_std;
  if (sigma <= 0.0) return std::max(0.0, mu);
  const double alpha = -mu / sigma;
  const double pdf = std::exp(-0.5 * alpha * alpha) / std::sqrt(2.0 * M_PI);
  const double tail = 0.5 * std::erfc(alpha / std::sqrt(2.0));
  return mu + sigma * pdf / tail;
}

// ====================================================================== tickets

double PriceDataset::max_price() const {
  double m = 0.0;
  for (const auto& s : series) {
    for (double p : s.prices) m = std::max(m, p);
  }
  return m;
}

double PriceDataset::min_price() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    for (double p : s.prices) m = std::min(m, p);
  }
  return std::isfinite(m) ? m : 0.0;
}

double PriceDataset::max_days() const {
  double m = 0.0;
  for (const auto& s : series) {
    if (!s.days_to_depart.empty()) m = std::max(m, s.days_to_depart.front());
  }
  return m;
}

namespace {

bool is_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  const int m = (s[5] - '0') * 10 + (s[6] - '0');
  const int d = (s[8] - '0') * 10 + (s[9] - '0');
  return m >= 1 && m <= 12 && d >= 1 && d <= 31;
}

const char* kPriceHeader = "route,departure_date,days_to_depart,price";

}  // namespace

PriceDataset read_price_csv(std::istream& in) {
  PriceDataset data;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  std::string raw;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != kPriceHeader) {
        throw ParseError(std::string("expected header '") + kPriceHeader + "'", line_no);
      }
      seen_header = true;
      continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 4) throw ParseError("expected 4 columns", line_no);
    std::string route(trim(cols[0]));
    std::string date(trim(cols[1]));
    if (route.empty()) throw ParseError("empty route", line_no);
    if (!is_iso_date(date)) throw ParseError("departure_date is not YYYY-MM-DD", line_no);
    const double days = parse_double(cols[2], line_no);
    const double price = parse_double(cols[3], line_no);
    if (!std::isfinite(days) || days < 0.0) throw ParseError("days_to_depart must be >= 0", line_no);
    if (!std::isfinite(price)) throw ParseError("price must be finite", line_no);
    if (!(price > 0.0)) {
      throw ValidationError("non-positive price at line " + std::to_string(line_no));
    }
    auto key = std::make_pair(route, date);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, data.series.size()).first;
      data.series.push_back(PriceSeries{route, date, {}, {}});
    }
    auto& s = data.series[it->second];
    if (!s.days_to_depart.empty() && !(days < s.days_to_depart.back())) {
      throw ValidationError("days_to_depart not strictly decreasing for " + route + " " + date +
                            " at line " + std::to_string(line_no));
    }
    s.days_to_depart.push_back(days);
    s.prices.push_back(price);
  }
  return data;
}

PriceDataset load_price_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_price_csv(in);
}

void write_price_csv(std::ostream& out, const PriceDataset& data) {
  out << kPriceHeader << '\n';
  for (const auto& s : data.series) {
    for (std::size_t i = 0; i < s.prices.size(); ++i) {
      out << s.route << ',' << s.departure_date << ',' << format_double(s.days_to_depart[i]) << ','
          << format_double(s.prices[i]) << '\n';
    }
  }
}

SchemaPtr ticket_schema() {
  static const SchemaPtr schema = std::make_shared<FeatureSchema>(
      std::vector<std::string>{features::kPrice, features::kDaysToDepart});
  return schema;
}

TrajectoryPool expand_commencements(const PriceDataset& data, std::size_t min_length) {
  TrajectoryPool pool(ticket_schema(), TicketReplayDomain::kId, 0);
  for (std::size_t si = 0; si < data.series.size(); ++si) {
    const auto& s = data.series[si];
    const std::size_t n = s.prices.size();
    for (std::size_t start = 0; start < n; ++start) {
      const std::size_t len = n - start;
      if (len < min_length || len == 0) continue;
      std::vector<double> rows;
      rows.reserve(2 * len);
      for (std::size_t i = start; i < n; ++i) {
        rows.push_back(s.prices[i]);
        rows.push_back(s.days_to_depart[i]);
      }
      const std::uint64_t tag = (static_cast<std::uint64_t>(si) << 32) | start;
      pool.append(Trajectory(ticket_schema(), std::move(rows), len, tag, TicketReplayDomain::kId));
    }
  }
  return pool;
}

void SynthPriceConfig::validate() const {
  if (n_series < 1) throw InvalidInput("n_series must be >= 1");
  if (min_length < 2 || max_length < min_length) throw InvalidInput("need 2 <= min_length <= max_length");
  if (!(base_price > 0.0)) throw InvalidInput("base_price must be > 0");
  if (!(base_spread >= 0.0) || !(volatility >= 0.0)) throw InvalidInput("spreads must be >= 0");
  if (!(reversion >= 0.0 && reversion < 1.0)) throw InvalidInput("reversion must lie in [0, 1)");
  if (!(drift > -1.0)) throw InvalidInput("drift must be > -1");
  if (!(drift_shape > 0.0)) throw InvalidInput("drift_shape must be > 0");
  if (route.empty() || route.find(',') != std::string::npos) throw InvalidInput("bad route name");
}

PriceDataset synth_prices(const SynthPriceConfig& cfg, std::uint64_t seed) {
  using namespace std::chrono;
  cfg.validate();
  PriceDataset data;
  const sys_days first_departure = year{2015} / January / 1;
  for (std::size_t i = 0; i < cfg.n_series; ++i) {
    Rng rng(split_seed(seed, i));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> length(cfg.min_length, cfg.max_length);
    const std::size_t n = length(rng);
    const double base = cfg.base_price * std::exp(cfg.base_spread * gauss(rng) -
                                                  0.5 * cfg.base_spread * cfg.base_spread);
    const year_month_day dep{first_departure + days{static_cast<int>(i)}};
    char date[32];
    std::snprintf(date, sizeof date, "%04d-%02u-%02u", static_cast<int>(dep.year()),
                  static_cast<unsigned>(dep.month()), static_cast<unsigned>(dep.day()));

    PriceSeries s{cfg.route, date, {}, {}};
    double z = 0.0;
    double var = 0.0;
    const double v2 = cfg.volatility * cfg.volatility;
    for (std::size_t t = 0; t < n; ++t) {
      if (t > 0) {
        z = cfg.reversion * z + cfg.volatility * gauss(rng);
        var = cfg.reversion * cfg.reversion * var + v2;
      }
      const double progress = static_cast<double>(t) / static_cast<double>(n - 1);
      const double mean = base * (1.0 + cfg.drift * std::pow(progress, cfg.drift_shape));
      s.days_to_depart.push_back(static_cast<double>(n - 1 - t));
      s.prices.push_back(mean * std::exp(z - 0.5 * var));
    }
    data.series.push_back(std::move(s));
  }
  return data;
}

TicketReward::TicketReward(double max_price) : max_price_(max_price) {
  if (!(max_price > 0.0)) throw InvalidInput("ticket v_max must be > 0");
}

double TicketReward::return_of(const Prefix& halted) const {
  if (halted.empty()) throw InvalidInput("ticket return needs at least one step");
  return -halted.back().get(features::kPrice);
}

double max_price(const TrajectoryPool& pool) {
  const auto ip = pool.schema()->index_of(features::kPrice);
  double m = 0.0;
  for (const auto& t : pool) {
    for (std::size_t i = 0; i < t.length(); ++i) m = std::max(m, std::abs(t[i][ip]));
  }
  return m;
}

namespace {

class ReplayStream final : public ObservationStream {
 public:
  explicit ReplayStream(const Trajectory& t) : t_(t) {}
  std::size_t horizon() const override { return t_.length(); }
  void next(std::span<double> out) override {
    const auto row = t_[step_++].values();
    std::copy(row.begin(), row.end(), out.begin());
  }

 private:
  const Trajectory& t_;
  std::size_t step_ = 0;
};

}  // namespace

TicketReplayDomain::TicketReplayDomain(TrajectoryPool pool)
    : pool_(std::move(pool)), reward_(pool_.empty() ? 1.0 : max_price(pool_)) {
  if (pool_.empty()) throw InvalidInput("ticket replay needs at least one trajectory");
  pool_.schema()->index_of(features::kPrice);
  pool_.schema()->index_of(features::kDaysToDepart);
}

std::unique_ptr<ObservationStream> TicketReplayDomain::open(std::uint64_t seed) const {
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
  return std::make_unique<ReplayStream>(pool_[pick(rng)]);
}

NamedValues TicketReplayDomain::describe() const {
  return {{"trajectories", static_cast<double>(pool_.size())}, {"max_price", reward_.v_max()}};
}

double hindsight_return(const Trajectory& trajectory, const RewardModel& reward) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t <= trajectory.length(); ++t) {
    best = std::max(best, reward.return_of(trajectory.prefix(t)));
  }
  return best;
}

DomainPtr make_domain(const std::string& id, const NamedValues& p) {
  if (id == BktDomain::kId) {
    BktDomainConfig c;
    c.params.p_init = lookup(p, "p_init", c.params.p_init);
    c.params.p_learn = lookup(p, "p_learn", c.params.p_learn);
    c.params.p_guess = lookup(p, "p_guess", c.params.p_guess);
    c.params.p_slip = lookup(p, "p_slip", c.params.p_slip);
    c.horizon = lookup_size(p, "horizon", c.horizon);
    c.posttest_penalty = lookup(p, "posttest_penalty", c.posttest_penalty);
    c.problem_cost = lookup(p, "problem_cost", c.problem_cost);
    return std::make_shared<BktDomain>(c);
  }
  if (id == AssetDomain::kId) {
    AssetDomainConfig c;
    c.dim = lookup_size(p, "dim", c.dim);
    c.x_max = lookup(p, "x_max", c.x_max);
    c.depreciation_mean = lookup(p, "depreciation_mean", c.depreciation_mean);
    c.depreciation_std = lookup(p, "depreciation_std", c.depreciation_std);
    c.signal_noise_std = lookup(p, "signal_noise_std", c.signal_noise_std);
    c.utility_per_step = lookup(p, "utility_per_step", c.utility_per_step);
    c.replacement_cost_base = lookup(p, "replacement_cost_base", c.replacement_cost_base);
    c.replacement_growth = lookup(p, "replacement_growth", c.replacement_growth);
    c.worthless_penalty = lookup(p, "worthless_penalty", c.worthless_penalty);
    c.horizon = lookup_size(p, "horizon", c.horizon);
    return std::make_shared<AssetDomain>(c);
  }
  throw ValidationError("unknown simulated domain '" + id + "'");
}

}  // namespace gfse
