#include "gfse/harness.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gfse/bayes_opt.hpp"
#include "gfse/errors.hpp"
#include "gfse/policies.hpp"
#include "gfse/search.hpp"
#include "gfse/text.hpp"

namespace gfse {

namespace {

const std::vector<std::pair<Method, std::string>> kMethods{
    {Method::Gfse, "gfse"},       {Method::GfseRe, "gfse_re"}, {Method::Mc, "mc"},
    {Method::ModelBased, "model_based"}, {Method::Bo, "bo"},  {Method::BoRe, "bo_re"},
    {Method::FixedBaseline, "fixed_baseline"}};

const std::vector<std::pair<Baseline, std::string>> kBaselines{
    {Baseline::AlwaysHalt, "always_halt"}, {Baseline::NeverHalt, "never_halt"},
    {Baseline::Hindsight, "hindsight"}};

bool simulated(const std::string& domain) { return domain == BktDomain::kId || domain == AssetDomain::kId; }

std::vector<std::string> simulated_keys(const std::string& domain) {
  std::vector<std::string> keys;
  for (const auto& [k, v] : make_domain(domain, {})->describe()) keys.push_back(k);
  return keys;
}

// Sub-seeds of a run seed beyond those owned by the search module (1, 2).
std::uint64_t mc_seed(std::uint64_t seed) { return split_seed(seed, 4); }
std::uint64_t model_seed(std::uint64_t seed) { return split_seed(seed, 5); }
std::uint64_t em_seed(std::uint64_t seed) { return split_seed(seed, 6); }
std::uint64_t ticket_data_seed(std::uint64_t seed) { return split_seed(seed, 7); }

std::string join_sizes(const std::vector<std::size_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + std::to_string(xs[i]);
  return s;
}

std::string join_seeds(const std::vector<std::uint64_t>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size();) {
    std::size_t j = i;
    while (j + 1 < xs.size() && xs[j + 1] == xs[j] + 1) ++j;
    if (!s.empty()) s += ",";
    s += std::to_string(xs[i]);
    if (j > i) s += "-" + std::to_string(xs[j]);
    i = j + 1;
  }
  return s;
}

// ------------------------------------------------------------ per-seed setting

struct TicketSplit {
  PriceDataset train_data;
  TrajectoryPool train;
  TrajectoryPool test;
};

TicketSplit split_tickets(const PriceDataset& data, const TicketDataConfig& cfg) {
  const auto n = data.series.size();
  const auto n_train = static_cast<std::size_t>(std::floor(cfg.train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train >= n) {
    throw ValidationError("ticket data: train_fraction leaves an empty train or test split (" +
                          std::to_string(n) + " series)");
  }
  PriceDataset train, test;
  for (std::size_t i = 0; i < n; ++i) (i < n_train ? train : test).series.push_back(data.series[i]);
  auto train_pool = expand_commencements(train, cfg.min_length);
  auto test_pool = expand_commencements(test, cfg.min_length);
  if (train_pool.empty() || test_pool.empty()) {
    throw ValidationError("ticket data: no series reaches domain.min_length in one of the splits");
  }
  return {std::move(train), std::move(train_pool), std::move(test_pool)};
}

/// Everything a seed's run needs: where episodes come from, what the true
/// value of a policy is measured on, and the class to search.
struct Setting {
  DomainPtr domain;                // simulated domain or ticket test replay
  const TrajectoryPool* truth = nullptr;
  std::optional<TrajectoryPool> train;  // tickets only
  std::shared_ptr<TicketReward> ticket_reward;
  PolicyClassPtr cls;

  const RewardModel& reward() const { return ticket_reward ? *ticket_reward : domain->reward(); }
};

PolicyClassPtr make_class(const ExperimentConfig& cfg, const StoppingDomain& domain,
                          const PriceDataset* train_data) {
  const auto& c = cfg.policy_class;
  if (c == BktThresholdPolicy::kClassId) return bkt_threshold_class();
  if (c == AfmThresholdPolicy::kClassId) return afm_threshold_class();
  if (c == AssetLogisticPolicy::kClassId) {
    return asset_logistic_class(dynamic_cast<const AssetDomain&>(domain).config().x_max);
  }
  if (c == TicketSimplePolicy::kClassId) {
    return ticket_simple_class(train_data->min_price(), train_data->max_price(), train_data->max_days());
  }
  if (c == TicketComplexPolicy::kClassId) {
    return ticket_complex_class(train_data->min_price(), train_data->max_price(), train_data->max_days());
  }
  throw ConfigError("policy.class", "unknown policy class '" + c + "'");
}

class Runner {
 public:
  explicit Runner(const ExperimentConfig& cfg) : cfg_(cfg) {
    if (simulated(cfg.domain)) {
      sim_ = make_domain(cfg.domain, cfg.domain_params);
    } else if (!cfg.tickets.price_csv.empty()) {
      csv_data_ = load_price_csv(cfg.tickets.price_csv);
    }
  }

  std::vector<ResultRow> run_seed(std::uint64_t seed) {
    Setting s = setting(seed);
    SearchConfig sc;
    sc.seed = seed;
    sc.n_candidates = cfg_.n_candidates;
    sc.workers = cfg_.workers;
    std::vector<ResultRow> rows;
    const auto label = cfg_.curve_label();

    auto online_rows = [&](const std::vector<double>& returns, std::optional<std::size_t> budget) {
      const auto means = running_mean(returns);
      for (std::size_t e = 0; e < returns.size(); ++e) {
        rows.push_back({label, seed, budget, e + 1, returns[e], means[e]});
      }
    };
    auto value = [&](const Policy& p) { return evaluate(p, *s.truth, s.reward()).estimate; };

    if (cfg_.method == Method::FixedBaseline) {
      PolicyPtr policy;
      if (cfg_.baseline == Baseline::AlwaysHalt) policy = std::make_shared<AlwaysHaltPolicy>();
      if (cfg_.baseline == Baseline::NeverHalt) policy = std::make_shared<NeverHaltPolicy>();
      if (cfg_.online()) {
        std::vector<double> returns;
        const auto env = environment_seed(sc);
        if (policy) {
          returns = execute(*policy, *s.domain, cfg_.episodes, env);
        } else {
          for (std::size_t e = 0; e < cfg_.episodes; ++e) {
            returns.push_back(hindsight_return(s.domain->sample(split_seed(env, e)), s.reward()));
          }
        }
        online_rows(returns, std::nullopt);
      } else {
        double v = 0.0;
        if (policy) {
          v = value(*policy);
        } else {
          std::vector<double> best;
          for (const auto& t : *s.truth) best.push_back(hindsight_return(t, s.reward()));
          std::sort(best.begin(), best.end());
          for (double b : best) v += b;
          v /= static_cast<double>(best.size());
        }
        rows.push_back({label, seed, std::nullopt, std::nullopt, v, std::nullopt});
      }
      return rows;
    }

    if (cfg_.online()) {
      BoConfig bc = bo_config(seed);
      switch (cfg_.method) {
        case Method::Gfse:
          online_rows(gfse_online(*s.domain, *s.cls, sc, cfg_.initial_budget, cfg_.episodes).returns,
                      cfg_.initial_budget);
          break;
        case Method::GfseRe:
          online_rows(gfse_re(*s.domain, *s.cls, sc, cfg_.initial_budget, cfg_.episodes).returns,
                      cfg_.initial_budget);
          break;
        case Method::Bo:
          online_rows(bo_search(*s.domain, *s.cls, cfg_.episodes, bc).returns, std::nullopt);
          break;
        case Method::BoRe:
          online_rows(bo_re_search(*s.domain, *s.cls, cfg_.episodes, bc).returns, std::nullopt);
          break;
        default:
          throw ConfigError("method.episodes", "online mode is not available for " + to_string(cfg_.method));
      }
      return rows;
    }

    std::vector<std::size_t> budgets = cfg_.budgets;
    if (budgets.empty()) budgets.push_back(s.train->size());  // tickets: whole train split
    for (std::size_t b : budgets) {
      PolicyPtr chosen;
      switch (cfg_.method) {
        case Method::Gfse:
          if (s.train) {
            if (b > s.train->size()) {
              throw ValidationError("budget " + std::to_string(b) + " exceeds the " +
                                    std::to_string(s.train->size()) + " training trajectories");
            }
            TrajectoryPool sub(s.train->schema(), s.train->domain_id(), s.train->created_seed());
            for (std::size_t i = 0; i < b; ++i) sub.append((*s.train)[i]);
            chosen = search_pool(*s.cls, sub, s.reward(), sc).best_policy;
          } else {
            chosen = gfse::gfse(*s.domain, *s.cls, sc, b).best_policy;
          }
          break;
        case Method::Mc: {
          const auto candidates = sample_candidates(*s.cls, cfg_.n_candidates, candidate_seed(sc));
          const auto reports = monte_carlo_on_policy(candidates, *s.domain, b, mc_seed(seed));
          chosen = candidates[argmax_estimate(reports)];
          break;
        }
        case Method::ModelBased: {
          const auto pool = gather_full(*s.domain, b, environment_seed(sc));
          ModelBasedConfig mc;
          mc.family = cfg_.model_family;
          mc.sim_trajectories = cfg_.sim_trajectories;
          mc.seed = model_seed(seed);
          mc.em.seed = em_seed(seed);
          chosen = model_based_policy(pool, dynamic_cast<const BktDomain&>(*s.domain), mc).policy;
          break;
        }
        case Method::Bo:
          chosen = bo_search(*s.domain, *s.cls, b, bo_config(seed)).best_policy;
          break;
        case Method::BoRe:
          chosen = bo_re_search(*s.domain, *s.cls, b, bo_config(seed)).best_policy;
          break;
        default:
          throw ConfigError("method.budgets", "budget mode is not available for " + to_string(cfg_.method));
      }
      rows.push_back({label, seed, b, std::nullopt, value(*chosen), std::nullopt});
    }
    return rows;
  }

 private:
  BoConfig bo_config(std::uint64_t seed) const {
    BoConfig bc;
    bc.seed = seed;
    bc.refit_every = cfg_.refit_every;
    bc.ei_random_points = cfg_.ei_random_points;
    bc.ei_local_starts = std::min(bc.ei_local_starts, cfg_.ei_random_points);
    return bc;
  }

  const TrajectoryPool& oracle() {
    if (!oracle_) oracle_ = gather_full(*sim_, cfg_.oracle_trajectories, cfg_.oracle_seed);
    return *oracle_;
  }

  Setting setting(std::uint64_t seed) {
    Setting s;
    if (sim_) {
      s.domain = sim_;
      if (cfg_.method != Method::FixedBaseline || !cfg_.online()) s.truth = &oracle();
      if (cfg_.method != Method::FixedBaseline) s.cls = make_class(cfg_, *sim_, nullptr);
      return s;
    }
    const PriceDataset data = csv_data_ ? *csv_data_ : synth_prices(cfg_.tickets.synth, ticket_data_seed(seed));
    auto split = split_tickets(data, cfg_.tickets);
    s.ticket_reward = std::make_shared<TicketReward>(std::max(max_price(split.train), max_price(split.test)));
    auto replay = std::make_shared<TicketReplayDomain>(split.test);
    s.domain = replay;
    s.truth = &replay->pool();
    if (cfg_.method != Method::FixedBaseline) s.cls = make_class(cfg_, *replay, &split.train_data);
    s.train = std::move(split.train);
    return s;
  }

  const ExperimentConfig& cfg_;
  DomainPtr sim_;
  std::optional<PriceDataset> csv_data_;
  std::optional<TrajectoryPool> oracle_;
};

// ------------------------------------------------------------------ INI input

using boost::property_tree::ptree;

template <typename F>
auto field(const std::string& name, F&& parse) -> decltype(parse()) {
  try {
    return parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(name, e.what());
  }
}

std::size_t to_size(const std::string& name, const std::string& v) {
  return field(name, [&] { return static_cast<std::size_t>(parse_u64(trim(v))); });
}

double to_double(const std::string& name, const std::string& v) {
  return field(name, [&] { return parse_double(trim(v)); });
}

std::vector<std::size_t> to_size_list(const std::string& name, const std::string& v) {
  std::vector<std::size_t> out;
  if (trim(v).empty()) return out;
  for (auto part : split(trim(v), ',')) out.push_back(to_size(name, std::string(part)));
  return out;
}

Method to_method(const std::string& v) {
  for (const auto& [m, s] : kMethods) {
    if (s == v) return m;
  }
  throw ConfigError("run.method", "unknown method '" + v +
                                      "' (gfse, gfse_re, mc, model_based, bo, bo_re, fixed_baseline)");
}

Baseline to_baseline(const std::string& v) {
  for (const auto& [b, s] : kBaselines) {
    if (s == v) return b;
  }
  throw ConfigError("method.baseline", "unknown baseline '" + v + "' (always_halt, never_halt, hindsight)");
}

ModelFamily to_family(const std::string& v) {
  if (v == "bkt") return ModelFamily::Bkt;
  if (v == "afm") return ModelFamily::Afm;
  throw ConfigError("method.model", "unknown model family '" + v + "' (bkt, afm)");
}

}  // namespace

std::string to_string(Method m) {
  for (const auto& [k, s] : kMethods) {
    if (k == m) return s;
  }
  return "?";
}

std::string to_string(Baseline b) {
  for (const auto& [k, s] : kBaselines) {
    if (k == b) return s;
  }
  return "?";
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (auto part : split(trim(text), ',')) {
    part = trim(part);
    if (part.empty()) throw ConfigError("run.seeds", "empty entry");
    const auto dash = part.find('-');
    try {
      if (dash == std::string_view::npos) {
        out.push_back(parse_u64(part));
      } else {
        const auto lo = parse_u64(trim(part.substr(0, dash)));
        const auto hi = parse_u64(trim(part.substr(dash + 1)));
        if (hi < lo) throw ConfigError("run.seeds", "descending range '" + std::string(part) + "'");
        if (hi - lo > 1'000'000) throw ConfigError("run.seeds", "range too long");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("run.seeds", e.what());
    }
  }
  std::set<std::uint64_t> unique(out.begin(), out.end());
  if (unique.size() != out.size()) throw ConfigError("run.seeds", "duplicate seed");
  return out;
}

std::string ExperimentConfig::curve_label() const {
  if (!label.empty()) return label;
  switch (method) {
    case Method::ModelBased:
      return model_family == ModelFamily::Bkt ? "model_based_bkt" : "model_based_afm";
    case Method::FixedBaseline:
      return to_string(baseline);
    case Method::Gfse:
      return online() ? "gfse_" + std::to_string(initial_budget) : "gfse";
    case Method::GfseRe:
      return "gfse_re_" + std::to_string(initial_budget);
    default:
      return to_string(method);
  }
}

void ExperimentConfig::validate() const {
  if (name.empty() || name.find_first_of("/\\") != std::string::npos) {
    throw ConfigError("run.name", "must be a non-empty file name");
  }
  if (label.find(',') != std::string::npos) throw ConfigError("run.label", "must not contain commas");
  if (seeds.empty()) throw ConfigError("run.seeds", "at least one seed is required");

  const bool tickets_domain = domain == TicketReplayDomain::kId;
  if (!simulated(domain) && !tickets_domain) {
    throw ConfigError("domain.id", "unknown domain '" + domain + "' (bkt, asset, tickets)");
  }
  if (simulated(domain)) {
    const auto keys = simulated_keys(domain);
    for (const auto& [k, v] : domain_params) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        throw ConfigError("domain." + k, "not a parameter of domain '" + domain + "'");
      }
    }
    field("domain", [&] { return make_domain(domain, domain_params); });
  } else {
    if (!(tickets.train_fraction > 0.0 && tickets.train_fraction < 1.0)) {
      throw ConfigError("domain.train_fraction", "must lie in (0, 1)");
    }
    if (tickets.min_length < 1) throw ConfigError("domain.min_length", "must be >= 1");
    if (tickets.price_csv.empty()) field("domain", [&] { tickets.synth.validate(); return 0; });
  }

  if (method != Method::FixedBaseline) {
    const bool ok = (policy_class == BktThresholdPolicy::kClassId || policy_class == AfmThresholdPolicy::kClassId)
                        ? domain == BktDomain::kId
                    : policy_class == AssetLogisticPolicy::kClassId ? domain == AssetDomain::kId
                    : (policy_class == TicketSimplePolicy::kClassId || policy_class == TicketComplexPolicy::kClassId)
                        ? tickets_domain
                        : false;
    if (!ok) throw ConfigError("policy.class", "class '" + policy_class + "' does not fit domain '" + domain + "'");
  }

  if (n_candidates < 1) throw ConfigError("method.n_candidates", "must be >= 1");
  if (oracle_trajectories < 1) throw ConfigError("method.oracle_trajectories", "must be >= 1");
  if (sim_trajectories < 1) throw ConfigError("method.sim_trajectories", "must be >= 1");
  if (refit_every < 1) throw ConfigError("method.refit_every", "must be >= 1");
  if (ei_random_points < 1) throw ConfigError("method.ei_random_points", "must be >= 1");
  for (std::size_t b : budgets) {
    if (b < 1) throw ConfigError("method.budgets", "budgets must be >= 1");
  }
  if (!budgets.empty() && episodes > 0) {
    throw ConfigError("method.episodes", "set either budgets (budget mode) or episodes (online mode), not both");
  }

  switch (method) {
    case Method::Gfse:
      if (online()) {
        if (initial_budget < 1 || initial_budget >= episodes) {
          throw ConfigError("method.initial_budget", "need 1 <= initial_budget < episodes");
        }
      } else if (budgets.empty() && !tickets_domain) {
        throw ConfigError("method.budgets", "gfse needs budgets or episodes");
      }
      break;
    case Method::GfseRe:
      if (!online()) throw ConfigError("method.episodes", "gfse_re runs online; set episodes");
      if (initial_budget < 1 || initial_budget >= episodes) {
        throw ConfigError("method.initial_budget", "need 1 <= initial_budget < episodes");
      }
      break;
    case Method::Mc:
      if (!simulated(domain)) throw ConfigError("run.method", "mc needs a simulated domain");
      if (budgets.empty()) throw ConfigError("method.budgets", "mc needs budgets");
      for (std::size_t b : budgets) {
        if (b < n_candidates) throw ConfigError("method.budgets", "each budget must be >= n_candidates");
      }
      break;
    case Method::ModelBased:
      if (domain != BktDomain::kId) throw ConfigError("run.method", "model_based needs the bkt domain");
      if (budgets.empty()) throw ConfigError("method.budgets", "model_based needs budgets");
      break;
    case Method::Bo:
    case Method::BoRe:
      if (online() ? episodes < 2 : budgets.empty()) {
        throw ConfigError(online() ? "method.episodes" : "method.budgets", "bo needs at least two episodes");
      }
      for (std::size_t b : budgets) {
        if (b < 2) throw ConfigError("method.budgets", "bo budgets must be >= 2");
      }
      if (!simulated(domain) && !online()) throw ConfigError("method.budgets", "bo on tickets runs online only");
      break;
    case Method::FixedBaseline:
      if (!budgets.empty()) throw ConfigError("method.budgets", "fixed baselines take no budget");
      break;
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError("config: " + e.message(), e.line());
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(section, "keys must live inside [run], [domain], [policy] or [method]");
    }
    for (const auto& [key, node] : body) {
      const std::string v(trim(node.data()));
      const std::string name = section + "." + key;
      if (section == "run") {
        if (key == "name") cfg.name = v;
        else if (key == "label") cfg.label = v;
        else if (key == "method") cfg.method = to_method(v);
        else if (key == "seeds") cfg.seeds = parse_seed_list(v);
        else if (key == "workers") cfg.workers = static_cast<unsigned>(to_size(name, v));
        else if (key == "output_dir") cfg.output_dir = v;
        else throw ConfigError(name, "unknown key");
      } else if (section == "domain") {
        auto& t = cfg.tickets;
        auto& s = t.synth;
        if (key == "id") cfg.domain = v;
        else if (key == "price_csv") t.price_csv = v;
        else if (key == "train_fraction") t.train_fraction = to_double(name, v);
        else if (key == "min_length") t.min_length = to_size(name, v);
        else if (key == "n_series") s.n_series = to_size(name, v);
        else if (key == "series_min_length") s.min_length = to_size(name, v);
        else if (key == "series_max_length") s.max_length = to_size(name, v);
        else if (key == "base_price") s.base_price = to_double(name, v);
        else if (key == "base_spread") s.base_spread = to_double(name, v);
        else if (key == "volatility") s.volatility = to_double(name, v);
        else if (key == "reversion") s.reversion = to_double(name, v);
        else if (key == "drift") s.drift = to_double(name, v);
        else if (key == "drift_shape") s.drift_shape = to_double(name, v);
        else if (key == "route") s.route = v;
        else cfg.domain_params.emplace_back(key, to_double(name, v));
      } else if (section == "policy") {
        if (key == "class") cfg.policy_class = v;
        else throw ConfigError(name, "unknown key");
      } else if (section == "method") {
        if (key == "budgets") cfg.budgets = to_size_list(name, v);
        else if (key == "episodes") cfg.episodes = to_size(name, v);
        else if (key == "initial_budget") cfg.initial_budget = to_size(name, v);
        else if (key == "n_candidates") cfg.n_candidates = to_size(name, v);
        else if (key == "oracle_trajectories") cfg.oracle_trajectories = to_size(name, v);
        else if (key == "oracle_seed") cfg.oracle_seed = field(name, [&] { return parse_u64(v); });
        else if (key == "baseline") cfg.baseline = to_baseline(v);
        else if (key == "model") cfg.model_family = to_family(v);
        else if (key == "sim_trajectories") cfg.sim_trajectories = to_size(name, v);
        else if (key == "refit_every") cfg.refit_every = to_size(name, v);
        else if (key == "ei_random_points") cfg.ei_random_points = to_size(name, v);
        else throw ConfigError(name, "unknown key");
      } else {
        throw ConfigError(section, "unknown section");
      }
    }
  }
  // Ticket-only keys on a simulated domain land in domain_params and are
  // rejected by validate(); simulated keys on tickets are rejected here.
  if (cfg.domain == TicketReplayDomain::kId && !cfg.domain_params.empty()) {
    throw ConfigError("domain." + cfg.domain_params.front().first, "not a tickets parameter");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  out << "[run]\n"
      << "name = " << cfg.name << "\n"
      << "label = " << cfg.label << "\n"
      << "method = " << to_string(cfg.method) << "\n"
      << "seeds = " << join_seeds(cfg.seeds) << "\n"
      << "workers = " << cfg.workers << "\n"
      << "output_dir = " << cfg.output_dir << "\n\n";
  out << "[domain]\n"
      << "id = " << cfg.domain << "\n";
  if (simulated(cfg.domain)) {
    for (const auto& [k, v] : make_domain(cfg.domain, cfg.domain_params)->describe()) {
      out << k << " = " << format_double(v) << "\n";
    }
  } else {
    const auto& t = cfg.tickets;
    const auto& s = t.synth;
    out << "price_csv = " << t.price_csv << "\n"
        << "train_fraction = " << format_double(t.train_fraction) << "\n"
        << "min_length = " << t.min_length << "\n"
        << "n_series = " << s.n_series << "\n"
        << "series_min_length = " << s.min_length << "\n"
        << "series_max_length = " << s.max_length << "\n"
        << "base_price = " << format_double(s.base_price) << "\n"
        << "base_spread = " << format_double(s.base_spread) << "\n"
        << "volatility = " << format_double(s.volatility) << "\n"
        << "reversion = " << format_double(s.reversion) << "\n"
        << "drift = " << format_double(s.drift) << "\n"
        << "drift_shape = " << format_double(s.drift_shape) << "\n"
        << "route = " << s.route << "\n";
  }
  out << "\n[policy]\n"
      << "class = " << cfg.policy_class << "\n\n";
  out << "[method]\n"
      << "budgets = " << join_sizes(cfg.budgets) << "\n"
      << "episodes = " << cfg.episodes << "\n"
      << "initial_budget = " << cfg.initial_budget << "\n"
      << "n_candidates = " << cfg.n_candidates << "\n"
      << "oracle_trajectories = " << cfg.oracle_trajectories << "\n"
      << "oracle_seed = " << cfg.oracle_seed << "\n"
      << "baseline = " << to_string(cfg.baseline) << "\n"
      << "model = " << (cfg.model_family == ModelFamily::Bkt ? "bkt" : "afm") << "\n"
      << "sim_trajectories = " << cfg.sim_trajectories << "\n"
      << "refit_every = " << cfg.refit_every << "\n"
      << "ei_random_points = " << cfg.ei_random_points << "\n";
}

// -------------------------------------------------------------------- results

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << "method,seed,budget,episode,return,cumulative_mean\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.seed << ',';
    if (r.budget) out << *r.budget;
    out << ',';
    if (r.episode) out << *r.episode;
    out << ',' << format_double(r.ret) << ',';
    if (r.cumulative_mean) out << format_double(*r.cumulative_mean);
    out << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || trim(line) != "method,seed,budget,episode,return,cumulative_mean") {
    throw ParseError("results CSV: unexpected header", 1);
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto c = split(trim(line), ',');
    if (c.size() != 6) throw ParseError("results CSV: expected 6 fields", line_no);
    ResultRow r;
    r.method = std::string(c[0]);
    r.seed = parse_u64(c[1], line_no);
    if (!c[2].empty()) r.budget = parse_u64(c[2], line_no);
    if (!c[3].empty()) r.episode = parse_u64(c[3], line_no);
    r.ret = parse_double(c[4], line_no);
    if (!c[5].empty()) r.cumulative_mean = parse_double(c[5], line_no);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SummaryRow> summarize(std::span<const ResultRow> rows) {
  using Key = std::tuple<std::string, std::optional<std::size_t>, std::optional<std::size_t>>;
  std::vector<Key> order;
  std::map<Key, std::vector<double>> groups;
  for (const auto& r : rows) {
    Key k{r.method, r.budget, r.episode};
    auto [it, fresh] = groups.try_emplace(k);
    if (fresh) order.push_back(k);
    it->second.push_back(r.ret);
  }
  std::vector<SummaryRow> out;
  for (const auto& k : order) {
    auto xs = groups[k];
    std::sort(xs.begin(), xs.end());
    SummaryRow s{std::get<0>(k), std::get<1>(k), std::get<2>(k), xs.size()};
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
      double ss = 0.0;
      for (double x : xs) ss += (x - s.mean) * (x - s.mean);
      s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
      const boost::math::students_t t(static_cast<double>(xs.size() - 1));
      s.ci95 = boost::math::quantile(t, 0.975) * s.sd / std::sqrt(static_cast<double>(xs.size()));
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "method,budget,episode,n,mean,sd,ci95\n";
  for (const auto& r : rows) {
    out << r.method << ',';
    if (r.budget) out << *r.budget;
    out << ',';
    if (r.episode) out << *r.episode;
    out << ',' << r.n << ',' << format_double(r.mean) << ',' << format_double(r.sd) << ','
        << format_double(r.ci95) << '\n';
  }
}

// ------------------------------------------------------------------------ run

RunOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunOutput out;
  Runner runner(cfg);
  out.log.push_back("experiment " + cfg.name + ": " + cfg.curve_label() + " on " + cfg.domain + ", " +
                    std::to_string(cfg.seeds.size()) + " seed(s)");
  for (std::uint64_t seed : cfg.seeds) {
    const auto start = std::chrono::steady_clock::now();
    auto rows = runner.run_seed(seed);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream msg;
    msg << "seed " << seed << ": " << rows.size() << " row(s), wall_time " << secs << " s";
    out.log.push_back(msg.str());
    out.rows.insert(out.rows.end(), rows.begin(), rows.end());
  }
  return out;
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("GFSE_OUTPUT_DIR"); env && *env) return env;
  return "results";
}

void write_run(const std::filesystem::path& dir, const ExperimentConfig& cfg, const RunOutput& out) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* file) {
    std::ofstream f(dir / file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / file).string());
    return f;
  };
  {
    auto f = open("results.csv");
    write_results_csv(f, out.rows);
  }
  {
    auto f = open("summary.csv");
    const auto s = summarize(out.rows);
    write_summary_csv(f, s);
  }
  {
    auto f = open("config.ini");
    write_config(f, cfg);
  }
  {
    auto f = open("run.log");
    for (const auto& l : out.log) f << l << '\n';
  }
}

}  // namespace gfse
