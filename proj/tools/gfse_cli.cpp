// gfse_cli: bound, run, reproduce, gather, eval.
// Exit codes: 0 ok, 1 usage, 2 validation, 3 runtime.

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>

#include "gfse/bounds.hpp"
#include "gfse/environments.hpp"
#include "gfse/errors.hpp"
#include "gfse/experiments.hpp"
#include "gfse/harness.hpp"
#include "gfse/policies.hpp"
#include "gfse/pool_io.hpp"
#include "gfse/text.hpp"

namespace {

using namespace gfse;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kValidation = 2;
constexpr int kRuntime = 3;

NamedValues parse_params(const std::vector<std::string>& kvs) {
  NamedValues out;
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--param", "expected key=value, got '" + kv + "'");
    out.emplace_back(std::string(trim(kv.substr(0, eq))), parse_double(trim(kv.substr(eq + 1))));
  }
  return out;
}

void append_log(const std::filesystem::path& dir, const std::string& line) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "run.log", std::ios::app) << line << '\n';
}

int cmd_bound(const BoundInputs& in) {
  std::cout << required_trajectories(in) << '\n';
  return kOk;
}

int cmd_run(const std::string& config_path, const std::string& output) {
  auto cfg = load_config(config_path);
  if (!output.empty()) cfg.output_dir = output;
  const auto dir = resolve_output_dir(cfg) / cfg.name;
  try {
    const auto out = run_experiment(cfg);
    write_run(dir, cfg, out);
  } catch (const std::exception& e) {
    append_log(dir, std::string("error: ") + e.what());
    throw;
  }
  std::cout << dir.string() << '\n';
  return kOk;
}

int cmd_reproduce(const std::string& figure, const std::string& seeds, const std::string& output) {
  const auto configs = figure_configs(figure, parse_seed_list(seeds));
  ExperimentConfig probe;
  probe.output_dir = output;
  const auto dir = resolve_output_dir(probe) / figure;
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "run.log", std::ios::trunc);
  for (const auto& cfg : configs) {
    const auto label = cfg.curve_label();
    RunOutput out;
    try {
      out = run_experiment(cfg);
    } catch (const std::exception& e) {
      append_log(dir, label + ": error: " + e.what());
      throw;
    }
    std::ofstream csv(dir / (label + ".csv"), std::ios::binary);
    write_results_csv(csv, out.rows);
    std::ofstream summary(dir / (label + ".summary.csv"), std::ios::binary);
    const auto s = summarize(out.rows);
    write_summary_csv(summary, s);
    std::ofstream ini(dir / (label + ".ini"), std::ios::binary);
    write_config(ini, cfg);
    for (const auto& line : out.log) append_log(dir, label + ": " + line);
    std::cout << (dir / (label + ".csv")).string() << '\n';
  }
  return kOk;
}

int cmd_gather(const std::string& domain_id, const std::vector<std::string>& params, std::size_t n,
               std::uint64_t seed, const std::string& price_csv, std::size_t min_length,
               const std::string& out) {
  if (domain_id == TicketReplayDomain::kId) {
    const auto data = price_csv.empty() ? synth_prices(SynthPriceConfig{}, seed) : load_price_csv(price_csv);
    const auto pool = expand_commencements(data, min_length);
    save_pool(out, pool, {{"max_price", max_price(pool)}});
  } else {
    const auto domain = make_domain(domain_id, parse_params(params));
    save_pool(out, gather_full(*domain, n, seed), domain->describe());
  }
  std::cout << out << '\n';
  return kOk;
}

int cmd_eval(const std::string& policy_path, const std::string& pool_path) {
  std::ifstream pf(policy_path);
  if (!pf) throw InvalidInput("cannot open policy " + policy_path);
  const auto policy = read_policy(pf);
  const auto stored = load_pool(pool_path);
  const auto& pool = stored.pool;
  std::unique_ptr<RewardModel> ticket_reward;
  DomainPtr domain;
  const RewardModel* reward = nullptr;
  if (pool.domain_id() == TicketReplayDomain::kId) {
    ticket_reward = std::make_unique<TicketReward>(max_price(pool));
    reward = ticket_reward.get();
  } else {
    domain = make_domain(pool.domain_id(), stored.domain_params);
    reward = &domain->reward();
  }
  const auto r = evaluate(*policy, pool, *reward);
  double ss = 0.0;
  for (double x : r.per_trajectory_returns) ss += (x - r.estimate) * (x - r.estimate);
  const double se = r.n_used > 1 ? std::sqrt(ss / double(r.n_used - 1) / double(r.n_used)) : 0.0;
  std::cout << "policy = " << policy->class_id() << '\n'
            << "n_used = " << r.n_used << '\n'
            << "estimate = " << format_double(r.estimate) << '\n'
            << "std_error = " << format_double(se) << '\n'
            << "v_max = " << format_double(reward->v_max()) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gather-full, search, execute: policy search for optimal stopping"};
  app.require_subcommand(1);

  BoundInputs bound;
  auto* b = app.add_subcommand("bound", "Trajectories needed for an accuracy target");
  b->add_option("--epsilon", bound.epsilon, "Accuracy")->required()->check(CLI::PositiveNumber);
  b->add_option("--delta", bound.delta, "Failure probability")->required()->check(CLI::Range(0.0, 1.0));
  b->add_option("--vmax", bound.v_max, "Largest absolute return")->required()->check(CLI::PositiveNumber);
  b->add_option("--d", bound.vc_dim, "VC dimension of the policy class")->required()->check(CLI::PositiveNumber);
  b->add_option("--horizon", bound.horizon, "Horizon H")->required()->check(CLI::Range(std::size_t{2}, std::size_t(-1)));
  b->add_option("--constant", bound.constant_c, "Multiplicative constant c")->check(CLI::PositiveNumber);

  std::string config, output;
  auto* r = app.add_subcommand("run", "Run one experiment from an INI config");
  r->add_option("--config", config, "Config path")->required()->check(CLI::ExistingFile);
  r->add_option("--output", output, "Output directory (overrides the config and GFSE_OUTPUT_DIR)");

  std::string figure, seeds = "1-20";
  auto* rp = app.add_subcommand("reproduce", "Run the bundled experiments for one figure");
  rp->add_option("--figure", figure, "Figure name")->required()->check(CLI::IsMember(gfse::figure_names()));
  rp->add_option("--seeds", seeds, "Seed list, e.g. 1-20")->capture_default_str();
  rp->add_option("--output", output, "Output directory (default GFSE_OUTPUT_DIR or results)");

  std::string domain_id, price_csv, out;
  std::vector<std::string> params;
  std::size_t n = 100, min_length = 30;
  std::uint64_t seed = 0;
  auto* g = app.add_subcommand("gather", "Gather full trajectories into a pool CSV and JSON sidecar");
  g->add_option("--domain", domain_id, "bkt, asset or tickets")->required()->check(CLI::IsMember({"bkt", "asset", "tickets"}));
  g->add_option("--param", params, "Domain parameter key=value (repeatable)");
  g->add_option("--n", n, "Number of trajectories (simulated domains)")->capture_default_str()->check(CLI::PositiveNumber);
  g->add_option("--seed", seed, "Seed")->capture_default_str();
  g->add_option("--price-csv", price_csv, "Fare CSV for tickets (synthetic when absent)");
  g->add_option("--min-length", min_length, "Shortest commencement suffix kept (tickets)")->capture_default_str();
  g->add_option("--out", out, "Pool CSV path")->required();

  std::string policy_path, pool_path;
  auto* e = app.add_subcommand("eval", "Evaluate a stored policy on a stored pool");
  e->add_option("--policy", policy_path, "Policy record")->required()->check(CLI::ExistingFile);
  e->add_option("--pool", pool_path, "Pool CSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kUsage;
  }

  try {
    if (*b) return cmd_bound(bound);
    if (*r) return cmd_run(config, output);
    if (*rp) return cmd_reproduce(figure, seeds, output);
    if (*g) return cmd_gather(domain_id, params, n, seed, price_csv, min_length, out);
    if (*e) return cmd_eval(policy_path, pool_path);
  } catch (const gfse::ValidationError& ex) {
    std::cerr << "validation error: " << ex.what() << '\n';
    return kValidation;
  } catch (const gfse::ParseError& ex) {
    std::cerr << "parse error: " << ex.what() << '\n';
    return kValidation;
  } catch (const gfse::InvalidInput& ex) {
    std::cerr << "invalid input: " << ex.what() << '\n';
    return kValidation;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
