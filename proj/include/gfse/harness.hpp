#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gfse/core.hpp"
#include "gfse/environments.hpp"
#include "gfse/model_based.hpp"

namespace gfse {

enum class Method { Gfse, GfseRe, Mc, ModelBased, Bo, BoRe, FixedBaseline };
enum class Baseline { AlwaysHalt, NeverHalt, Hindsight };

std::string to_string(Method m);
std::string to_string(Baseline b);

/// Where ticket trajectories come from and how they are split. Series are
/// split in file order: the first floor(train_fraction * n) train, the rest test.
struct TicketDataConfig {
  std::string price_csv;  // empty = synthetic, regenerated per seed
  SynthPriceConfig synth{};
  double train_fraction = 1.0 / 3.0;
  std::size_t min_length = 30;  // commencement suffixes shorter than this are dropped
};

/// One method on one domain over a list of seeds. Two modes:
///  - budget mode (`budgets` set): one row per (seed, budget) holding the
///    true value of the selected policy;
///  - online mode (`episodes` > 0): one row per (seed, episode).
/// True values use a shared oracle pool (simulated domains) or the test
/// split (tickets).
struct ExperimentConfig {
  // [run]
  std::string name = "experiment";
  std::string label;  // curve name in results; empty = derived from the method
  Method method = Method::Gfse;
  std::vector<std::uint64_t> seeds{1};
  unsigned workers = 0;
  std::string output_dir;  // empty = $GFSE_OUTPUT_DIR, else "results"

  // [domain]
  std::string domain = "bkt";
  NamedValues domain_params;  // simulated domains; unset keys keep defaults
  TicketDataConfig tickets{};

  // [policy]
  std::string policy_class = "bkt_threshold";

  // [method]
  std::vector<std::size_t> budgets;
  std::size_t episodes = 0;
  std::size_t initial_budget = 5;
  std::size_t n_candidates = 500;
  std::size_t oracle_trajectories = 50000;
  std::uint64_t oracle_seed = 0x0AC1E;
  Baseline baseline = Baseline::AlwaysHalt;
  ModelFamily model_family = ModelFamily::Bkt;
  std::size_t sim_trajectories = 2000;
  std::size_t refit_every = 5;
  std::size_t ei_random_points = 512;

  /// Throws ConfigError naming the offending field ("method.budgets", ...).
  void validate() const;
  std::string curve_label() const;
  bool online() const noexcept { return episodes > 0; }
};

/// INI with sections [run] [domain] [policy] [method]. Unknown keys are
/// errors. `seeds` accepts lists and ranges: "1-20", "1,4,9-12".
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Complete echo: every field, defaults included; parse_config inverts it.
void write_config(std::ostream& out, const ExperimentConfig& cfg);

std::vector<std::uint64_t> parse_seed_list(const std::string& text);

struct ResultRow {
  std::string method;
  std::uint64_t seed = 0;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> episode;
  double ret = 0.0;
  std::optional<double> cumulative_mean;

  bool operator==(const ResultRow&) const = default;
};

/// Columns method,seed,budget,episode,return,cumulative_mean; absent
/// fields are empty cells. Round-trips exactly through read_results_csv.
void write_results_csv(std::ostream& out, std::span<const ResultRow> rows);
std::vector<ResultRow> read_results_csv(std::istream& in);

struct SummaryRow {
  std::string method;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> episode;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double ci95 = 0.0;  // Student-t half-width; 0 when n < 2
};

/// Groups by (method, budget, episode) in first-seen order.
std::vector<SummaryRow> summarize(std::span<const ResultRow> rows);
void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

struct RunOutput {
  std::vector<ResultRow> rows;
  std::vector<std::string> log;  // human-readable, carries wall times
};

/// Validates and executes. Rows are ordered by seed, then budget or episode.
RunOutput run_experiment(const ExperimentConfig& cfg);

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

/// Writes results.csv, summary.csv, config.ini and run.log under dir.
void write_run(const std::filesystem::path& dir, const ExperimentConfig& cfg, const RunOutput& out);

}  // namespace gfse
