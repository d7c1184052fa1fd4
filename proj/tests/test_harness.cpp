#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "gfse/environments.hpp"
#include "gfse/errors.hpp"
#include "gfse/experiments.hpp"
#include "gfse/harness.hpp"
#include "gfse/pool_io.hpp"
#include "support.hpp"

using namespace gfse;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string config_error_field(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

std::string echo(const ExperimentConfig& cfg) {
  std::ostringstream out;
  write_config(out, cfg);
  return out.str();
}

std::string results_text(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_results_csv(out, rows);
  return out.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gfse_test_harness_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Small enough for a unit test, large enough to exercise every stage.
ExperimentConfig small_gfse() {
  ExperimentConfig c;
  c.name = "small";
  c.seeds = {1, 2, 3};
  c.budgets = {5, 20};
  c.n_candidates = 40;
  c.oracle_trajectories = 2000;
  return c;
}

}  // namespace

TEST_CASE("seed lists accept ranges and reject duplicates") {
  CHECK(parse_seed_list("1-3,7") == std::vector<std::uint64_t>{1, 2, 3, 7});
  CHECK(parse_seed_list(" 5 ") == std::vector<std::uint64_t>{5});
  CHECK_THROWS(parse_seed_list(""));
  CHECK_THROWS(parse_seed_list("3-1"));
  CHECK_THROWS(parse_seed_list("1-3,2"));
  CHECK_THROWS(parse_seed_list("a"));
}

TEST_CASE("config parsing fills fields and names the offending key") {
  const auto c = parse(
      "[run]\nname = t\nmethod = mc\nseeds = 1-4\nworkers = 2\n"
      "[domain]\nid = bkt\nposttest_penalty = 30\n"
      "[policy]\nclass = bkt_threshold\n"
      "[method]\nbudgets = 100, 200\nn_candidates = 100\n");
  CHECK(c.method == Method::Mc);
  CHECK(c.seeds.size() == 4);
  CHECK(c.workers == 2);
  CHECK(c.budgets == std::vector<std::size_t>{100, 200});
  REQUIRE(c.domain_params.size() == 1);
  CHECK(c.domain_params[0].first == "posttest_penalty");
  CHECK(c.curve_label() == "mc");

  CHECK(config_error_field("[run]\nbogus = 1\n") == "run.bogus");
  CHECK(config_error_field("[extra]\nx = 1\n") == "extra");
  CHECK(config_error_field("[method]\nbudgets = 0\n") == "method.budgets");
  CHECK(config_error_field("[method]\nbudgets = ten\n") == "method.budgets");
  CHECK(config_error_field("[method]\nbudgets = 5\n[policy]\nclass = asset_logistic\n") == "policy.class");
  CHECK(config_error_field("[domain]\nid = moon\n") == "domain.id");
  CHECK(config_error_field("[domain]\nnot_a_param = 1\n[method]\nbudgets = 5\n") == "domain.not_a_param");
  CHECK(config_error_field("[run]\nmethod = mc\n[method]\nbudgets = 50\nn_candidates = 100\n") ==
        "method.budgets");
  CHECK(config_error_field("[run]\nmethod = gfse_re\n[method]\nepisodes = 5\ninitial_budget = 5\n") ==
        "method.initial_budget");
  CHECK(config_error_field("[method]\nbudgets = 5\nepisodes = 10\n") == "method.episodes");
  CHECK(config_error_field("[domain]\nid = tickets\ntrain_fraction = 1.5\n[policy]\nclass = ticket_simple\n") ==
        "domain.train_fraction");
  CHECK_THROWS_AS(parse("[run\nname = x\n"), ParseError);
}

TEST_CASE("config echo is complete and parses back to the same config") {
  auto c = small_gfse();
  c.label = "curve";
  c.seeds = {1, 2, 3, 9, 11, 12};
  c.domain_params = {{"problem_cost", 0.5}};
  c.oracle_seed = std::numeric_limits<std::uint64_t>::max();
  const auto text = echo(c);
  const auto back = parse(text);
  CHECK(echo(back) == text);
  CHECK(back.seeds == c.seeds);
  CHECK(back.oracle_seed == c.oracle_seed);
  CHECK(back.label == "curve");
  CHECK(text.find("posttest_penalty") != std::string::npos);  // defaults are echoed too

  ExperimentConfig t;
  t.domain = "tickets";
  t.policy_class = "ticket_complex";
  t.tickets.synth.route = "SEA-BOS";
  t.tickets.train_fraction = 0.1;
  const auto tt = echo(t);
  CHECK(echo(parse(tt)) == tt);
  CHECK(parse(tt).tickets.synth.route == "SEA-BOS");
}

TEST_CASE("results CSV round-trips exactly") {
  const std::vector<ResultRow> rows{
      {"gfse", 1, 5, std::nullopt, 0.1, std::nullopt},
      {"bo_re", 18446744073709551615ULL, std::nullopt, 3, -1.0 / 3.0, 1e-300},
      {"x", 0, 0, 0, -0.0, 5e-324},
  };
  std::istringstream in(results_text(rows));
  const auto back = read_results_csv(in);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(back[i] == rows[i]);
  CHECK(std::signbit(back[2].ret));

  std::istringstream bad("method,seed\n");
  CHECK_THROWS_AS(read_results_csv(bad), ParseError);
}

TEST_CASE("summary groups by curve point with a Student-t interval") {
  const std::vector<ResultRow> rows{{"a", 1, 5, std::nullopt, 1.0, std::nullopt},
                                    {"a", 2, 5, std::nullopt, 2.0, std::nullopt},
                                    {"b", 1, 5, std::nullopt, 7.0, std::nullopt},
                                    {"a", 3, 5, std::nullopt, 3.0, std::nullopt},
                                    {"a", 1, 9, std::nullopt, 4.0, std::nullopt}};
  const auto s = summarize(rows);
  REQUIRE(s.size() == 3);
  CHECK(s[0].method == "a");
  CHECK(s[0].n == 3);
  CHECK(s[0].mean == doctest::Approx(2.0));
  CHECK(s[0].sd == doctest::Approx(1.0));
  // t quantile 0.975 with 2 degrees of freedom is 4.302652729749464.
  CHECK(s[0].ci95 == doctest::Approx(4.302652729749464 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(s[1].method == "b");
  CHECK(s[1].ci95 == 0.0);
  CHECK(*s[2].budget == 9);
}

TEST_CASE("stored pools round-trip bit-exactly") {
  const auto dir = scratch_dir("pools");
  SUBCASE("simulated domain") {
    BktDomain bkt(BktDomainConfig{});
    const auto pool = gather_full(bkt, 25, 77);
    save_pool(dir / "bkt.csv", pool, bkt.describe());
    CHECK(std::filesystem::exists(dir / "bkt.json"));
    const auto back = load_pool(dir / "bkt.csv");
    CHECK(back.pool.domain_id() == pool.domain_id());
    CHECK(back.pool.created_seed() == pool.created_seed());
    REQUIRE(back.pool.size() == pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) CHECK(back.pool[i] == pool[i]);
    CHECK(back.domain_params == bkt.describe());
  }
  SUBCASE("tickets with variable horizons and awkward prices") {
    PriceDataset d;
    d.series.push_back({"A-B", "2024-01-01", {3, 2, 1, 0}, {100.1, 0.1 + 0.2, 1e-7, 123456.789}});
    d.series.push_back({"A-B", "2024-01-02", {1, 0}, {5, 6}});
    const auto pool = expand_commencements(d, 1);
    save_pool(dir / "t.csv", pool, {{"max_price", max_price(pool)}});
    const auto back = load_pool(dir / "t.csv");
    REQUIRE(back.pool.size() == pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) CHECK(back.pool[i] == pool[i]);
  }
  SUBCASE("rows and sidecar must agree") {
    BktDomain bkt(BktDomainConfig{});
    const auto pool = gather_full(bkt, 2, 1);
    std::ostringstream csv;
    write_pool_csv(csv, pool);
    std::string rows = csv.str();
    rows.erase(rows.rfind('\n', rows.size() - 2) + 1);  // drop the last observation
    std::istringstream c(rows), j(pool_sidecar_json(pool, bkt.describe()));
    CHECK_THROWS_AS(read_pool(c, j), ValidationError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("fixed ticket baselines match hand-computed expenditures") {
  const auto dir = scratch_dir("tickets");
  {
    // Series 1 trains; series 2 and 3 are the test split.
    std::ofstream f(dir / "fares.csv");
    f << "route,departure_date,days_to_depart,price\n"
      << "X-Y,2024-03-01,2,50\nX-Y,2024-03-01,1,60\nX-Y,2024-03-01,0,70\n"
      << "X-Y,2024-03-02,2,100\nX-Y,2024-03-02,1,80\nX-Y,2024-03-02,0,90\n"
      << "X-Y,2024-03-03,2,40\nX-Y,2024-03-03,1,45\nX-Y,2024-03-03,0,30\n";
  }
  ExperimentConfig c;
  c.domain = "tickets";
  c.method = Method::FixedBaseline;
  c.tickets.price_csv = (dir / "fares.csv").string();
  c.tickets.min_length = 1;
  c.seeds = {1, 2};
  // Test commencements: (100,80,90) (80,90) (90) (40,45,30) (45,30) (30).
  auto value = [&](Baseline b) {
    c.baseline = b;
    const auto rows = run_experiment(c).rows;
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].ret == rows[1].ret);
    return rows[0].ret;
  };
  CHECK(value(Baseline::AlwaysHalt) == doctest::Approx(-(100 + 80 + 90 + 40 + 45 + 30) / 6.0));
  CHECK(value(Baseline::NeverHalt) == doctest::Approx(-(90 * 3 + 30 * 3) / 6.0));
  CHECK(value(Baseline::Hindsight) == doctest::Approx(-(80 + 80 + 90 + 30 + 30 + 30) / 6.0));
  std::filesystem::remove_all(dir);
}

TEST_CASE("budget and online runs produce ordered rows") {
  auto c = small_gfse();
  const auto rows = run_experiment(c).rows;
  REQUIRE(rows.size() == 6);
  CHECK(rows[0].seed == 1);
  CHECK(*rows[0].budget == 5);
  CHECK(*rows[1].budget == 20);
  CHECK(rows[5].seed == 3);
  for (const auto& r : rows) {
    CHECK(r.method == "gfse");
    CHECK_FALSE(r.episode);
    CHECK(r.ret <= 0.0);
  }

  c.budgets.clear();
  c.episodes = 8;
  c.initial_budget = 3;
  c.seeds = {4};
  const auto online = run_experiment(c).rows;
  REQUIRE(online.size() == 8);
  double sum = 0.0;
  for (std::size_t e = 0; e < online.size(); ++e) {
    CHECK(*online[e].episode == e + 1);
    CHECK(online[e].method == "gfse_3");
    sum += online[e].ret;
    CHECK(*online[e].cumulative_mean == doctest::Approx(sum / double(e + 1)));
  }
}

TEST_CASE("results do not depend on worker count") {
  auto c = small_gfse();
  c.workers = 1;
  const auto one = results_text(run_experiment(c).rows);
  c.workers = 4;
  CHECK(results_text(run_experiment(c).rows) == one);
  CHECK(results_text(run_experiment(c).rows) == one);

  c.method = Method::Mc;
  c.n_candidates = 10;
  c.budgets = {10, 30};
  c.workers = 1;
  const auto mc = results_text(run_experiment(c).rows);
  c.workers = 3;
  CHECK(results_text(run_experiment(c).rows) == mc);
}

TEST_CASE("output directory resolution and run files") {
  ExperimentConfig c = small_gfse();
  c.output_dir = "explicit";
  CHECK(resolve_output_dir(c) == "explicit");
  c.output_dir.clear();
  const auto dir = scratch_dir("out");
  ::setenv("GFSE_OUTPUT_DIR", dir.c_str(), 1);
  CHECK(resolve_output_dir(c) == dir);
  ::unsetenv("GFSE_OUTPUT_DIR");
  CHECK(resolve_output_dir(c) == "results");

  c.seeds = {1};
  c.budgets = {5};
  const auto out = run_experiment(c);
  write_run(dir / c.name, c, out);
  for (const char* f : {"results.csv", "summary.csv", "config.ini", "run.log"}) {
    CHECK(std::filesystem::exists(dir / c.name / f));
  }
  std::ifstream rin(dir / c.name / "results.csv");
  CHECK(read_results_csv(rin) == out.rows);
  const auto echoed = load_config(dir / c.name / "config.ini");
  CHECK(echo(echoed) == echo(c));
  std::filesystem::remove_all(dir);
}

TEST_CASE("figure configs are valid and labelled uniquely") {
  for (const auto& f : figure_names()) {
    const auto cfgs = figure_configs(f, seed_range(3));
    REQUIRE_FALSE(cfgs.empty());
    std::set<std::string> labels;
    for (const auto& c : cfgs) {
      CHECK_NOTHROW(c.validate());
      CHECK(c.seeds.size() == 3);
      labels.insert(c.curve_label());
    }
    CHECK(labels.size() == cfgs.size());
  }
  CHECK_THROWS_AS(figure_configs("nope", {1}), InvalidInput);
  const std::vector<ResultRow> rows{{"a", 1, {}, {}, 1, {}}, {"b", 1, {}, {}, 2, {}}, {"a", 2, {}, {}, 3, {}}};
  CHECK(curve(rows, "a").size() == 2);
}
