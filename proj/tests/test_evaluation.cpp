#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gfse/environments.hpp"
#include "gfse/errors.hpp"
#include "gfse/evaluation.hpp"
#include "gfse/policies.hpp"
#include "support.hpp"

using namespace gfse;
using gfse::testing::ticket_countdown;
using gfse::testing::ticket_trajectory;

namespace {

TrajectoryPool ticket_pool(const std::vector<std::vector<double>>& series) {
  TrajectoryPool pool(ticket_schema(), "tickets", 0);
  for (std::size_t i = 0; i < series.size(); ++i) pool.append(ticket_countdown(series[i], i));
  return pool;
}

TrajectoryPool random_ticket_pool(std::size_t n, std::uint64_t seed) {
  SynthPriceConfig cfg;
  cfg.n_series = n;
  return expand_commencements(synth_prices(cfg, seed), 30);
}

}  // namespace

TEST_CASE("gather_full is deterministic and sized") {
  BktDomain bkt(BktDomainConfig{});
  const auto a = gather_full(bkt, 3, 7);
  const auto b = gather_full(bkt, 3, 7);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a[i] == b[i]);
  CHECK_FALSE(a[0] == a[1]);

  AssetDomain asset(AssetDomainConfig{});
  const auto big = gather_full(asset, 1000, 1);
  CHECK(big.size() == 1000);
  for (const auto& t : big) CHECK(t.length() == asset.horizon());
  CHECK(big[10].seed() == split_seed(1, 10));
}

TEST_CASE("degenerate BKT students answer everything correctly") {
  BktDomainConfig cfg;
  cfg.params.p_init = 1.0;
  cfg.params.p_slip = 0.0;
  BktDomain bkt(cfg);
  for (const auto& t : gather_full(bkt, 50, 2)) {
    for (double v : t.rows()) CHECK(v == 1.0);
  }
}

TEST_CASE("evaluate reference examples") {
  TicketReward reward(1000);
  const auto pool = ticket_pool({{380, 500, 600}, {400, 300, 650}, {420, 410, 700}});
  const auto r = evaluate(AlwaysHaltPolicy{}, pool, reward);
  CHECK(r.estimate == -400.0);
  CHECK(r.n_used == 3);
  CHECK(r.per_trajectory_returns == std::vector<double>{-380, -400, -420});
  const auto last = evaluate(NeverHaltPolicy{}, pool, reward);
  CHECK(last.estimate == doctest::Approx(-650.0));

  const auto single = ticket_pool({{500, 420, 390, 610}});
  TicketSimplePolicy p(400, 0.5);
  CHECK(evaluate(p, single, reward).estimate == simulate_return(p, single[0], reward));

  TrajectoryPool empty(ticket_schema(), "tickets", 0);
  CHECK_THROWS_AS(evaluate(p, empty, reward), InvalidInput);
}

TEST_CASE("estimate is the mean of per-trajectory simulated returns") {
  AssetDomain asset(AssetDomainConfig{});
  const auto pool = gather_full(asset, 200, 5);
  const auto cls = asset_logistic_class(100);
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const auto p = cls->sample(rng);
    const auto r = evaluate(*p, pool, asset.reward());
    REQUIRE(r.per_trajectory_returns.size() == pool.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      CHECK(r.per_trajectory_returns[j] == simulate_return(*p, pool[j], asset.reward()));
      sum += r.per_trajectory_returns[j];
    }
    CHECK(r.estimate == doctest::Approx(sum / double(pool.size())).epsilon(1e-12));
    CHECK(r.policy_theta == p->theta());
  }
}

TEST_CASE("evaluate_batch equals evaluate per policy and ignores worker count") {
  const auto pool = random_ticket_pool(20, 3);
  TicketReward reward(max_price(pool));
  const auto cls = ticket_simple_class(0, reward.v_max(), pool.horizon());
  Rng rng(2);
  std::vector<PolicyPtr> policies{std::make_shared<AlwaysHaltPolicy>(),
                                  std::make_shared<NeverHaltPolicy>()};
  for (int i = 0; i < 498; ++i) policies.push_back(cls->sample(rng));

  const auto one = evaluate_batch(policies, pool, reward, 1);
  const auto many = evaluate_batch(policies, pool, reward, 4);
  REQUIRE(one.size() == 500);
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const auto direct = evaluate(*policies[i], pool, reward);
    CHECK(one[i].estimate == direct.estimate);
    CHECK(many[i].estimate == direct.estimate);
    CHECK(many[i].per_trajectory_returns == direct.per_trajectory_returns);
    CHECK(std::abs(one[i].estimate) <= reward.v_max());
  }
}

TEST_CASE("estimate does not depend on trajectory order") {
  AssetDomain asset(AssetDomainConfig{});
  const auto pool = gather_full(asset, 300, 9);
  std::vector<Trajectory> shuffled(pool.begin(), pool.end());
  std::shuffle(shuffled.begin(), shuffled.end(), Rng(4));
  TrajectoryPool other(pool.schema(), pool.domain_id(), 0);
  for (auto& t : shuffled) other.append(t);
  const auto cls = asset_logistic_class(100);
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const auto p = cls->sample(rng);
    CHECK(evaluate(*p, pool, asset.reward()).estimate == evaluate(*p, other, asset.reward()).estimate);
  }
}

TEST_CASE("pool append validates its input") {
  TrajectoryPool pool(ticket_schema(), "tickets", 0);
  BktDomain bkt(BktDomainConfig{});
  CHECK_THROWS_AS(pool.append(bkt.sample(1)), InvalidInput);
  CHECK_THROWS_AS(pool.append(Trajectory(ticket_schema(), {1, 2}, 3, 0, "tickets")), InvalidInput);
  pool.append(ticket_countdown({1, 2, 3}));
  pool.append(ticket_countdown({1, 2}));
  CHECK(pool.variable_horizon());
  CHECK(pool.horizon() == 3);
}

TEST_CASE("Monte Carlo budget split") {
  BktDomain bkt(BktDomainConfig{});
  const auto cls = bkt_threshold_class();
  Rng rng(3);
  std::vector<PolicyPtr> ps;
  for (int i = 0; i < 100; ++i) ps.push_back(cls->sample(rng));
  for (const auto& r : monte_carlo_on_policy(ps, bkt, 100, 1)) CHECK(r.n_used == 1);
  for (const auto& r : monte_carlo_on_policy(ps, bkt, 1000, 1)) CHECK(r.n_used == 10);
  std::vector<PolicyPtr> two(ps.begin(), ps.begin() + 2);
  for (const auto& r : monte_carlo_on_policy(two, bkt, 5, 1)) CHECK(r.n_used == 2);
  CHECK_THROWS_AS(monte_carlo_on_policy(ps, bkt, 99, 1), InvalidInput);

  const auto a = monte_carlo_on_policy(two, bkt, 20, 7);
  const auto b = monte_carlo_on_policy(two, bkt, 20, 7);
  CHECK(a[0].per_trajectory_returns == b[0].per_trajectory_returns);
  // Episode e of policy j replays the stream split_seed(split_seed(seed, j), e).
  CHECK(a[1].per_trajectory_returns[3] ==
        run_on_policy(*two[1], bkt, split_seed(split_seed(7, 1), 3)).ret);
}

TEST_CASE("argmax ties go to the lowest index") {
  std::vector<EvalReport> r(4);
  r[0].estimate = 1;
  r[1].estimate = 3;
  r[2].estimate = 3;
  r[3].estimate = 2;
  CHECK(argmax_estimate(r) == 1);
  CHECK_THROWS_AS(argmax_estimate(std::span<const EvalReport>{}), InvalidInput);
}

TEST_CASE("coupling: on-policy returns equal simulated returns for every domain") {
  BktDomain bkt(BktDomainConfig{});
  AssetDomain asset(AssetDomainConfig{});
  const auto tickets = random_ticket_pool(10, 1);
  TicketReplayDomain replay(tickets);
  struct Case {
    const StoppingDomain* domain;
    PolicyClassPtr cls;
  };
  const std::vector<Case> cases{
      {&bkt, bkt_threshold_class()},
      {&bkt, afm_threshold_class()},
      {&asset, asset_logistic_class(100)},
      {&replay, ticket_simple_class(0, max_price(tickets), tickets.horizon())},
      {&replay, ticket_complex_class(0, max_price(tickets), tickets.horizon())},
  };
  Rng rng(12);
  for (const auto& c : cases) {
    for (int i = 0; i < 200; ++i) {
      const auto p = c.cls->sample(rng);
      const auto seed = split_seed(77, i);
      CHECK(run_on_policy(*p, *c.domain, seed).ret ==
            simulate_return(*p, c.domain->sample(seed), c.domain->reward()));
    }
  }
}

TEST_CASE("evaluate_where_valid uses truncated trajectories only when informative") {
  TicketReward reward(1000);
  std::vector<Trajectory> stored{
      ticket_trajectory({500, 450, 380}, {2, 1, 0}),
      Trajectory(ticket_schema(), {450, 5, 390, 4}, 6, 1, "tickets"),
  };
  const auto early = evaluate_where_valid(TicketSimplePolicy(400, 0), stored, reward);
  CHECK(early.n_used == 2);
  CHECK(early.estimate == doctest::Approx((-380.0 - 390.0) / 2));
  const auto late = evaluate_where_valid(TicketSimplePolicy(300, 0), stored, reward);
  CHECK(late.n_used == 1);
  CHECK(late.estimate == -380.0);
}

TEST_CASE("property: estimates are unbiased on the toy domain") {
  gfse::testing::ToyDomain toy;
  const auto policies = gfse::testing::toy_policy_class();
  for (std::size_t idx : {0u, 5u, 13u, 22u, 31u}) {
    const double exact = gfse::testing::toy_exact_value(*policies[idx]);
    std::vector<double> means;
    for (int rep = 0; rep < 400; ++rep) {
      means.push_back(evaluate(*policies[idx], gather_full(toy, 25, split_seed(idx, rep)), toy.reward()).estimate);
    }
    const double m = std::accumulate(means.begin(), means.end(), 0.0) / means.size();
    double ss = 0.0;
    for (double x : means) ss += (x - m) * (x - m);
    const double se = std::sqrt(ss / (means.size() - 1) / means.size());
    CHECK(std::abs(m - exact) <= 3 * se + 1e-12);
  }
}
