#include <doctest.h>

#include <cmath>
#include <deque>
#include <random>
#include <sstream>

#include "gfse/bkt_filter.hpp"
#include "gfse/environments.hpp"
#include "gfse/errors.hpp"
#include "gfse/policies.hpp"
#include "support.hpp"

using namespace gfse;
using gfse::testing::ticket_trajectory;

namespace {

const BktParams kParams{0.18, 0.2, 0.2, 0.1};

SchemaPtr correct_schema() {
  static const SchemaPtr s = std::make_shared<FeatureSchema>(std::vector<std::string>{"correct"});
  return s;
}

std::vector<double> bits_of(unsigned mask, std::size_t n) {
  std::vector<double> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back((mask >> i) & 1u);
  return v;
}

// P(o_{n+1} = correct | o_1..o_n) by summing the joint over every latent
// mastery path of length n + 1.
double brute_force_predict(const BktParams& p, const std::vector<double>& obs) {
  const std::size_t n = obs.size();
  double joint_next = 0.0;
  double joint = 0.0;
  for (unsigned path = 0; path < (1u << (n + 1)); ++path) {
    double w = 1.0;
    for (std::size_t t = 0; t <= n; ++t) {
      const int s = (path >> t) & 1u;
      if (t == 0) {
        w *= s ? p.p_init : 1.0 - p.p_init;
      } else {
        const int prev = (path >> (t - 1)) & 1u;
        if (prev == 1) w *= s == 1 ? 1.0 : 0.0;
        else w *= s == 1 ? p.p_learn : 1.0 - p.p_learn;
      }
      if (t < n) {
        const double pc = s ? 1.0 - p.p_slip : p.p_guess;
        w *= obs[t] == 1.0 ? pc : 1.0 - pc;
      }
    }
    const int last = (path >> n) & 1u;
    joint += w;
    joint_next += w * (last ? 1.0 - p.p_slip : p.p_guess);
  }
  return joint_next / joint;
}

double predict(const BktThresholdPolicy& pol, const std::vector<double>& obs) {
  return pol.predict_correct(Prefix(*correct_schema(), obs));
}

// Prefixes are views; keep their rows alive for the whole test run.
Prefix prefix_of(std::vector<double> obs) {
  static std::deque<std::vector<double>> keep;
  keep.push_back(std::move(obs));
  return Prefix(*correct_schema(), keep.back());
}

Prefix asset_prefix(const std::vector<double>& xs) {
  static const SchemaPtr s = std::make_shared<FeatureSchema>(std::vector<std::string>{"X", "Y1"});
  static std::deque<std::vector<double>> keep;
  auto& rows = keep.emplace_back();
  for (double x : xs) {
    rows.push_back(x);
    rows.push_back(x);
  }
  return Prefix(*s, rows);
}

}  // namespace

TEST_CASE("simple ticket rule examples") {
  TicketSimplePolicy p(400, 5);
  CHECK(p.decide(ticket_trajectory({450}, {30}).prefix()) == Action::Continue);
  CHECK(p.decide(ticket_trajectory({390}, {30}).prefix()) == Action::Halt);
  CHECK(p.decide(ticket_trajectory({450}, {3}).prefix()) == Action::Halt);
  CHECK_THROWS_AS(TicketSimplePolicy(-1, 0), InvalidInput);
}

TEST_CASE("ticket rules need price and days") {
  BktDomain bkt(BktDomainConfig{});
  CHECK_THROWS_AS(TicketSimplePolicy(1, 1).decide(bkt.sample(1).prefix()), SchemaError);
}

TEST_CASE("complex ticket bands") {
  // b1 = 20, b2 = 10, b3 = 2 after sorting.
  TicketComplexPolicy p(300, 400, 500, 10, 2, 20);
  CHECK(p.theta() == std::vector<double>{300, 400, 500, 20, 10, 2});
  CHECK_FALSE(p.buys(350, 25));
  CHECK(p.buys(300, 25));
  CHECK(p.buys(350, 15));
  CHECK_FALSE(p.buys(450, 15));
  CHECK(p.buys(450, 5));
  CHECK_FALSE(p.buys(550, 5));
  CHECK(p.buys(10000, 2));
  CHECK(p.buys(10000, 0));
}

TEST_CASE("complex class contains the simple class") {
  Rng rng(5);
  std::uniform_real_distribution<double> price(100, 900), days(0, 60);
  for (int i = 0; i < 200; ++i) {
    const double t0 = price(rng), t1 = days(rng);
    TicketSimplePolicy s(t0, t1);
    TicketComplexPolicy c(t0, t0, t0, t1, t1, t1);
    for (int j = 0; j < 50; ++j) {
      const double pr = price(rng), d = days(rng);
      CHECK(s.buys(pr, d) == c.buys(pr, d));
    }
  }
}

TEST_CASE("property: raising the price threshold only turns waits into buys") {
  Rng rng(8);
  std::uniform_real_distribution<double> price(100, 900), days(0, 60);
  for (int i = 0; i < 2000; ++i) {
    const double t0 = price(rng), t1 = days(rng), pr = price(rng), d = days(rng);
    if (TicketSimplePolicy(t0, t1).buys(pr, d)) CHECK(TicketSimplePolicy(t0 + 50, t1).buys(pr, d));
  }
}

TEST_CASE("BKT prediction reference values") {
  BktThresholdPolicy pol(kParams, 0.5);
  CHECK(predict(pol, {}) == doctest::Approx(0.326).epsilon(1e-12));
  CHECK(predict(pol, {1, 1}) == doctest::Approx(brute_force_predict(kParams, {1, 1})).epsilon(1e-12));
  BktThresholdPolicy mastered({1.0, 0.2, 0.2, 0.1}, 0.5);
  CHECK(predict(mastered, {}) == doctest::Approx(0.9));
  CHECK(predict(mastered, {0, 1, 0, 0}) == doctest::Approx(0.9));
}

TEST_CASE("BKT filter equals brute-force enumeration on all short histories") {
  const std::vector<BktParams> params{kParams, {0.5, 0.05, 0.3, 0.25}, {0.01, 0.6, 0.45, 0.02}};
  for (const auto& p : params) {
    BktThresholdPolicy pol(p, 0.5);
    double worst = 0.0;
    for (std::size_t n = 0; n <= 8; ++n) {
      for (unsigned mask = 0; mask < (1u << n); ++mask) {
        const auto obs = bits_of(mask, n);
        worst = std::max(worst, std::abs(predict(pol, obs) - brute_force_predict(p, obs)));
      }
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("BKT decisions") {
  const auto t = prefix_of({0, 1, 1, 0});
  CHECK(BktThresholdPolicy(kParams, 0.0).decide(t.first(1)) == Action::Halt);
  CHECK_FALSE(BktThresholdPolicy(kParams, 1.0).first_halt(t).has_value());
  CHECK(BktThresholdPolicy(kParams, 0.3).decide(t.first(1)) == Action::Halt);
  CHECK(BktThresholdPolicy(kParams, 0.33).decide(t.first(1)) == Action::Continue);
  // Step t decides on the first t - 1 responses.
  BktThresholdPolicy mid(kParams, 0.5);
  CHECK((mid.decide(t.first(3)) == Action::Halt) == (predict(mid, {0, 1}) > 0.5));
  CHECK_THROWS_AS(mid.decide(prefix_of({0.5, 1})), SchemaError);
  CHECK_THROWS_AS(BktThresholdPolicy(kParams, 0.99).first_halt(prefix_of({1, 2, 1})), SchemaError);
}

TEST_CASE("property: a correct answer never lowers mastery when guess + slip < 1") {
  for (double pi : {0.05, 0.3, 0.7})
    for (double pt : {0.0, 0.1, 0.4})
      for (double pg : {0.05, 0.2, 0.4})
        for (double ps : {0.05, 0.2, 0.4}) {
          if (pg + ps >= 1.0) continue;
          BktFilter f({pi, pt, pg, ps});
          for (int k = 0; k < 6; ++k) {
            BktFilter g = f;
            g.observe(true);
            CHECK(g.p_mastered() >= f.p_mastered() - 1e-15);
            f.observe(k % 2 == 0);
          }
        }
}

TEST_CASE("AFM rule examples") {
  AfmThresholdPolicy flat(0, 0, 0.4);
  CHECK(flat.predict_correct(prefix_of({1, 0, 1})) == 0.5);
  CHECK(flat.decide(prefix_of({1})) == Action::Halt);
  CHECK(AfmThresholdPolicy(0, 0, 0.6).decide(prefix_of({1})) == Action::Continue);

  AfmThresholdPolicy p(0, 1, 0.8);
  CHECK(p.predict_correct(prefix_of({1, 1})) == doctest::Approx(0.881).epsilon(5e-4));
  CHECK(p.decide_on_history(prefix_of({1, 1})) == Action::Halt);
  CHECK(p.decide(prefix_of({1, 1, 0})) == Action::Halt);
  CHECK(p.predict_correct(prefix_of({1, 0, 0, 1, 0})) == p.predict_correct(prefix_of({1, 1})));
  CHECK_THROWS_AS(p.predict_correct(prefix_of({3})), SchemaError);
}

TEST_CASE("asset rule examples") {
  AssetLogisticPolicy p(-5, 10, 0.5, 100);
  CHECK(p.depreciation(100) == 0.0);
  CHECK(p.depreciation(0) == 1.0);
  CHECK(p.depreciation(-5) == 1.0);
  CHECK(p.halting_depreciation() == doctest::Approx(0.5));
  CHECK(p.decide(asset_prefix({100})) == Action::Continue);
  CHECK(p.decide(asset_prefix({100, 50})) == Action::Continue);
  CHECK(p.decide(asset_prefix({100, 49})) == Action::Halt);
  CHECK(p.first_halt(asset_prefix({100, 80, 60, 51, 45, 20})) == 5u);

  AssetLogisticPolicy eager(3, 0, 0.5, 100);
  CHECK(eager.decide(asset_prefix({100})) == Action::Halt);
  CHECK(eager.halting_depreciation() == 0.0);
  AssetLogisticPolicy lazy(-3, -1, 0.5, 100);
  CHECK(lazy.halting_depreciation() == 1.0);
  CHECK_THROWS_AS(p.decide(prefix_of({1})), SchemaError);
}

TEST_CASE("halting depreciation agrees with a dense scan") {
  const auto cls = asset_logistic_class(100);
  Rng rng(21);
  for (int i = 0; i < 500; ++i) {
    const auto base = cls->sample(rng);
    const auto& p = dynamic_cast<const AssetLogisticPolicy&>(*base);
    const auto th = p.theta();
    double scan = 1.0;
    for (int k = 0; k <= 10000; ++k) {
      const double d = k / 10000.0;
      if (logistic(th[0] + th[1] * d) > th[2]) {
        scan = d;
        break;
      }
    }
    CHECK(std::abs(scan - p.halting_depreciation()) <= 1.5e-4);
  }
}

TEST_CASE("classes sample inside their boxes and reject points outside") {
  const std::vector<PolicyClassPtr> classes{ticket_simple_class(0, 800, 60),
                                            ticket_complex_class(0, 800, 60),
                                            bkt_threshold_class(), afm_threshold_class(),
                                            asset_logistic_class(100)};
  const std::vector<unsigned> hints{3, 7, 6, 4, 4};
  Rng rng(2);
  for (std::size_t c = 0; c < classes.size(); ++c) {
    const auto& cls = *classes[c];
    CHECK(cls.d_hint() == hints[c]);
    for (int i = 0; i < 200; ++i) {
      std::vector<double> u(cls.dimension());
      for (auto& x : u) x = std::uniform_real_distribution<double>(0, 1)(rng);
      const auto theta = cls.from_unit(u);
      for (std::size_t k = 0; k < theta.size(); ++k) {
        CHECK(theta[k] >= cls.box()[k].lo);
        CHECK(theta[k] <= cls.box()[k].hi);
      }
      const auto back = cls.to_unit(theta);
      for (std::size_t k = 0; k < u.size(); ++k) CHECK(back[k] == doctest::Approx(u[k]));
      CHECK_NOTHROW(cls.make(theta));
    }
    std::vector<double> outside(cls.dimension(), 0.0);
    outside[0] = cls.box()[0].hi + 1.0;
    CHECK_THROWS_AS(cls.make(outside), InvalidInput);
    CHECK_THROWS_AS(cls.make(std::vector<double>(cls.dimension() + 1, 0.0)), InvalidInput);
  }
}

TEST_CASE("policy records round-trip exactly") {
  Rng rng(13);
  for (const auto& cls : {ticket_simple_class(0, 800, 60), ticket_complex_class(0, 800, 60),
                          bkt_threshold_class(), afm_threshold_class(), asset_logistic_class(100)}) {
    for (int i = 0; i < 50; ++i) {
      const auto p = cls->sample(rng);
      std::stringstream ss;
      write_policy(ss, *p);
      const auto q = read_policy(ss);
      CHECK(q->class_id() == p->class_id());
      CHECK(q->parameters() == p->parameters());
    }
  }
  std::stringstream ss;
  write_policy(ss, NeverHaltPolicy{});
  CHECK(read_policy(ss)->class_id() == NeverHaltPolicy::kClassId);
}

TEST_CASE("malformed policy records report the line") {
  std::istringstream bad("class_id = ticket_simple\ntheta0 = 400\ntheta1 = five\n");
  try {
    read_policy(bad);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream missing("class_id = ticket_simple\ntheta0 = 400\n");
  CHECK_THROWS_AS(read_policy(missing), ValidationError);
  std::istringstream unknown("class_id = nope\n");
  CHECK_THROWS_AS(read_policy(unknown), ValidationError);
}
