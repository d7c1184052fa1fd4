#include <doctest.h>

#include <cmath>
#include <random>

#include "gfse/bounds.hpp"
#include "gfse/errors.hpp"
#include "gfse/evaluation.hpp"

using namespace gfse;

namespace {

BoundInputs reference() {
  BoundInputs in;
  in.epsilon = 0.1;
  in.delta = 0.05;
  in.v_max = 1.0;
  in.vc_dim = 2;
  in.horizon = 20;
  in.constant_c = 1.0;
  return in;
}

// Independent restatement of the trajectory count.
double bound_formula(const BoundInputs& in) {
  const double ratio = in.v_max / in.epsilon;
  return in.constant_c * ratio * ratio *
         (in.vc_dim * std::log(double(in.horizon)) + std::log(1.0 / in.delta));
}

std::vector<EvalReport> reports_of_size(std::size_t n, std::size_t count = 3) {
  std::vector<EvalReport> out(count);
  for (auto& r : out) r.n_used = n;
  return out;
}

}  // namespace

TEST_CASE("reference trajectory counts") {
  auto in = reference();
  CHECK(required_trajectories(in) == 899);
  in.v_max = 2.0;
  CHECK(required_trajectories(in) == 3595);
  in = reference();
  in.horizon = 400;
  CHECK(required_trajectories(in) == 1498);
}

TEST_CASE("count matches the closed form on random inputs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    BoundInputs in;
    in.epsilon = 0.05 + u(rng);
    in.delta = 0.01 + 0.9 * u(rng);
    in.v_max = 0.1 + 10 * u(rng);
    in.vc_dim = 1 + unsigned(10 * u(rng));
    in.horizon = 2 + std::size_t(500 * u(rng));
    in.constant_c = 0.1 + 2 * u(rng);
    CHECK(required_trajectories(in) == std::uint64_t(std::ceil(bound_formula(in))));
  }
}

TEST_CASE("invalid inputs are rejected") {
  auto in = reference();
  in.epsilon = 0;
  CHECK_THROWS_AS(required_trajectories(in), InvalidInput);
  in = reference();
  in.delta = 1.0;
  CHECK_THROWS_AS(required_trajectories(in), InvalidInput);
  in.delta = 0.0;
  CHECK_THROWS_AS(required_trajectories(in), InvalidInput);
  in = reference();
  in.horizon = 1;
  CHECK_THROWS_AS(required_trajectories(in), InvalidInput);
  in = reference();
  in.vc_dim = 0;
  CHECK_THROWS_AS(required_trajectories(in), InvalidInput);
  in = reference();
  in.v_max = -1;
  CHECK_THROWS_AS(required_trajectories(in), InvalidInput);
}

TEST_CASE("property: monotone in every argument") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    BoundInputs a;
    a.epsilon = 0.05 + u(rng);
    a.delta = 0.01 + 0.5 * u(rng);
    a.v_max = 0.5 + u(rng);
    a.vc_dim = 1 + unsigned(5 * u(rng));
    a.horizon = 2 + std::size_t(100 * u(rng));
    const auto n = required_trajectories(a);
    auto b = a;
    b.v_max *= 1.5;
    CHECK(required_trajectories(b) >= n);
    b = a;
    b.vc_dim += 1;
    CHECK(required_trajectories(b) >= n);
    b = a;
    b.horizon *= 2;
    CHECK(required_trajectories(b) >= n);
    b = a;
    b.epsilon /= 2;
    CHECK(required_trajectories(b) >= n);
    b = a;
    b.delta /= 2;
    CHECK(required_trajectories(b) >= n);
  }
}

TEST_CASE("property: squaring the horizon less than doubles n when the VC term dominates") {
  for (std::size_t h : {5u, 20u, 100u, 400u}) {
    auto in = reference();
    in.horizon = h;
    REQUIRE(in.vc_dim * std::log(double(h)) >= std::log(1.0 / in.delta));
    const auto n = required_trajectories(in);
    in.horizon = h * h;
    CHECK(required_trajectories(in) < 2 * n);
  }
}

TEST_CASE("certification at and below the bound") {
  const auto in = reference();
  CHECK(certify_estimates(reports_of_size(899), in));
  CHECK_FALSE(certify_estimates(reports_of_size(898), in));
  CHECK_FALSE(certify_estimates(reports_of_size(0), in));
  CHECK_FALSE(certify_pool_size(0, in));
  CHECK(certify_pool_size(899, in));
  auto mixed = reports_of_size(899);
  mixed[1].n_used = 900;
  CHECK_THROWS_AS(certify_estimates(mixed, in), InvalidInput);
}
