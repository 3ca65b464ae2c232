#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mdpkit/value.hpp"
#include "test_support.hpp"

using namespace mdpkit;
using namespace mdpkit::testing;

TEST_CASE("single self-loop evaluates to r/(1-gamma)") {
  const Mdpd m = make_m1();
  const Vecd v = evaluate_exact(induce(m, only_policy(m)), m.gamma);
  CHECK(v[0] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("cycle values solve the 2x2 system by hand") {
  // v0 = 1 + 0.5 v1, v1 = 0.5 v0  =>  v0 = 4/3, v1 = 2/3.
  const Mdpd m = make_m2();
  const Vecd v = evaluate_exact(induce(m, only_policy(m)), m.gamma);
  CHECK(v[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  CHECK(v[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
}

TEST_CASE("exact evaluation matches the fixed-point iteration") {
  Philox4x32 rng(53, 0);
  const Mdpd m = random_mdp(rng, 6, 3, 0.9);
  const Policyd pi = random_policy(rng, 6, 3);
  const auto dyn = induce(m, pi);
  const Vecd exact = evaluate_exact(dyn, m.gamma);
  const auto iter = evaluate_iterative(dyn, m.gamma, 1e-9, 100000);
  CHECK((exact - iter.v).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(iter.iterations > 1);
}

TEST_CASE("iteration converges on the self-loop and reports its count") {
  const Mdpd m = make_m1();
  const auto res = evaluate_iterative(induce(m, only_policy(m)), 0.5, 1e-10,
                                      1000);
  CHECK(std::abs(res.v[0] - 2.0) <= 1e-10);
  CHECK(res.iterations >= 30);  // 2^-k decay needs ~34 halvings
}

TEST_CASE("successive steps contract by at least gamma") {
  Philox4x32 rng(59, 0);
  const Mdpd m = random_mdp(rng, 8, 3, 0.9);
  const Policyd pi = random_policy(rng, 8, 3);
  const auto dyn = induce(m, pi);

  Vecd v = Vecd::Zero(8);
  double prev_step = -1.0;
  for (int k = 0; k < 60; ++k) {
    Vecd next = dyn.r_pi + m.gamma * (dyn.p_pi * v);
    const double step = (next - v).lpNorm<Eigen::Infinity>();
    if (prev_step >= 0.0) CHECK(step <= m.gamma * prev_step + 1e-14);
    prev_step = step;
    v = next;
  }
}

TEST_CASE("cycle iteration agrees with the closed form") {
  const Mdpd m = make_m2();
  const auto dyn = induce(m, only_policy(m));
  const auto res = evaluate_iterative(dyn, m.gamma, 1e-10, 10000);
  const Vecd exact = evaluate_exact(dyn, m.gamma);
  CHECK((res.v - exact).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("exhausted iteration budget carries the last iterate") {
  Philox4x32 rng(61, 0);
  const Mdpd m = random_mdp(rng, 5, 2, 0.99);
  const auto dyn = induce(m, uniform_policy<double>(5, 2));
  try {
    evaluate_iterative(dyn, m.gamma, 1e-12, 3);
    FAIL("expected NoConvergenceError");
  } catch (const NoConvergenceError& e) {
    CHECK(e.last_iterate.size() == 5);
    CHECK(e.residual > 0.0);
  }
}

TEST_CASE("bellman residual of the exact solve stays tiny") {
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto inst = random_instance(67, i);
    const auto dyn = induce(inst.model, inst.policy);
    const Vecd v = evaluate_exact(dyn, inst.model.gamma);
    // Split form: mean of current rewards plus discounted mean of next
    // values must reproduce v state by state.
    for (Index s = 0; s < inst.model.num_states; ++s) {
      const double current = dyn.r_pi[s];
      const double future = inst.model.gamma * dyn.p_pi.row(s).dot(v);
      CHECK(std::abs(v[s] - (current + future)) <= 1e-10);
    }
  }
}

TEST_CASE("single-action tables have zero advantage") {
  const Mdpd m1 = make_m1();
  const auto b1 = q_and_advantage(m1, only_policy(m1),
                                  evaluate_exact(induce(m1, only_policy(m1)),
                                                 m1.gamma));
  CHECK(b1.q(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(b1.adv(0, 0) == 0.0);

  const Mdpd m2 = make_m2();
  const auto b2 = q_and_advantage(m2, only_policy(m2),
                                  evaluate_exact(induce(m2, only_policy(m2)),
                                                 m2.gamma));
  CHECK(b2.q(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-13));
  CHECK(b2.q(1, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  CHECK(b2.adv.cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("advantages average to zero under the evaluated policy") {
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto inst = random_instance(71, i);
    const Vecd v = evaluate_exact(induce(inst.model, inst.policy),
                                  inst.model.gamma);
    const auto bundle = q_and_advantage(inst.model, inst.policy, v);
    CHECK((bundle.adv - (bundle.q.colwise() - v)).cwiseAbs().maxCoeff() ==
          0.0);
    for (Index s = 0; s < inst.model.num_states; ++s) {
      CHECK(std::abs(inst.policy.probs.row(s).dot(bundle.adv.row(s))) <=
            1e-10);
      CHECK(std::abs(inst.policy.probs.row(s).dot(bundle.q.row(s)) - v[s]) <=
            1e-10);
    }
  }
}

TEST_CASE("shifting every reward by c shifts values by c/(1-gamma)") {
  Philox4x32 rng(73, 0);
  const Mdpd m = random_mdp(rng, 7, 3, 0.9);
  const Policyd pi = random_policy(rng, 7, 3);
  const double c = 0.37;

  Mdpd shifted = m;
  shifted.reward.array() += c;
  const Vecd v = evaluate_exact(induce(m, pi), m.gamma);
  const Vecd vs = evaluate_exact(induce(shifted, pi), m.gamma);
  const Vecd expected = v.array() + c / (1.0 - m.gamma);
  CHECK((vs - expected).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("bad arguments are rejected") {
  const Mdpd m = make_m2();
  const auto dyn = induce(m, only_policy(m));
  CHECK_THROWS_AS(evaluate_exact(dyn, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_iterative(dyn, 0.5, 0.0, 10),
                  std::invalid_argument);
  const Vecd bad = Vecd::Zero(3);
  CHECK_THROWS_AS(q_and_advantage(m, only_policy(m), bad),
                  std::invalid_argument);
}
