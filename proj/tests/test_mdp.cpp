#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "mdpkit/mdp.hpp"
#include "test_support.hpp"

using namespace mdpkit;
using namespace mdpkit::testing;

namespace {

bool report_mentions(const std::vector<std::string>& report,
                     const std::string& needle) {
  for (const auto& line : report) {
    if (line.find(needle) != std::string::npos) return true;
  }
  return false;
}

// Independent triple-loop evaluation of the induced quantities.
void induced_oracle(const Mdpd& m, const Policyd& pi, Matd& p_pi, Matd& r_sa,
                    Vecd& r_pi) {
  const Index S = m.num_states, A = m.num_actions;
  p_pi = Matd::Zero(S, S);
  r_sa = Matd::Zero(S, A);
  r_pi = Vecd::Zero(S);
  for (Index s = 0; s < S; ++s) {
    for (Index a = 0; a < A; ++a) {
      for (Index k = 0; k < S; ++k) {
        p_pi(s, k) += pi.probs(s, a) * m.transition(m.sa_row(s, a), k);
        r_sa(s, a) += m.transition(m.sa_row(s, a), k) *
                      m.reward(m.sa_row(s, a), k);
      }
      r_pi[s] += pi.probs(s, a) * r_sa(s, a);
    }
  }
}

}  // namespace

TEST_CASE("valid models produce an empty report") {
  CHECK(validate(make_m1()).empty());
  CHECK(validate(make_m2()).empty());
  CHECK(validate(only_policy(make_m2())).empty());
}

TEST_CASE("broken row sum is reported with its index path") {
  Mdpd m = make_m1();
  m.transition(0, 0) = 0.9;
  const auto report = validate(m);
  REQUIRE(report.size() == 1);
  CHECK(report_mentions(report, "transition[0][0]"));
  CHECK(report_mentions(report, "0.9"));
}

TEST_CASE("gamma outside the open interval is reported") {
  Mdpd m = make_m1();
  m.gamma = 1.0;
  CHECK(report_mentions(validate(m), "gamma out of (0,1)"));
  m.gamma = 0.0;
  CHECK(report_mentions(validate(m), "gamma out of (0,1)"));
  m.gamma = 0.5;
  CHECK(validate(m).empty());
}

TEST_CASE("every violation is collected, not just the first") {
  Mdpd m = make_m2();
  m.transition(0, 1) = 0.7;              // row sum breaks
  m.reward(1, 0) = std::nan("");         // non-finite reward
  m.rho0[0] = -0.2;                      // negative mass, sum breaks too
  const auto report = validate(m);
  CHECK(report_mentions(report, "transition[0][0] row sums"));
  CHECK(report_mentions(report, "reward[1][0][0]"));
  CHECK(report_mentions(report, "rho0[0]"));
  CHECK(report_mentions(report, "rho0 sums"));
}

TEST_CASE("induce on the single-state model") {
  const Mdpd m = make_m1();
  const auto dyn = induce(m, only_policy(m));
  CHECK(dyn.p_pi(0, 0) == 1.0);
  CHECK(dyn.r_sa(0, 0) == 1.0);
  CHECK(dyn.r_pi[0] == 1.0);
}

TEST_CASE("induce on the deterministic cycle") {
  const Mdpd m = make_m2();
  const auto dyn = induce(m, only_policy(m));
  CHECK(dyn.p_pi(0, 0) == 0.0);
  CHECK(dyn.p_pi(0, 1) == 1.0);
  CHECK(dyn.p_pi(1, 0) == 1.0);
  CHECK(dyn.p_pi(1, 1) == 0.0);
  CHECK(dyn.r_pi[0] == 1.0);
  CHECK(dyn.r_pi[1] == 0.0);
}

TEST_CASE("induced quantities match the triple-loop oracle") {
  Philox4x32 rng(101, 0);
  const Mdpd m = random_mdp(rng, 3, 2, 0.9);
  const Policyd pi = uniform_policy<double>(3, 2);
  const auto dyn = induce(m, pi);

  Matd p_ref, r_sa_ref;
  Vecd r_pi_ref;
  induced_oracle(m, pi, p_ref, r_sa_ref, r_pi_ref);

  CHECK((dyn.p_pi - p_ref).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((dyn.r_sa - r_sa_ref).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((dyn.r_pi - r_pi_ref).cwiseAbs().maxCoeff() <= 1e-12);
  for (Index s = 0; s < 3; ++s) {
    CHECK(dyn.r_pi[s] ==
          doctest::Approx(pi.probs.row(s).dot(dyn.r_sa.row(s))).epsilon(1e-12));
  }
}

TEST_CASE("rows of the induced kernel are stochastic on random instances") {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto inst = random_instance(7, i);
    const auto dyn = induce(inst.model, inst.policy);
    for (Index s = 0; s < inst.model.num_states; ++s) {
      CHECK(std::abs(dyn.p_pi.row(s).sum() - 1.0) <= 1e-12);
      CHECK(dyn.p_pi.row(s).minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("the induced kernel is linear in the policy") {
  for (std::uint64_t i = 0; i < 200; ++i) {
    Philox4x32 rng(13, i);
    const Index S = Index(rng.uniform_index(2, 8));
    const Index A = Index(rng.uniform_index(2, 4));
    const Mdpd m = random_mdp(rng, S, A, 0.9);
    const Policyd pi1 = random_policy(rng, S, A);
    const Policyd pi2 = random_policy(rng, S, A);
    const double alpha = rng.next_double();

    Policyd mix;
    mix.probs = alpha * pi1.probs + (1.0 - alpha) * pi2.probs;
    const Matd blend = alpha * induce(m, pi1).p_pi +
                       (1.0 - alpha) * induce(m, pi2).p_pi;
    CHECK((induce(m, mix).p_pi - blend).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("dimension mismatches are rejected") {
  const Mdpd m = make_m2();
  const Policyd wide = uniform_policy<double>(2, 3);
  CHECK_THROWS_AS(induce(m, wide), std::invalid_argument);
  const Policyd tall = uniform_policy<double>(3, 1);
  CHECK_THROWS_AS(induce(m, tall), std::invalid_argument);
}
