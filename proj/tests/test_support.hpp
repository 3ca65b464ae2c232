#pragma once

#include <cstdint>

#include "mdpkit/instances.hpp"
#include "mdpkit/mdp.hpp"

namespace mdpkit::testing {

/// Single state, single action, self-loop with reward 1.
inline Mdpd make_m1(double gamma = 0.5) {
  Mdpd m;
  m.num_states = 1;
  m.num_actions = 1;
  m.transition = Matd::Constant(1, 1, 1.0);
  m.reward = Matd::Constant(1, 1, 1.0);
  m.rho0 = Vecd::Constant(1, 1.0);
  m.gamma = gamma;
  return m;
}

/// Two-state deterministic cycle with a single action:
/// s0 -> s1 pays 1, s1 -> s0 pays 0; starts at s0.
inline Mdpd make_m2(double gamma = 0.5) {
  Mdpd m;
  m.num_states = 2;
  m.num_actions = 1;
  m.transition.resize(2, 2);
  m.transition << 0.0, 1.0,
                  1.0, 0.0;
  m.reward.resize(2, 2);
  m.reward << 0.0, 1.0,
              0.0, 0.0;
  m.rho0.resize(2);
  m.rho0 << 1.0, 0.0;
  m.gamma = gamma;
  return m;
}

inline Policyd only_policy(const Mdpd& m) {
  return uniform_policy<double>(m.num_states, m.num_actions);
}

/// Model + policy drawn from one dedicated stream of the given seed.
struct RandomInstance {
  Mdpd model;
  Policyd policy;
};

inline RandomInstance random_instance(std::uint64_t seed, std::uint64_t stream,
                                      Index max_states = 20,
                                      Index max_actions = 5) {
  Philox4x32 rng(seed, stream);
  const Index S = Index(rng.uniform_index(2, max_states));
  const Index A = Index(rng.uniform_index(2, max_actions));
  const double gamma = random_gamma(rng);
  RandomInstance inst;
  inst.model = random_mdp(rng, S, A, gamma);
  inst.policy = random_policy(rng, S, A);
  return inst;
}

}  // namespace mdpkit::testing
