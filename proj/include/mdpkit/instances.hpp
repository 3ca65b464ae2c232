#pragma once

#include <cstdint>

#include "mdpkit/mdp.hpp"
#include "mdpkit/random.hpp"
#include "mdpkit/types.hpp"

namespace mdpkit {

/**
 * Random instance generators shared by the verification suites and the
 * command line front end. All draws come from the caller's Philox stream
 * in a fixed order (transition rows state-major, then rewards, then rho0),
 * so a (seed, stream) pair identifies an instance exactly.
 *
 * Transition, policy and initial-distribution rows are flat-Dirichlet;
 * rewards are uniform in [-1, 1].
 */
inline Mdpd random_mdp(Philox4x32& rng, Index num_states, Index num_actions,
                       double gamma) {
  Mdpd m;
  m.num_states = num_states;
  m.num_actions = num_actions;
  m.gamma = gamma;
  const Index rows = num_states * num_actions;
  m.transition.resize(rows, num_states);
  m.reward.resize(rows, num_states);
  for (Index r = 0; r < rows; ++r) {
    m.transition.row(r) = dirichlet_flat(rng, num_states).transpose();
  }
  for (Index r = 0; r < rows; ++r) {
    for (Index k = 0; k < num_states; ++k) {
      m.reward(r, k) = rng.uniform(-1.0, 1.0);
    }
  }
  m.rho0 = dirichlet_flat(rng, num_states);
  return m;
}

inline Policyd random_policy(Philox4x32& rng, Index num_states,
                             Index num_actions) {
  Policyd pi;
  pi.probs.resize(num_states, num_actions);
  for (Index s = 0; s < num_states; ++s) {
    pi.probs.row(s) = dirichlet_flat(rng, num_actions).transpose();
  }
  return pi;
}

inline Vecd random_vector(Philox4x32& rng, Index n, double lo, double hi) {
  Vecd x(n);
  for (Index i = 0; i < n; ++i) x[i] = rng.uniform(lo, hi);
  return x;
}

/// Discount grid used by the randomized suites.
inline double random_gamma(Philox4x32& rng) {
  static constexpr double kGrid[3] = {0.5, 0.9, 0.99};
  return kGrid[rng.uniform_index(0, 2)];
}

}  // namespace mdpkit
