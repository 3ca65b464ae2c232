#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "mdpkit/mdp.hpp"
#include "mdpkit/random.hpp"
#include "mdpkit/types.hpp"

namespace mdpkit {

/**
 * One sampled rollout s_0, a_0, r_1, s_1, ..., r_T, s_T.
 * returns_to_go holds G_t = r_{t+1} + gamma G_{t+1}, computed backward with
 * G_{T-1} = r_T under truncation.
 */
template <typename Scalar>
struct Trajectory {
  std::vector<Index> states;        // T+1
  std::vector<Index> actions;       // T
  std::vector<Scalar> rewards;      // T
  std::vector<Scalar> returns_to_go;  // T
};

using Trajectoryd = Trajectory<double>;

namespace detail {

// Order-insensitive to rounding: splits recursively instead of running
// left to right.
template <typename Scalar>
Scalar pairwise_sum(std::span<const Scalar> xs) {
  if (xs.size() <= 8) {
    Scalar s = Scalar(0);
    for (const Scalar x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

template <typename Scalar>
Trajectory<Scalar> sample_one(const Mdp<Scalar>& m, const Policy<Scalar>& pi,
                              int horizon, Philox4x32 rng) {
  Trajectory<Scalar> traj;
  traj.states.reserve(horizon + 1);
  traj.actions.reserve(horizon);
  traj.rewards.reserve(horizon);

  Index s = sample_categorical(rng, m.rho0);
  traj.states.push_back(s);
  for (int t = 0; t < horizon; ++t) {
    const Index a = sample_categorical(rng, pi.probs.row(s).transpose());
    const Index next = sample_categorical(rng, m.transition.row(m.sa_row(s, a)).transpose());
    traj.actions.push_back(a);
    traj.rewards.push_back(m.reward(m.sa_row(s, a), next));
    traj.states.push_back(next);
    s = next;
  }

  traj.returns_to_go.resize(horizon);
  Scalar g = Scalar(0);
  for (int t = horizon - 1; t >= 0; --t) {
    g = traj.rewards[t] + m.gamma * g;
    traj.returns_to_go[t] = g;
  }
  return traj;
}

/// Runs fn(i) for i in [0, n), sharded over worker threads when n is large.
/// fn must only touch state owned by index i.
template <typename Fn>
void parallel_for_index(std::size_t n, Fn&& fn, std::size_t min_grain = 256) {
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, n / min_grain);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, w, workers, n] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

/**
 * Samples `count` independent rollouts of fixed length `horizon`:
 * s_0 ~ rho0, a_t ~ pi(.|s_t), s_{t+1} ~ P(.|s_t,a_t), and
 * r_{t+1} = r(s_{t+1}|s_t,a_t).
 *
 * Trajectory i draws from the counter-based stream (seed, i), so the
 * result depends only on (seed, inputs) and not on how the work is
 * scheduled across threads.
 */
template <typename Scalar>
std::vector<Trajectory<Scalar>> sample_trajectories(const Mdp<Scalar>& m,
                                                    const Policy<Scalar>& pi,
                                                    int horizon, int count,
                                                    std::uint64_t seed) {
  if (horizon < 1) throw std::invalid_argument("sample_trajectories: horizon < 1");
  if (count < 1) throw std::invalid_argument("sample_trajectories: count < 1");
  check_dimensions(m, pi);

  std::vector<Trajectory<Scalar>> out(count);
  detail::parallel_for_index(static_cast<std::size_t>(count), [&](std::size_t i) {
    out[i] = detail::sample_one(m, pi, horizon,
                                Philox4x32(seed, static_cast<std::uint64_t>(i)));
  });
  return out;
}

template <typename Scalar>
struct MonteCarloEstimate {
  Scalar estimate = Scalar(0);
  Scalar standard_error = Scalar(0);
};

/// Sample mean and standard error of the discounted return over rollouts.
template <typename Scalar>
MonteCarloEstimate<Scalar> monte_carlo_objective(
    const std::vector<Trajectory<Scalar>>& trajectories, Scalar gamma) {
  if (trajectories.empty()) {
    throw std::invalid_argument("monte_carlo_objective: no trajectories");
  }
  const std::size_t n = trajectories.size();
  std::vector<Scalar> returns(n);
  for (std::size_t i = 0; i < n; ++i) {
    Scalar g = Scalar(0);
    Scalar w = Scalar(1);
    for (const Scalar r : trajectories[i].rewards) {
      g += w * r;
      w *= gamma;
    }
    returns[i] = g;
  }
  const Scalar mean =
      detail::pairwise_sum(std::span<const Scalar>(returns)) / Scalar(n);

  MonteCarloEstimate<Scalar> est;
  est.estimate = mean;
  if (n >= 2) {
    std::vector<Scalar> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Scalar d = returns[i] - mean;
      sq[i] = d * d;
    }
    const Scalar var =
        detail::pairwise_sum(std::span<const Scalar>(sq)) / Scalar(n - 1);
    est.standard_error = std::sqrt(var / Scalar(n));
  }
  return est;
}

/// Per-step TD residuals r_{t+1} + gamma phi(s_{t+1}) - phi(s_t).
template <typename Scalar>
std::vector<Scalar> td_errors(const Trajectory<Scalar>& traj,
                              const Vec<Scalar>& phi, Scalar gamma) {
  std::vector<Scalar> out(traj.rewards.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    out[t] = traj.rewards[t] + gamma * phi[traj.states[t + 1]] -
             phi[traj.states[t]];
  }
  return out;
}

/**
 * Advantage estimates A_t = sum_l (gamma*lambda)^l delta_{t+l} along one
 * rollout, via the backward recursion A_t = delta_t + gamma*lambda A_{t+1}.
 * lambda = 0 returns the TD residuals themselves.
 */
template <typename Scalar>
std::vector<Scalar> gae_from_trajectory(const Trajectory<Scalar>& traj,
                                        const Vec<Scalar>& v_estimate,
                                        Scalar gamma, Scalar lambda) {
  if (!(lambda >= Scalar(0) && lambda <= Scalar(1))) {
    throw std::invalid_argument("gae_from_trajectory: lambda out of [0,1]");
  }
  std::vector<Scalar> out = td_errors(traj, v_estimate, gamma);
  Scalar acc = Scalar(0);
  for (std::size_t t = out.size(); t-- > 0;) {
    acc = out[t] + gamma * lambda * acc;
    out[t] = acc;
  }
  return out;
}

/**
 * Empirical discounted state occupancy: each visited state s_t contributes
 * weight (1-gamma) gamma^t, and the result is normalized across all
 * rollouts. Converges to the discounted distribution of the sampling
 * policy as the number of rollouts grows.
 */
template <typename Scalar>
Vec<Scalar> empirical_discounted_occupancy(
    const std::vector<Trajectory<Scalar>>& trajectories, Scalar gamma,
    Index num_states) {
  Vec<Scalar> counts = Vec<Scalar>::Zero(num_states);
  for (const auto& traj : trajectories) {
    Scalar w = Scalar(1) - gamma;
    for (const Index s : traj.states) {
      counts[s] += w;
      w *= gamma;
    }
  }
  const Scalar total = counts.sum();
  if (total > Scalar(0)) counts /= total;
  return counts;
}

}  // namespace mdpkit
