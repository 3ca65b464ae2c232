#pragma once

#include <stdexcept>
#include <string>

#include "mdpkit/mdp.hpp"
#include "mdpkit/types.hpp"

namespace mdpkit {

enum class StartKind { kSingleState, kInitialDistribution };

/**
 * Normalized discounted state-visitation weights
 *   d[s] = (1-gamma) * sum_t gamma^t Pr(s_t = s | start),
 * for either a single start state or an initial distribution.
 */
template <typename Scalar>
struct DiscountedDistribution {
  Vec<Scalar> weights;
  StartKind source = StartKind::kInitialDistribution;
};

/**
 * t-step transition matrix P_pi^t. The t = 0 case is the identity: the
 * chain sits at its start state with probability one before any step.
 */
template <typename Scalar>
Mat<Scalar> t_step_matrix(const InducedDynamics<Scalar>& dyn, long t) {
  if (t < 0) throw std::invalid_argument("t_step_matrix: t must be >= 0");
  const Index S = dyn.p_pi.rows();
  Mat<Scalar> result = Mat<Scalar>::Identity(S, S);
  for (long k = 0; k < t; ++k) result = result * dyn.p_pi;
  return result;
}

namespace detail {

// Solves (I - gamma P^T) x = (1-gamma) start, clamping solver dust at zero.
template <typename Scalar>
Vec<Scalar> solve_discounted_weights(const Mat<Scalar>& p_pi, Scalar gamma,
                                     const Vec<Scalar>& start) {
  const Index S = p_pi.rows();
  Mat<Scalar> system =
      Mat<Scalar>::Identity(S, S) - gamma * p_pi.transpose();
  Vec<Scalar> w = system.partialPivLu().solve((Scalar(1) - gamma) * start);
  if (!w.allFinite()) {
    throw std::runtime_error("discounted_distribution: solve failed");
  }
  for (Index s = 0; s < S; ++s) {
    if (w[s] < Scalar(0)) {
      if (w[s] < Scalar(-1e-12)) {
        throw std::runtime_error(
            "discounted_distribution: negative weight " +
            std::to_string(double(w[s])) + " at state " + std::to_string(s));
      }
      w[s] = Scalar(0);
    }
  }
  w /= w.sum();
  return w;
}

}  // namespace detail

/// Discounted visitation weights from a single start state.
template <typename Scalar>
DiscountedDistribution<Scalar> discounted_distribution(
    const InducedDynamics<Scalar>& dyn, Scalar gamma, Index start_state) {
  if (!(gamma > Scalar(0) && gamma < Scalar(1))) {
    throw std::invalid_argument("discounted_distribution: gamma out of (0,1)");
  }
  if (start_state < 0 || start_state >= dyn.p_pi.rows()) {
    throw std::invalid_argument("discounted_distribution: bad start state");
  }
  Vec<Scalar> indicator = Vec<Scalar>::Zero(dyn.p_pi.rows());
  indicator[start_state] = Scalar(1);
  return {detail::solve_discounted_weights(dyn.p_pi, gamma, indicator),
          StartKind::kSingleState};
}

/// Discounted visitation weights averaged over an initial distribution.
template <typename Scalar>
DiscountedDistribution<Scalar> discounted_distribution(
    const InducedDynamics<Scalar>& dyn, Scalar gamma, const Vec<Scalar>& rho0) {
  if (!(gamma > Scalar(0) && gamma < Scalar(1))) {
    throw std::invalid_argument("discounted_distribution: gamma out of (0,1)");
  }
  if (rho0.size() != dyn.p_pi.rows()) {
    throw std::invalid_argument(
        "discounted_distribution: rho0 length mismatch");
  }
  return {detail::solve_discounted_weights(dyn.p_pi, gamma, rho0),
          StartKind::kInitialDistribution};
}

}  // namespace mdpkit
