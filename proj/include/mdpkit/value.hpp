#pragma once

#include <stdexcept>
#include <string>

#include "mdpkit/mdp.hpp"
#include "mdpkit/types.hpp"

namespace mdpkit {

/// V, Q and advantage tables of one policy; adv = q - v by definition.
template <typename Scalar>
struct ValueBundle {
  Vec<Scalar> v;    // S
  Mat<Scalar> q;    // S x A
  Mat<Scalar> adv;  // S x A
};

template <typename Scalar>
struct EvaluationResult {
  Vec<Scalar> v;
  int iterations = 0;
};

/// Raised when fixed-point iteration runs out of budget; carries the last
/// iterate and its step size so callers can inspect how close it got.
struct NoConvergenceError : std::runtime_error {
  NoConvergenceError(const std::string& what, Vecd iterate, double step)
      : std::runtime_error(what),
        last_iterate(std::move(iterate)),
        residual(step) {}
  Vecd last_iterate;
  double residual;
};

/**
 * Exact policy evaluation: v = (I - gamma P_pi)^{-1} r_pi.
 * The system matrix is nonsingular for every gamma < 1.
 */
template <typename Scalar>
Vec<Scalar> evaluate_exact(const InducedDynamics<Scalar>& dyn, Scalar gamma) {
  if (!(gamma > Scalar(0) && gamma < Scalar(1))) {
    throw std::invalid_argument("evaluate_exact: gamma out of (0,1)");
  }
  const Index S = dyn.p_pi.rows();
  Mat<Scalar> system = Mat<Scalar>::Identity(S, S) - gamma * dyn.p_pi;
  Vec<Scalar> v = system.partialPivLu().solve(dyn.r_pi);
  if (!v.allFinite()) {
    throw std::runtime_error("evaluate_exact: solve produced non-finite v");
  }
  return v;
}

/**
 * Fixed-point policy evaluation by repeated application of
 * v <- r_pi + gamma P_pi v starting from the zero vector.
 *
 * Stops at the first iterate whose sup-norm step is at most
 * tol*(1-gamma)/gamma; by the contraction property the returned iterate is
 * then within tol of the exact value in sup norm, so `tol` is a true error
 * bound rather than a raw step size.
 */
template <typename Scalar>
EvaluationResult<Scalar> evaluate_iterative(const InducedDynamics<Scalar>& dyn,
                                            Scalar gamma, Scalar tol,
                                            int max_iters) {
  if (!(gamma > Scalar(0) && gamma < Scalar(1))) {
    throw std::invalid_argument("evaluate_iterative: gamma out of (0,1)");
  }
  if (!(tol > Scalar(0))) {
    throw std::invalid_argument("evaluate_iterative: tol must be positive");
  }
  const Scalar step_bound = tol * (Scalar(1) - gamma) / gamma;
  Vec<Scalar> v = Vec<Scalar>::Zero(dyn.p_pi.rows());
  Scalar step = Scalar(0);
  for (int k = 1; k <= max_iters; ++k) {
    Vec<Scalar> next = dyn.r_pi + gamma * (dyn.p_pi * v);
    step = (next - v).template lpNorm<Eigen::Infinity>();
    v = std::move(next);
    if (step <= step_bound) return {std::move(v), k};
  }
  throw NoConvergenceError(
      "evaluate_iterative: no convergence within " +
          std::to_string(max_iters) + " iterations (last step " +
          std::to_string(double(step)) + ")",
      v.template cast<double>(), double(step));
}

/**
 * Q and advantage tables from a caller-supplied state-value vector:
 *   q[s,a] = R(s,a) + gamma sum_s' P(s'|s,a) v[s'],  adv = q - v.
 *
 * v is taken as given (and stored unchanged) so that perturbed or
 * estimated value vectors can be pushed through the same path.
 */
template <typename Scalar>
ValueBundle<Scalar> q_and_advantage(const Mdp<Scalar>& m,
                                    const Policy<Scalar>& pi,
                                    const Vec<Scalar>& v) {
  check_dimensions(m, pi);
  if (v.size() != m.num_states) {
    throw std::invalid_argument("q_and_advantage: v length mismatch");
  }
  const Index S = m.num_states;
  const Index A = m.num_actions;

  ValueBundle<Scalar> out;
  out.v = v;
  out.q.resize(S, A);
  const Vec<Scalar> pv = m.transition * v;  // (S*A) expected next value
  for (Index s = 0; s < S; ++s) {
    for (Index a = 0; a < A; ++a) {
      const Index row = m.sa_row(s, a);
      out.q(s, a) = m.transition.row(row).dot(m.reward.row(row)) +
                    m.gamma * pv[row];
    }
  }
  out.adv = out.q.colwise() - v;
  return out;
}

}  // namespace mdpkit
