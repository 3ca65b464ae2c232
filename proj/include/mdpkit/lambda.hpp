#pragma once

#include <stdexcept>

#include "mdpkit/mdp.hpp"
#include "mdpkit/transition.hpp"
#include "mdpkit/types.hpp"

namespace mdpkit {

/**
 * Effective discount of the lambda-weighted Bellman operator,
 * gamma_tilde = gamma(1-lambda)/(1-gamma*lambda). Decreases from gamma at
 * lambda = 0 to exactly 0 at lambda = 1.
 */
template <typename Scalar>
Scalar effective_discount(Scalar gamma, Scalar lambda) {
  if (!(gamma > Scalar(0) && gamma < Scalar(1))) {
    throw std::invalid_argument("effective_discount: gamma out of (0,1)");
  }
  if (!(lambda >= Scalar(0) && lambda <= Scalar(1))) {
    throw std::invalid_argument("effective_discount: lambda out of [0,1]");
  }
  return gamma * (Scalar(1) - lambda) / (Scalar(1) - gamma * lambda);
}

/**
 * Derived quantities of the lambda-weighted dynamics for one policy:
 *
 *   p_lambda = (1-gamma*lambda) (I - gamma*lambda P_pi)^{-1} P_pi
 *   r_lambda = (I - gamma*lambda P_pi)^{-1} r_pi
 *   d_lambda = (1-gamma_tilde) (I - gamma_tilde p_lambda^T)^{-1} rho0
 *
 * Each closed form resolves the geometric series of its definition; the
 * truncated series are kept as independent oracles in the tests. p_lambda
 * is again row-stochastic, so everything from the plain dynamics carries
 * over with (gamma_tilde, p_lambda, r_lambda) in place of
 * (gamma, P_pi, r_pi).
 *
 * lambda = 1 is admitted: gamma*lambda = gamma < 1 keeps the resolvent
 * well-defined, and gamma_tilde = 0 collapses d_lambda to rho0.
 */
template <typename Scalar>
struct LambdaModel {
  Scalar lambda = Scalar(0);
  Scalar gamma_tilde = Scalar(0);
  Mat<Scalar> p_lambda;  // S x S
  Vec<Scalar> r_lambda;  // S
  Vec<Scalar> d_lambda;  // S
};

template <typename Scalar>
LambdaModel<Scalar> build_lambda_model(const InducedDynamics<Scalar>& dyn,
                                       const Vec<Scalar>& rho0, Scalar gamma,
                                       Scalar lambda) {
  const Scalar gamma_tilde = effective_discount(gamma, lambda);
  const Index S = dyn.p_pi.rows();
  if (rho0.size() != S) {
    throw std::invalid_argument("build_lambda_model: rho0 length mismatch");
  }

  LambdaModel<Scalar> lm;
  lm.lambda = lambda;
  lm.gamma_tilde = gamma_tilde;

  const Scalar gl = gamma * lambda;
  Mat<Scalar> resolvent =
      (Mat<Scalar>::Identity(S, S) - gl * dyn.p_pi).partialPivLu().solve(
          Mat<Scalar>::Identity(S, S));
  lm.p_lambda = (Scalar(1) - gl) * resolvent * dyn.p_pi;
  lm.r_lambda = resolvent * dyn.r_pi;

  if (gamma_tilde == Scalar(0)) {
    lm.d_lambda = rho0;
  } else {
    lm.d_lambda =
        detail::solve_discounted_weights(lm.p_lambda, gamma_tilde, rho0);
  }
  return lm;
}

template <typename Scalar>
LambdaModel<Scalar> build_lambda_model(const Mdp<Scalar>& m,
                                       const Policy<Scalar>& pi,
                                       Scalar lambda) {
  return build_lambda_model(induce(m, pi), m.rho0, m.gamma, lambda);
}

/// One application of the lambda-weighted Bellman operator,
/// v -> r_lambda + gamma_tilde p_lambda v. V_pi is its unique fixed point.
template <typename Scalar>
Vec<Scalar> lambda_bellman_apply(const LambdaModel<Scalar>& lm,
                                 const Vec<Scalar>& v) {
  if (v.size() != lm.p_lambda.rows()) {
    throw std::invalid_argument("lambda_bellman_apply: v length mismatch");
  }
  return lm.r_lambda + lm.gamma_tilde * (lm.p_lambda * v);
}

}  // namespace mdpkit
