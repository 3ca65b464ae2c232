#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "mdpkit/lambda.hpp"
#include "mdpkit/mdp.hpp"
#include "mdpkit/transition.hpp"
#include "mdpkit/types.hpp"
#include "mdpkit/value.hpp"

namespace mdpkit {

/**
 * The discounted return J(pi) computed along four routes that are equal by
 * construction: the value form rho0^T v, the occupancy form
 * <d, r_pi>/(1-gamma), the lambda form <d_lambda, r_lambda>/(1-gamma_tilde),
 * and the general baseline form
 *   E[phi(s0)] + sum_t (gamma*lambda)^t <d_lambda, delta_t> / (1-gamma_tilde)
 * for an arbitrary state function phi. max_pairwise_gap is the largest
 * absolute difference among the four.
 */
template <typename Scalar>
struct ObjectiveReport {
  Scalar j_standard_value_form = Scalar(0);
  Scalar j_standard_occupancy_form = Scalar(0);
  Scalar j_lambda_form = Scalar(0);
  Scalar j_general_form = Scalar(0);
  Scalar max_pairwise_gap = Scalar(0);
};

/// Value form and occupancy form of J(pi).
template <typename Scalar>
std::pair<Scalar, Scalar> objective_standard(const Mdp<Scalar>& m,
                                             const Policy<Scalar>& pi) {
  const InducedDynamics<Scalar> dyn = induce(m, pi);
  const Vec<Scalar> v = evaluate_exact(dyn, m.gamma);
  const Scalar value_form = m.rho0.dot(v);

  const auto d = discounted_distribution(dyn, m.gamma, m.rho0);
  const Scalar occupancy_form =
      d.weights.dot(dyn.r_pi) / (Scalar(1) - m.gamma);
  return {value_form, occupancy_form};
}

namespace detail {

// One-step expected TD residual of phi under pi:
// u[s] = r_pi[s] + gamma (P_pi phi)[s] - phi[s]. Identically zero when
// phi = V_pi.
template <typename Scalar>
Vec<Scalar> expected_td_one_step(const InducedDynamics<Scalar>& dyn,
                                 Scalar gamma, const Vec<Scalar>& phi) {
  return dyn.r_pi + gamma * (dyn.p_pi * phi) - phi;
}

}  // namespace detail

/**
 * Expected TD residual of phi observed t steps after starting at s:
 * the start is propagated through P_pi^t and the final step averages
 * r(s'|s_t,a_t) + gamma phi(s_{t+1}) - phi(s_t) over pi and the kernel.
 */
template <typename Scalar>
Scalar expected_td_term(const Mdp<Scalar>& m, const Policy<Scalar>& pi,
                        const Vec<Scalar>& phi, long t, Index s) {
  if (t < 0) throw std::invalid_argument("expected_td_term: t must be >= 0");
  if (phi.size() != m.num_states) {
    throw std::invalid_argument("expected_td_term: phi length mismatch");
  }
  const InducedDynamics<Scalar> dyn = induce(m, pi);
  Vec<Scalar> w = detail::expected_td_one_step(dyn, m.gamma, phi);
  for (long k = 0; k < t; ++k) w = dyn.p_pi * w;
  return w[s];
}

/**
 * General baseline form of the objective. The time sum is truncated at the
 * first T whose discarded tail, including the 1/(1-gamma_tilde) factor, is
 * below horizon_tol; with phi = V_pi every term vanishes and the loop
 * short-circuits immediately.
 */
template <typename Scalar>
Scalar objective_general(const Mdp<Scalar>& m, const Policy<Scalar>& pi,
                         Scalar lambda, const Vec<Scalar>& phi,
                         Scalar horizon_tol) {
  if (!(horizon_tol > Scalar(0))) {
    throw std::invalid_argument("objective_general: horizon_tol must be > 0");
  }
  if (phi.size() != m.num_states) {
    throw std::invalid_argument("objective_general: phi length mismatch");
  }
  const InducedDynamics<Scalar> dyn = induce(m, pi);
  const LambdaModel<Scalar> lm =
      build_lambda_model(dyn, m.rho0, m.gamma, lambda);
  const Scalar gl = m.gamma * lambda;

  Vec<Scalar> w = detail::expected_td_one_step(dyn, m.gamma, phi);
  const Scalar w_max = w.template lpNorm<Eigen::Infinity>();

  // Tail of sum_{t>T} (gl)^t <d, P^t w> / (1-gamma_tilde) is bounded by
  // w_max * gl^{T+1} / ((1-gl)(1-gamma_tilde)) = w_max gl^{T+1} / (1-gamma).
  long horizon = 0;
  if (gl > Scalar(0) && w_max > Scalar(0)) {
    const double target =
        double(horizon_tol) * (1.0 - double(m.gamma)) / double(w_max);
    if (target < 1.0) {
      horizon = static_cast<long>(
          std::ceil(std::log(target) / std::log(double(gl))));
    }
  }

  Scalar series = Scalar(0);
  Scalar weight = Scalar(1);
  for (long t = 0; t <= horizon; ++t) {
    series += weight * lm.d_lambda.dot(w);
    if (t < horizon) {
      w = dyn.p_pi * w;
      weight *= gl;
    }
  }
  return m.rho0.dot(phi) + series / (Scalar(1) - lm.gamma_tilde);
}

/// Lambda form of the objective, <d_lambda, r_lambda>/(1-gamma_tilde).
template <typename Scalar>
Scalar objective_lambda(const Mdp<Scalar>& m, const Policy<Scalar>& pi,
                        Scalar lambda) {
  const LambdaModel<Scalar> lm = build_lambda_model(m, pi, lambda);
  return lm.d_lambda.dot(lm.r_lambda) / (Scalar(1) - lm.gamma_tilde);
}

/// Evaluates all four objective routes on one instance.
template <typename Scalar>
ObjectiveReport<Scalar> equivalence_report(const Mdp<Scalar>& m,
                                           const Policy<Scalar>& pi,
                                           Scalar lambda,
                                           const Vec<Scalar>& phi,
                                           Scalar horizon_tol = Scalar(1e-9)) {
  ObjectiveReport<Scalar> rep;
  const auto [value_form, occupancy_form] = objective_standard(m, pi);
  rep.j_standard_value_form = value_form;
  rep.j_standard_occupancy_form = occupancy_form;
  rep.j_lambda_form = objective_lambda(m, pi, lambda);
  rep.j_general_form = objective_general(m, pi, lambda, phi, horizon_tol);

  const Scalar vals[4] = {rep.j_standard_value_form,
                          rep.j_standard_occupancy_form, rep.j_lambda_form,
                          rep.j_general_form};
  Scalar gap = Scalar(0);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      gap = std::max(gap, std::abs(vals[i] - vals[j]));
    }
  }
  rep.max_pairwise_gap = gap;
  return rep;
}

}  // namespace mdpkit
