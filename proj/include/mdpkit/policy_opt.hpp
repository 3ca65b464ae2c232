#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdpkit/lambda.hpp"
#include "mdpkit/mdp.hpp"
#include "mdpkit/types.hpp"
#include "mdpkit/value.hpp"

namespace mdpkit {

/**
 * Ingredients of the surrogate improvement bound for a candidate policy pi
 * against a reference policy pi': the occupancy-weighted advantage term,
 * the total-variation penalty, their difference, the exact objective gap
 * J(pi) - J(pi'), and the worst-state expected |TD| scale epsilon_v that
 * sizes the penalty.
 */
template <typename Scalar>
struct SurrogateReport {
  Scalar gae_term = Scalar(0);
  Scalar penalty_term = Scalar(0);
  Scalar lower_bound = Scalar(0);
  Scalar true_gap = Scalar(0);
  Scalar epsilon_v = Scalar(0);
};

template <typename Scalar>
struct PinskerChain {
  Scalar tv_expect = Scalar(0);
  Scalar pointwise_pinsker = Scalar(0);
  Scalar jensen = Scalar(0);
};

template <typename Scalar>
struct TrustRegionConfig {
  Scalar radius = Scalar(0.01);  // average-KL budget
  Scalar lambda = Scalar(0.95);
  int max_bisection_iters = 200;
  /// Acceptance window |avg KL - radius|; <= 0 picks 1e-10 * max(1, radius).
  Scalar bisection_tol = Scalar(0);
  /// Measure the constraint as KL(pi_k || pi) instead of KL(pi || pi_k).
  bool swap_kl_direction = false;
};

/// Raised when the temperature search cannot pin the KL constraint.
struct BisectionError : std::runtime_error {
  BisectionError(const std::string& what, double lo, double hi)
      : std::runtime_error(what), bracket_lo(lo), bracket_hi(hi) {}
  double bracket_lo;
  double bracket_hi;
};

/**
 * Exact advantage estimator table
 *   A(s,a) = sum_l (gamma*lambda)^l E[delta_{t+l} | s_t = s, a_t = a],
 * where the TD residuals use v_estimate and, after the first step, the
 * chain runs under old_policy. The l = 0 term is
 * R(s,a) + gamma (P v)(s,a) - v(s); later terms route one step through
 * P(.|s,a) and then through the resolvent (I - gamma*lambda P_pi)^{-1}
 * applied to the one-step expected residual vector.
 *
 * With v_estimate equal to the exact value of old_policy, every later term
 * vanishes and the table reduces to the advantage function for all lambda.
 */
template <typename Scalar>
Mat<Scalar> exact_gae(const Mdp<Scalar>& m, const Policy<Scalar>& old_policy,
                      const Vec<Scalar>& v_estimate, Scalar gamma,
                      Scalar lambda) {
  if (!(lambda >= Scalar(0) && lambda <= Scalar(1))) {
    throw std::invalid_argument("exact_gae: lambda out of [0,1]");
  }
  check_dimensions(m, old_policy);
  if (v_estimate.size() != m.num_states) {
    throw std::invalid_argument("exact_gae: v_estimate length mismatch");
  }
  const Index S = m.num_states;
  const Index A = m.num_actions;
  const InducedDynamics<Scalar> dyn = induce(m, old_policy);

  const Vec<Scalar> pv = m.transition * v_estimate;  // (S*A)
  Mat<Scalar> delta0(S, A);
  for (Index s = 0; s < S; ++s) {
    for (Index a = 0; a < A; ++a) {
      delta0(s, a) = dyn.r_sa(s, a) + gamma * pv[m.sa_row(s, a)] -
                     v_estimate[s];
    }
  }

  const Scalar gl = gamma * lambda;
  if (gl == Scalar(0)) return delta0;

  const Vec<Scalar> delta_pi =
      (old_policy.probs.array() * delta0.array()).rowwise().sum();
  const Vec<Scalar> tail =
      (Mat<Scalar>::Identity(S, S) - gl * dyn.p_pi).partialPivLu().solve(
          delta_pi);
  const Vec<Scalar> ptail = m.transition * tail;  // (S*A)

  Mat<Scalar> gae(S, A);
  for (Index s = 0; s < S; ++s) {
    for (Index a = 0; a < A; ++a) {
      gae(s, a) = delta0(s, a) + gl * ptail[m.sa_row(s, a)];
    }
  }
  return gae;
}

/// Total variation between the action distributions of p and q at state s.
template <typename Scalar>
Scalar tv_distance(const Policy<Scalar>& p, const Policy<Scalar>& q, Index s) {
  if (p.probs.rows() != q.probs.rows() || p.probs.cols() != q.probs.cols()) {
    throw std::invalid_argument("tv_distance: policy shape mismatch");
  }
  return Scalar(0.5) * (p.probs.row(s) - q.probs.row(s)).cwiseAbs().sum();
}

/**
 * KL(p(.|s) || q(.|s)) with the 0 log 0 = 0 convention. Returns +infinity
 * when p puts mass where q has none; infinity is a value here, never an
 * error.
 */
template <typename Scalar>
Scalar kl_divergence(const Policy<Scalar>& p, const Policy<Scalar>& q,
                     Index s) {
  if (p.probs.rows() != q.probs.rows() || p.probs.cols() != q.probs.cols()) {
    throw std::invalid_argument("kl_divergence: policy shape mismatch");
  }
  Scalar kl = Scalar(0);
  for (Index a = 0; a < p.probs.cols(); ++a) {
    const Scalar pa = p.probs(s, a);
    if (pa <= Scalar(0)) continue;
    const Scalar qa = q.probs(s, a);
    if (qa <= Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    kl += pa * std::log(pa / qa);
  }
  return kl;
}

namespace detail {

// Worst state of E_{a~pi, s'~P}|r + gamma v'(s') - v'(s)| for a given
// reference value vector v'.
template <typename Scalar>
Scalar epsilon_given_value(const Mdp<Scalar>& m, const Policy<Scalar>& pi,
                           const Vec<Scalar>& v_prime) {
  Scalar eps = Scalar(0);
  for (Index s = 0; s < m.num_states; ++s) {
    Scalar acc = Scalar(0);
    for (Index a = 0; a < m.num_actions; ++a) {
      const Index row = m.sa_row(s, a);
      Scalar e = Scalar(0);
      for (Index k = 0; k < m.num_states; ++k) {
        e += m.transition(row, k) *
             std::abs(m.reward(row, k) + m.gamma * v_prime[k] - v_prime[s]);
      }
      acc += pi.probs(s, a) * e;
    }
    eps = std::max(eps, acc);
  }
  return eps;
}

}  // namespace detail

/**
 * Worst-state expected absolute TD residual of V_{pi'} under actions from
 * pi. The per-step quantity is time-invariant in a stationary chain, so
 * the supremum over steps is attained by the maximum over states.
 */
template <typename Scalar>
Scalar epsilon_v(const Mdp<Scalar>& m, const Policy<Scalar>& pi,
                 const Policy<Scalar>& pi_prime) {
  check_dimensions(m, pi);
  check_dimensions(m, pi_prime);
  const Vec<Scalar> v_prime = evaluate_exact(induce(m, pi_prime), m.gamma);
  return detail::epsilon_given_value(m, pi, v_prime);
}

/**
 * Surrogate lower bound on J(pi) - J(pi'):
 *
 *   gae_term     = E_{s~d_lambda(pi'), a~pi}[A(s,a)] / (1-gamma_tilde)
 *   penalty_term = 2 gamma_tilde (gamma*lambda(|S|-1)+1) epsilon_v
 *                  / ((1-gamma_tilde)^2 (1-gamma*lambda))
 *                  * E_{s~d_lambda(pi')}[TV(pi,pi')[s]]
 *
 * with the advantage table taken exactly at V_{pi'}. true_gap is computed
 * from exact objectives of both policies so the bound can be checked
 * instance by instance.
 */
template <typename Scalar>
SurrogateReport<Scalar> surrogate_bound(const Mdp<Scalar>& m,
                                        const Policy<Scalar>& pi,
                                        const Policy<Scalar>& pi_prime,
                                        Scalar lambda) {
  check_dimensions(m, pi);
  check_dimensions(m, pi_prime);
  const InducedDynamics<Scalar> dyn_prime = induce(m, pi_prime);
  const Vec<Scalar> v_prime = evaluate_exact(dyn_prime, m.gamma);
  const LambdaModel<Scalar> lm =
      build_lambda_model(dyn_prime, m.rho0, m.gamma, lambda);
  const Mat<Scalar> gae = exact_gae(m, pi_prime, v_prime, m.gamma, lambda);

  SurrogateReport<Scalar> rep;
  const Scalar gt = lm.gamma_tilde;
  const Scalar gl = m.gamma * lambda;

  Scalar expected_adv = Scalar(0);
  Scalar expected_tv = Scalar(0);
  for (Index s = 0; s < m.num_states; ++s) {
    expected_adv += lm.d_lambda[s] * pi.probs.row(s).dot(gae.row(s));
    expected_tv += lm.d_lambda[s] * tv_distance(pi, pi_prime, s);
  }
  rep.gae_term = expected_adv / (Scalar(1) - gt);
  rep.epsilon_v = detail::epsilon_given_value(m, pi, v_prime);

  const Scalar coeff =
      Scalar(2) * gt * (gl * Scalar(m.num_states - 1) + Scalar(1)) *
      rep.epsilon_v / ((Scalar(1) - gt) * (Scalar(1) - gl));
  rep.penalty_term = coeff * expected_tv / (Scalar(1) - gt);
  rep.lower_bound = rep.gae_term - rep.penalty_term;

  const Vec<Scalar> v_pi = evaluate_exact(induce(m, pi), m.gamma);
  rep.true_gap = m.rho0.dot(v_pi) - m.rho0.dot(v_prime);
  return rep;
}

/**
 * The three quantities of the total-variation / KL chain under the
 * lambda-discounted occupancy of pi':
 *   E[TV] <= E[sqrt(KL/2)] <= sqrt(E[KL]/2).
 * Infinite KL propagates through the two right-hand members; the ordering
 * then holds vacuously.
 */
template <typename Scalar>
PinskerChain<Scalar> pinsker_chain(const Mdp<Scalar>& m,
                                   const Policy<Scalar>& pi,
                                   const Policy<Scalar>& pi_prime,
                                   Scalar lambda) {
  const LambdaModel<Scalar> lm = build_lambda_model(m, pi_prime, lambda);
  PinskerChain<Scalar> chain;
  Scalar kl_expect = Scalar(0);
  for (Index s = 0; s < m.num_states; ++s) {
    const Scalar w = lm.d_lambda[s];
    if (w <= Scalar(0)) continue;
    chain.tv_expect += w * tv_distance(pi, pi_prime, s);
    const Scalar kl = kl_divergence(pi, pi_prime, s);
    chain.pointwise_pinsker += w * std::sqrt(kl / Scalar(2));
    kl_expect += w * kl;
  }
  chain.jensen = std::sqrt(kl_expect / Scalar(2));
  return chain;
}

/**
 * Closed-form solution of the per-state subproblem
 *   max_p <p, A(s,.)> - (1/beta) KL(p || pi_k(.|s)):
 * p(a) proportional to pi_k(a|s) exp(A(s,a)/beta), evaluated with a
 * shifted exponent for stability. Actions outside the support of pi_k
 * stay at zero, which keeps the constraint KL finite by construction.
 */
template <typename Scalar>
Policy<Scalar> exponentiated_policy(const Policy<Scalar>& pi_k,
                                    const Mat<Scalar>& gae, Scalar beta) {
  if (!(beta > Scalar(0))) {
    throw std::invalid_argument("exponentiated_policy: beta must be > 0");
  }
  const Index S = pi_k.probs.rows();
  const Index A = pi_k.probs.cols();
  Policy<Scalar> out;
  out.probs.resize(S, A);
  for (Index s = 0; s < S; ++s) {
    Scalar shift = -std::numeric_limits<Scalar>::infinity();
    for (Index a = 0; a < A; ++a) {
      if (pi_k.probs(s, a) > Scalar(0)) {
        shift = std::max(shift, gae(s, a) / beta);
      }
    }
    Scalar norm = Scalar(0);
    for (Index a = 0; a < A; ++a) {
      const Scalar pk = pi_k.probs(s, a);
      const Scalar w =
          pk > Scalar(0) ? pk * std::exp(gae(s, a) / beta - shift) : Scalar(0);
      out.probs(s, a) = w;
      norm += w;
    }
    out.probs.row(s) /= norm;
  }
  return out;
}

namespace detail {

template <typename Scalar>
Scalar average_kl(const Policy<Scalar>& candidate, const Policy<Scalar>& pi_k,
                  const Vec<Scalar>& weights, bool swap_direction) {
  Scalar acc = Scalar(0);
  for (Index s = 0; s < weights.size(); ++s) {
    if (weights[s] <= Scalar(0)) continue;
    const Scalar kl = swap_direction ? kl_divergence(pi_k, candidate, s)
                                     : kl_divergence(candidate, pi_k, s);
    acc += weights[s] * kl;
  }
  return acc;
}

}  // namespace detail

/**
 * One KL trust-region policy improvement step: maximizes the occupancy-
 * weighted advantage of the current policy subject to an average-KL budget,
 *
 *   max_pi E_{s~d_lambda(pi_k), a~pi}[A_k(s,a)]
 *   s.t.   E_{s~d_lambda(pi_k)}[KL(pi, pi_k)[s]] <= radius,
 *
 * solved per temperature in closed form (see exponentiated_policy) with
 * the temperature bisected until the constraint is active within
 * bisection_tol. Advantages are taken exactly at V_{pi_k}. When even the
 * coldest temperature stays inside the budget (flat advantages, or a
 * radius larger than the greedy step needs) the corresponding policy is
 * returned with the constraint slack.
 */
template <typename Scalar>
Policy<Scalar> trust_region_step(const Mdp<Scalar>& m,
                                 const Policy<Scalar>& pi_k,
                                 const TrustRegionConfig<Scalar>& cfg) {
  if (!(cfg.radius > Scalar(0))) {
    throw std::invalid_argument("trust_region_step: radius must be > 0");
  }
  check_dimensions(m, pi_k);

  const InducedDynamics<Scalar> dyn = induce(m, pi_k);
  const Vec<Scalar> v_k = evaluate_exact(dyn, m.gamma);
  const Mat<Scalar> gae = exact_gae(m, pi_k, v_k, m.gamma, cfg.lambda);
  const LambdaModel<Scalar> lm =
      build_lambda_model(dyn, m.rho0, m.gamma, cfg.lambda);

  // Flat advantage over the support at every state: the objective cannot
  // distinguish feasible policies, so the current one is already optimal.
  bool flat = true;
  for (Index s = 0; s < m.num_states && flat; ++s) {
    Scalar lo = std::numeric_limits<Scalar>::infinity();
    Scalar hi = -std::numeric_limits<Scalar>::infinity();
    for (Index a = 0; a < m.num_actions; ++a) {
      if (pi_k.probs(s, a) > Scalar(0)) {
        lo = std::min(lo, gae(s, a));
        hi = std::max(hi, gae(s, a));
      }
    }
    if (hi > lo) flat = false;
  }
  if (flat) return pi_k;

  const Scalar tol = cfg.bisection_tol > Scalar(0)
                         ? cfg.bisection_tol
                         : Scalar(1e-10) * std::max(Scalar(1), cfg.radius);
  Scalar beta_lo = Scalar(1e-8);
  Scalar beta_hi = Scalar(1e8);

  Policy<Scalar> coldest = exponentiated_policy(pi_k, gae, beta_lo);
  if (detail::average_kl(coldest, pi_k, lm.d_lambda, cfg.swap_kl_direction) <=
      cfg.radius) {
    return coldest;  // constraint cannot be activated inside the bracket
  }

  for (int it = 0; it < cfg.max_bisection_iters; ++it) {
    const Scalar beta = std::sqrt(beta_lo * beta_hi);
    Policy<Scalar> candidate = exponentiated_policy(pi_k, gae, beta);
    const Scalar kl = detail::average_kl(candidate, pi_k, lm.d_lambda,
                                         cfg.swap_kl_direction);
    if (std::abs(kl - cfg.radius) <= tol) return candidate;
    if (kl > cfg.radius) {
      beta_lo = beta;
    } else {
      beta_hi = beta;
    }
  }
  throw BisectionError(
      "trust_region_step: temperature bisection did not settle within " +
          std::to_string(cfg.max_bisection_iters) + " iterations",
      double(beta_lo), double(beta_hi));
}

template <typename Scalar>
struct OptimizeRecord {
  Policy<Scalar> policy;
  Scalar objective = Scalar(0);
};

/**
 * Iterates trust_region_step from pi_init, recording each policy with its
 * exact objective. The first record is the starting pair, so the result
 * has num_steps + 1 entries.
 */
template <typename Scalar>
std::vector<OptimizeRecord<Scalar>> optimize(
    const Mdp<Scalar>& m, const Policy<Scalar>& pi_init,
    const TrustRegionConfig<Scalar>& cfg, int num_steps) {
  if (num_steps < 1) {
    throw std::invalid_argument("optimize: num_steps must be >= 1");
  }
  auto objective_of = [&m](const Policy<Scalar>& pi) {
    return Scalar(m.rho0.dot(evaluate_exact(induce(m, pi), m.gamma)));
  };

  std::vector<OptimizeRecord<Scalar>> records;
  records.reserve(num_steps + 1);
  records.push_back({pi_init, objective_of(pi_init)});
  for (int k = 0; k < num_steps; ++k) {
    Policy<Scalar> next = trust_region_step(m, records.back().policy, cfg);
    const Scalar j = objective_of(next);
    records.push_back({std::move(next), j});
  }
  return records;
}

}  // namespace mdpkit
