#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdpkit/types.hpp"

namespace mdpkit {

/**
 * Finite discounted MDP (S, A, P, r, rho0, gamma) with dense tables.
 *
 * The transition kernel P(s'|s,a) and reward r(s'|s,a) are stored as
 * (S*A) x S matrices whose row s*A+a holds the distribution (resp. reward)
 * over next states for the pair (s, a). Rewards may depend on the landed
 * state; the common r(s, a) format is broadcast over s' at load time.
 *
 * Instances are immutable value types; every operation on them is a pure
 * function, so models can be shared freely across threads.
 */
template <typename Scalar>
struct Mdp {
  Index num_states = 0;
  Index num_actions = 0;
  Mat<Scalar> transition;  // (S*A) x S, row s*A+a = P(.|s,a)
  Mat<Scalar> reward;      // (S*A) x S, row s*A+a = r(.|s,a)
  Vec<Scalar> rho0;
  Scalar gamma = Scalar(0);

  Index sa_row(Index s, Index a) const { return s * num_actions + a; }

  /// A x S block of next-state distributions for one state.
  auto transition_rows(Index s) const {
    return transition.middleRows(s * num_actions, num_actions);
  }
};

/// Row-stochastic action table pi(a|s), one row per state.
template <typename Scalar>
struct Policy {
  Mat<Scalar> probs;  // S x A

  Index num_states() const { return probs.rows(); }
  Index num_actions() const { return probs.cols(); }
};

/**
 * One-step quantities induced by running a policy on a model:
 *   p_pi[s,s'] = sum_a pi(a|s) P(s'|s,a)
 *   r_sa[s,a]  = sum_s' P(s'|s,a) r(s'|s,a)
 *   r_pi[s]    = sum_a pi(a|s) r_sa[s,a]
 */
template <typename Scalar>
struct InducedDynamics {
  Mat<Scalar> p_pi;  // S x S
  Mat<Scalar> r_sa;  // S x A
  Vec<Scalar> r_pi;  // S
};

using Mdpd = Mdp<double>;
using Policyd = Policy<double>;

namespace detail {

inline std::string format_num(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

}  // namespace detail

/**
 * Checks every structural invariant of a model and returns one message per
 * violation (empty report = valid). Violations are data, not failures:
 * nothing throws here, so raw parsed input can be inspected wholesale.
 */
template <typename Scalar>
std::vector<std::string> validate(const Mdp<Scalar>& m) {
  std::vector<std::string> report;
  auto add = [&report](const std::string& msg) { report.push_back(msg); };

  if (m.num_states <= 0) add("num_states must be positive");
  if (m.num_actions <= 0) add("num_actions must be positive");
  if (!(m.gamma > Scalar(0) && m.gamma < Scalar(1))) {
    add("gamma out of (0,1): " + detail::format_num(double(m.gamma)));
  }
  if (m.num_states <= 0 || m.num_actions <= 0) return report;

  const Index rows = m.num_states * m.num_actions;
  if (m.transition.rows() != rows || m.transition.cols() != m.num_states) {
    add("transition has shape (" + std::to_string(m.transition.rows()) + "," +
        std::to_string(m.transition.cols()) + "), expected (" +
        std::to_string(rows) + "," + std::to_string(m.num_states) + ")");
    return report;
  }
  if (m.reward.rows() != rows || m.reward.cols() != m.num_states) {
    add("reward has shape (" + std::to_string(m.reward.rows()) + "," +
        std::to_string(m.reward.cols()) + "), expected (" +
        std::to_string(rows) + "," + std::to_string(m.num_states) + ")");
    return report;
  }
  if (m.rho0.size() != m.num_states) {
    add("rho0 has length " + std::to_string(m.rho0.size()) + ", expected " +
        std::to_string(m.num_states));
    return report;
  }

  for (Index s = 0; s < m.num_states; ++s) {
    for (Index a = 0; a < m.num_actions; ++a) {
      const auto row = m.transition.row(m.sa_row(s, a));
      const std::string path =
          "transition[" + std::to_string(s) + "][" + std::to_string(a) + "]";
      for (Index k = 0; k < m.num_states; ++k) {
        const double p = double(row[k]);
        if (!(p >= 0.0 && p <= 1.0)) {
          add(path + "[" + std::to_string(k) + "] = " +
              detail::format_num(p) + " outside [0,1]");
        }
      }
      const double sum = double(row.sum());
      if (!(std::abs(sum - 1.0) <= kStochasticTol)) {
        add(path + " row sums to " + detail::format_num(sum));
      }
      const auto rrow = m.reward.row(m.sa_row(s, a));
      for (Index k = 0; k < m.num_states; ++k) {
        if (!std::isfinite(double(rrow[k]))) {
          add("reward[" + std::to_string(s) + "][" + std::to_string(a) + "][" +
              std::to_string(k) + "] is not finite");
        }
      }
    }
  }

  double rho_sum = 0.0;
  for (Index s = 0; s < m.num_states; ++s) {
    const double p = double(m.rho0[s]);
    if (!(p >= 0.0)) {
      add("rho0[" + std::to_string(s) + "] = " + detail::format_num(p) +
          " is negative");
    }
    rho_sum += p;
  }
  if (!(std::abs(rho_sum - 1.0) <= kStochasticTol)) {
    add("rho0 sums to " + detail::format_num(rho_sum));
  }
  return report;
}

/// Policy counterpart of validate(Mdp): row-stochasticity of pi(.|s).
template <typename Scalar>
std::vector<std::string> validate(const Policy<Scalar>& pi) {
  std::vector<std::string> report;
  if (pi.probs.rows() <= 0 || pi.probs.cols() <= 0) {
    report.push_back("policy table is empty");
    return report;
  }
  for (Index s = 0; s < pi.probs.rows(); ++s) {
    const std::string path = "policy[" + std::to_string(s) + "]";
    for (Index a = 0; a < pi.probs.cols(); ++a) {
      const double p = double(pi.probs(s, a));
      if (!(p >= 0.0 && p <= 1.0)) {
        report.push_back(path + "[" + std::to_string(a) + "] = " +
                         detail::format_num(p) + " outside [0,1]");
      }
    }
    const double sum = double(pi.probs.row(s).sum());
    if (!(std::abs(sum - 1.0) <= kStochasticTol)) {
      report.push_back(path + " row sums to " + detail::format_num(sum));
    }
  }
  return report;
}

template <typename Scalar>
bool is_valid(const Mdp<Scalar>& m) {
  return validate(m).empty();
}

template <typename Scalar>
bool is_valid(const Policy<Scalar>& pi) {
  return validate(pi).empty();
}

template <typename Scalar>
void check_dimensions(const Mdp<Scalar>& m, const Policy<Scalar>& pi) {
  if (pi.probs.rows() != m.num_states || pi.probs.cols() != m.num_actions) {
    throw std::invalid_argument(
        "policy shape (" + std::to_string(pi.probs.rows()) + "," +
        std::to_string(pi.probs.cols()) + ") does not match model (" +
        std::to_string(m.num_states) + "," + std::to_string(m.num_actions) +
        ")");
  }
}

/// Marginalizes the action choice out of the model under pi.
template <typename Scalar>
InducedDynamics<Scalar> induce(const Mdp<Scalar>& m, const Policy<Scalar>& pi) {
  check_dimensions(m, pi);
  const Index S = m.num_states;
  const Index A = m.num_actions;

  InducedDynamics<Scalar> dyn;
  dyn.p_pi.resize(S, S);
  dyn.r_sa.resize(S, A);
  for (Index s = 0; s < S; ++s) {
    dyn.p_pi.row(s) = pi.probs.row(s) * m.transition_rows(s);
    for (Index a = 0; a < A; ++a) {
      dyn.r_sa(s, a) =
          m.transition.row(m.sa_row(s, a)).dot(m.reward.row(m.sa_row(s, a)));
    }
  }
  dyn.r_pi = (pi.probs.array() * dyn.r_sa.array()).rowwise().sum();
  return dyn;
}

template <typename Scalar>
Policy<Scalar> uniform_policy(Index num_states, Index num_actions) {
  Policy<Scalar> pi;
  pi.probs = Mat<Scalar>::Constant(num_states, num_actions,
                                   Scalar(1) / Scalar(num_actions));
  return pi;
}

/// Rescales probability rows to sum to one. Never applied implicitly; the
/// file loader calls this only when normalization is requested.
template <typename Scalar>
void normalize_rows(Mat<Scalar>& table) {
  for (Index r = 0; r < table.rows(); ++r) {
    const Scalar sum = table.row(r).sum();
    if (sum > Scalar(0)) table.row(r) /= sum;
  }
}

}  // namespace mdpkit
