#pragma once

#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdpkit/mdp.hpp"
#include "mdpkit/trajectory.hpp"
#include "mdpkit/types.hpp"

namespace mdpkit {

using Json = nlohmann::json;

/// Input problem: missing file, malformed JSON, or a schema violation.
/// The message carries the file and the offending path.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline Json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline double as_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  return j.get<double>();
}

inline const Json& member(const Json& j, const std::string& key,
                          const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw InputError(where + ": missing key '" + key + "'");
  return *it;
}

inline Matd nested_rows(const Json& arr, Index expected_rows,
                        Index expected_cols, const std::string& where) {
  if (!arr.is_array() || Index(arr.size()) != expected_rows) {
    throw InputError(where + ": expected an array of length " +
                     std::to_string(expected_rows));
  }
  Matd out(expected_rows, expected_cols);
  for (Index r = 0; r < expected_rows; ++r) {
    const Json& row = arr[r];
    if (!row.is_array() || Index(row.size()) != expected_cols) {
      throw InputError(where + "[" + std::to_string(r) +
                       "]: expected an array of length " +
                       std::to_string(expected_cols));
    }
    for (Index c = 0; c < expected_cols; ++c) {
      out(r, c) = as_number(row[c], where + "[" + std::to_string(r) + "][" +
                                        std::to_string(c) + "]");
    }
  }
  return out;
}

}  // namespace detail

/**
 * Reads an MDP from the JSON schema
 *   { num_states, num_actions, gamma, rho0: [S],
 *     transition: [S][A][S], reward: [S][A][S] or [S][A] }
 * where a two-level reward is broadcast over the landed state. Set
 * `normalize` to rescale probability rows; nothing is rescaled otherwise.
 */
inline Mdpd mdp_from_json(const Json& j, const std::string& where,
                          bool normalize = false) {
  Mdpd m;
  m.num_states =
      Index(detail::as_number(detail::member(j, "num_states", where),
                              where + ".num_states"));
  m.num_actions =
      Index(detail::as_number(detail::member(j, "num_actions", where),
                              where + ".num_actions"));
  if (m.num_states <= 0 || m.num_actions <= 0) {
    throw InputError(where + ": num_states and num_actions must be positive");
  }
  m.gamma = detail::as_number(detail::member(j, "gamma", where),
                              where + ".gamma");

  const Index S = m.num_states;
  const Index A = m.num_actions;

  const Json& rho = detail::member(j, "rho0", where);
  if (!rho.is_array() || Index(rho.size()) != S) {
    throw InputError(where + ".rho0: expected an array of length " +
                     std::to_string(S));
  }
  m.rho0.resize(S);
  for (Index s = 0; s < S; ++s) {
    m.rho0[s] = detail::as_number(rho[s],
                                  where + ".rho0[" + std::to_string(s) + "]");
  }

  const Json& trans = detail::member(j, "transition", where);
  if (!trans.is_array() || Index(trans.size()) != S) {
    throw InputError(where + ".transition: expected an array of length " +
                     std::to_string(S));
  }
  m.transition.resize(S * A, S);
  for (Index s = 0; s < S; ++s) {
    const Matd rows = detail::nested_rows(
        trans[s], A, S, where + ".transition[" + std::to_string(s) + "]");
    m.transition.middleRows(s * A, A) = rows;
  }

  const Json& rew = detail::member(j, "reward", where);
  if (!rew.is_array() || Index(rew.size()) != S) {
    throw InputError(where + ".reward: expected an array of length " +
                     std::to_string(S));
  }
  m.reward.resize(S * A, S);
  const bool broadcast = !rew[0].empty() && !rew[0][0].is_array();
  for (Index s = 0; s < S; ++s) {
    const std::string rwhere = where + ".reward[" + std::to_string(s) + "]";
    if (broadcast) {
      const Json& row = rew[s];
      if (!row.is_array() || Index(row.size()) != A) {
        throw InputError(rwhere + ": expected an array of length " +
                         std::to_string(A));
      }
      for (Index a = 0; a < A; ++a) {
        const double value =
            detail::as_number(row[a], rwhere + "[" + std::to_string(a) + "]");
        m.reward.row(s * A + a).setConstant(value);
      }
    } else {
      m.reward.middleRows(s * A, A) = detail::nested_rows(rew[s], A, S, rwhere);
    }
  }

  if (normalize) {
    normalize_rows(m.transition);
    const double total = m.rho0.sum();
    if (total > 0.0) m.rho0 /= total;
  }
  return m;
}

inline Mdpd load_mdp(const std::string& path, bool normalize = false) {
  return mdp_from_json(detail::parse_file(path), path, normalize);
}

/// Policy JSON is a bare two-level array [S][A].
inline Policyd policy_from_json(const Json& j, const std::string& where,
                                bool normalize = false) {
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
    throw InputError(where + ": expected a non-empty 2-level array");
  }
  Policyd pi;
  pi.probs = detail::nested_rows(j, Index(j.size()), Index(j[0].size()), where);
  if (normalize) normalize_rows(pi.probs);
  return pi;
}

inline Policyd load_policy(const std::string& path, bool normalize = false) {
  return policy_from_json(detail::parse_file(path), path, normalize);
}

inline Json to_json(const Mdpd& m) {
  Json trans = Json::array();
  Json rew = Json::array();
  for (Index s = 0; s < m.num_states; ++s) {
    Json ta = Json::array();
    Json ra = Json::array();
    for (Index a = 0; a < m.num_actions; ++a) {
      const Index row = m.sa_row(s, a);
      ta.push_back(std::vector<double>(
          m.transition.row(row).begin(), m.transition.row(row).end()));
      ra.push_back(std::vector<double>(m.reward.row(row).begin(),
                                       m.reward.row(row).end()));
    }
    trans.push_back(std::move(ta));
    rew.push_back(std::move(ra));
  }
  return Json{{"num_states", m.num_states},
              {"num_actions", m.num_actions},
              {"gamma", m.gamma},
              {"rho0", std::vector<double>(m.rho0.begin(), m.rho0.end())},
              {"transition", std::move(trans)},
              {"reward", std::move(rew)}};
}

inline Json to_json(const Policyd& pi) {
  Json rows = Json::array();
  for (Index s = 0; s < pi.probs.rows(); ++s) {
    rows.push_back(std::vector<double>(pi.probs.row(s).begin(),
                                       pi.probs.row(s).end()));
  }
  return rows;
}

inline Json to_json(const Vecd& v) {
  return Json(std::vector<double>(v.begin(), v.end()));
}

inline Json to_json(const Matd& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return rows;
}

/// One trajectory per line with keys states/actions/rewards.
inline void dump_trajectories(const std::vector<Trajectoryd>& trajectories,
                              std::ostream& os) {
  for (const auto& traj : trajectories) {
    Json line{{"states", traj.states},
              {"actions", traj.actions},
              {"rewards", traj.rewards}};
    os << line.dump() << "\n";
  }
}

}  // namespace mdpkit
