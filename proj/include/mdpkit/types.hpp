#pragma once

#include <Eigen/Dense>

namespace mdpkit {

using Index = Eigen::Index;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vecd = Vec<double>;
using Matd = Mat<double>;

/// Row-sum tolerance for stochasticity checks on probability data.
inline constexpr double kStochasticTol = 1e-12;

}  // namespace mdpkit
