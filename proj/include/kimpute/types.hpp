#pragma once

#include <Eigen/Dense>

namespace kimpute {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Eigen::Index;

}  // namespace kimpute
