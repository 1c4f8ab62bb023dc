#pragma once

#include <Eigen/Dense>

namespace ordq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Eigen::Index;

}  // namespace ordq
