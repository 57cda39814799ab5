#pragma once

#include <Eigen/Dense>

namespace hmnss {

using Vec = Eigen::VectorXd;
// row-major so rows can be handed to the raw kernels
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace hmnss
