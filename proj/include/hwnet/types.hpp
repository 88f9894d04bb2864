#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hwnet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using IntVec = std::vector<long>;

}  // namespace hwnet
