#pragma once

#include <Eigen/Dense>

namespace deeposg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// System state u in R^n: ODE state, grid values, or modal coefficients.
using StateVector = Vector;

}  // namespace deeposg
