#pragma once

#include <complex>

#include <Eigen/Dense>

namespace noisydmd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

}  // namespace noisydmd
