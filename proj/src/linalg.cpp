#include "linalg.hpp"

#include <Eigen/SVD>

#include "noisydmd/errors.hpp"

namespace noisydmd::linalg {

template <typename Scalar>
ThinSvd<Scalar> thin_svd(const MatrixOf<Scalar>& x) {
  ThinSvd<Scalar> out;
  if (std::min(x.rows(), x.cols()) == 0) return out;
  Eigen::BDCSVD<MatrixOf<Scalar>> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD failed to converge");
  out.u = svd.matrixU();
  out.s = svd.singularValues();
  out.v = svd.matrixV();
  return out;
}

template <typename Scalar>
Vector singular_values(const MatrixOf<Scalar>& x) {
  if (std::min(x.rows(), x.cols()) == 0) return Vector(0);
  Eigen::BDCSVD<MatrixOf<Scalar>> svd(x);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD failed to converge");
  return svd.singularValues();
}

template ThinSvd<double> thin_svd<double>(const MatrixOf<double>&);
template ThinSvd<Complex> thin_svd<Complex>(const MatrixOf<Complex>&);
template Vector singular_values<double>(const MatrixOf<double>&);
template Vector singular_values<Complex>(const MatrixOf<Complex>&);

}  // namespace noisydmd::linalg
