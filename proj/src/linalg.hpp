#pragma once

// Thin SVD helpers shared by the DMD, RPCA and TLS code.

#include "noisydmd/rpca.hpp"

namespace noisydmd::linalg {

template <typename Scalar>
struct ThinSvd {
  MatrixOf<Scalar> u;  // m x k
  Vector s;            // k, descending
  MatrixOf<Scalar> v;  // n x k
};

/// k = min(m, n). Throws NumericalError when LAPACK reports failure.
template <typename Scalar>
ThinSvd<Scalar> thin_svd(const MatrixOf<Scalar>& x);

/// Singular values only.
template <typename Scalar>
Vector singular_values(const MatrixOf<Scalar>& x);

}  // namespace noisydmd::linalg
