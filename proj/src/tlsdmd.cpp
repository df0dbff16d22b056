#include "noisydmd/tlsdmd.hpp"

#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "noisydmd/errors.hpp"

namespace noisydmd::tls {

TlsProjected project(const SplitPair& pair, int r) {
  const CMatrix& x1 = pair.x1.values;
  const CMatrix& x2 = pair.x2.values;
  if (x1.rows() != x2.rows() || x1.cols() != x2.cols()) throw ShapeError("tls: split shapes differ");
  const Eigen::Index m = x1.cols();

  CMatrix z = x1.adjoint() * x1;
  z.noalias() += x2.adjoint() * x2;

  Eigen::SelfAdjointEigenSolver<CMatrix> eig(z);
  if (eig.info() != Eigen::Success) throw NumericalError("tls: eigendecomposition of Z failed");

  // Eigen returns ascending order; flip to descending.
  const Vector all = eig.eigenvalues().reverse();
  const CMatrix vecs = eig.eigenvectors().rowwise().reverse();

  if (r <= 0) {
    const Vector root = all.cwiseMax(0.0).cwiseSqrt();
    r = dmd::energy_rank(root);
    if (r == 0) throw RankError("tls: data matrix is identically zero");
  }
  if (r > m) {
    throw RankError("tls: rank " + std::to_string(r) + " exceeds P-1 = " + std::to_string(m));
  }

  TlsProjected out;
  out.proj.r = r;
  out.proj.vn = vecs.leftCols(r);
  out.proj.eigenvalues = all.head(r);
  out.proj.all_eigenvalues = all;
  const CMatrix projector = out.proj.vn * out.proj.vn.adjoint();
  out.x1 = x1 * projector;
  out.x2 = x2 * projector;
  return out;
}

DmdModel fit(const SplitPair& pair, int r, double dt, TlsProjected* projected) {
  TlsProjected p = project(pair, r);
  const int rank = p.proj.r;
  if (rank > std::min(p.x1.rows(), p.x1.cols())) {
    throw RankError("tls: rank " + std::to_string(rank) + " exceeds min(Q, P-1)");
  }
  const SvdTriple svd = dmd::truncated_svd(p.x1, rank);
  DmdModel model = dmd::fit_from_svd(svd, p.x1, p.x2, dt, pair.x1.t0);
  if (projected) *projected = std::move(p);
  return model;
}

DmdModel fit(const SplitPair& pair, int r, double dt) { return fit(pair, r, dt, nullptr); }

namespace detail {

Vector stacked_singular_values(const SplitPair& pair) {
  CMatrix stacked(pair.x1.rows() + pair.x2.rows(), pair.x1.cols());
  stacked << pair.x1.values, pair.x2.values;
  Eigen::BDCSVD<CMatrix> svd(stacked);
  return svd.singularValues();
}

}  // namespace detail
}  // namespace noisydmd::tls
