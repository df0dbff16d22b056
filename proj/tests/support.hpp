#pragma once

// Independent reference computations used as test oracles. Nothing here calls
// into the library's numerical code.

#include <cmath>
#include <complex>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "noisydmd/snapshots.hpp"

namespace testing {

using noisydmd::CMatrix;
using noisydmd::Complex;
using noisydmd::Matrix;
using noisydmd::SnapshotMatrix;

/// Snapshots of x_{k+1} = m x_k by direct recursion.
inline CMatrix recursion(const CMatrix& m, const Eigen::VectorXcd& x0, int n_snap) {
  CMatrix x(m.rows(), n_snap);
  x.col(0) = x0;
  for (int k = 1; k < n_snap; ++k) x.col(k) = m * x.col(k - 1);
  return x;
}

inline SnapshotMatrix wrap(const CMatrix& values, double dt = 1.0, bool is_complex = true) {
  SnapshotMatrix s;
  s.values = values;
  s.is_complex = is_complex;
  s.dt = dt;
  s.grid = noisydmd::GridMeta::line(static_cast<std::uint64_t>(values.rows()), 0.0, 1.0);
  return s;
}

/// A random diagonalizable system with the given eigenvalues: M = B diag(eigs) B^-1.
inline CMatrix system_with_eigs(const std::vector<Complex>& eigs, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  const auto n = static_cast<Eigen::Index>(eigs.size());
  CMatrix b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = Complex(n01(rng), n01(rng));
  Eigen::VectorXcd d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = eigs[static_cast<std::size_t>(i)];
  return b * d.asDiagonal() * b.inverse();
}

/// Eigenvalues of a general complex matrix, via Eigen's QR-based solver.
inline Eigen::VectorXcd eigenvalues(const CMatrix& m) { return Eigen::ComplexEigenSolver<CMatrix>(m, false).eigenvalues(); }

/// Greedy match: max over `expected` of the distance to the closest `got`.
inline double spectrum_distance(const Eigen::VectorXcd& got, const Eigen::VectorXcd& expected) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < expected.size(); ++i) {
    double best = INFINITY;
    for (Eigen::Index j = 0; j < got.size(); ++j) best = std::min(best, std::abs(got(j) - expected(i)));
    worst = std::max(worst, best);
  }
  return worst;
}

/// Singular values by one-sided Jacobi, an algorithm independent of the library's SVD.
template <typename M>
Eigen::VectorXd jacobi_singular_values(const M& x) {
  return Eigen::JacobiSVD<M>(x).singularValues();
}

/// Root mean square by explicit double loop.
inline double rmse_loop(const CMatrix& a, const CMatrix& b) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) acc += std::norm(a(i, j) - b(i, j));
  return std::sqrt(acc / static_cast<double>(a.size()));
}

/// Rank-r matrix from explicit Gaussian factors.
inline Matrix low_rank(Eigen::Index rows, Eigen::Index cols, Eigen::Index r, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Matrix a(rows, r), b(r, cols);
  for (auto& v : a.reshaped()) v = n01(rng);
  for (auto& v : b.reshaped()) v = n01(rng);
  return a * b;
}

/// Sparse matrix with `fraction` of entries uniform in [-mag, mag].
inline Matrix sparse(Eigen::Index rows, Eigen::Index cols, double fraction, double mag, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> val(-mag, mag);
  Matrix s = Matrix::Zero(rows, cols);
  for (auto& v : s.reshaped())
    if (u01(rng) < fraction) v = val(rng);
  return s;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Matrix m(rows, cols);
  for (auto& v : m.reshaped()) v = n01(rng);
  return m;
}

inline CMatrix random_cmatrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  CMatrix m(rows, cols);
  for (auto& v : m.reshaped()) v = Complex(n01(rng), n01(rng));
  return m;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("noisydmd_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::FILE* f = std::fopen(p.string().c_str(), "rb");
  if (!f) return {};
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

}  // namespace testing
