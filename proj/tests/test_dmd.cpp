#include <doctest.h>

#include <numbers>

#include "noisydmd/dmd.hpp"
#include "noisydmd/errors.hpp"
#include "support.hpp"

using namespace noisydmd;

namespace {

SnapshotMatrix diag_system(int n_snap = 20) {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 0.9;
  m(1, 1) = 0.5;
  return testing::wrap(testing::recursion(m, Eigen::VectorXcd::Ones(2), n_snap), 0.1, false);
}

}  // namespace

TEST_CASE("truncated svd of a diagonal matrix") {
  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 3;
  d(1, 1) = 2;
  d(2, 2) = 1;
  const auto svd = dmd::truncated_svd(d, 2);
  REQUIRE(svd.s.size() == 2);
  CHECK(svd.s(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(svd.s(1) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("truncated svd of a rank-one outer product") {
  std::mt19937_64 rng(2);
  const CMatrix u = testing::random_cmatrix(6, 1, rng);
  const CMatrix v = testing::random_cmatrix(5, 1, rng);
  const CMatrix x = u * v.transpose();
  const auto svd = dmd::truncated_svd(x, 1);
  CHECK((svd.u * svd.s.asDiagonal() * svd.v.adjoint() - x).norm() / x.norm() < 1e-12);
}

TEST_CASE("truncated svd of a random 50x40 matrix") {
  std::mt19937_64 rng(5);
  const CMatrix x = testing::random_matrix(50, 40, rng).cast<Complex>();
  const auto svd = dmd::truncated_svd(x, 40);
  CHECK((svd.u * svd.s.asDiagonal() * svd.v.adjoint() - x).norm() / x.norm() < 1e-12);
  // Against an independent Jacobi SVD.
  const Vector oracle = testing::jacobi_singular_values(Matrix(x.real()));
  CHECK((svd.s - oracle).norm() / oracle.norm() < 1e-12);
  CHECK((svd.u.adjoint() * svd.u - CMatrix::Identity(40, 40)).norm() < 1e-10);
  CHECK((svd.v.adjoint() * svd.v - CMatrix::Identity(40, 40)).norm() < 1e-10);
  for (Eigen::Index i = 1; i < svd.s.size(); ++i) CHECK(svd.s(i) <= svd.s(i - 1));
}

TEST_CASE("truncated svd rank checks") {
  const CMatrix x = CMatrix::Ones(4, 3);
  CHECK_THROWS_AS(dmd::truncated_svd(x, 0), RankError);
  CHECK_THROWS_AS(dmd::truncated_svd(x, 4), RankError);
}

TEST_CASE("energy rank rule") {
  CHECK(dmd::energy_rank(Vector::Zero(3)) == 0);
  Vector s(3);
  s << 10, 1, 0.01;
  // 100 / 101.0001 < 0.999, 101 / 101.0001 > 0.999
  CHECK(dmd::energy_rank(s) == 2);
  CHECK(dmd::energy_rank(s, 0.5) == 1);
}

TEST_CASE("fit recovers a diagonal system") {
  const auto x = diag_system();
  const auto model = dmd::fit(snapshots::split(x), 2, x.dt);
  Eigen::VectorXcd expected(2);
  expected << 0.9, 0.5;
  CHECK(testing::spectrum_distance(model.lambda, expected) < 1e-8);
  for (Eigen::Index i = 0; i < 2; ++i) {
    CHECK(std::abs(std::exp(model.omega(i) * x.dt) - model.lambda(i)) < 1e-12);
  }
  CHECK((model.phi * model.b - x.values.col(0)).norm() <= 1e-6 * x.values.col(0).norm());
  const CMatrix pred = dmd::reconstruct(model, x.times());
  CHECK((pred - x.values).norm() / x.values.norm() < 1e-8);
}

TEST_CASE("fit of a single geometric mode") {
  std::mt19937_64 rng(9);
  const CMatrix q = testing::random_cmatrix(5, 1, rng);
  CMatrix v(5, 6);
  for (int k = 0; k < 6; ++k) v.col(k) = std::pow(2.0, k) * q;
  const auto model = dmd::fit(snapshots::split(testing::wrap(v)), 1, 1.0);
  CHECK(std::abs(model.lambda(0) - 2.0) < 1e-10);
  const Complex ratio = q.col(0).dot(model.phi.col(0)) / q.squaredNorm();
  CHECK((model.phi.col(0) - ratio * q).norm() < 1e-10 * model.phi.norm());
}

TEST_CASE("fit and reconstruct a rank-3 linear system") {
  std::mt19937_64 rng(21);
  const CMatrix m = testing::system_with_eigs({0.95, Complex(0.7, 0.3), Complex(0.7, -0.3)}, rng);
  // Lift into 8 dimensions so the data matrix is 8 x P with rank 3.
  const CMatrix lift = testing::random_cmatrix(8, 3, rng);
  const CMatrix base = testing::recursion(m, testing::random_cmatrix(3, 1, rng), 25);
  const auto x = testing::wrap(lift * base, 0.2);
  const auto model = dmd::fit(snapshots::split(x), 3, x.dt);
  const CMatrix pred = dmd::reconstruct(model, x.times());
  CHECK((pred - x.values).norm() / x.values.norm() < 1e-8);
  CHECK((dmd::reconstruct(model, std::vector<double>{x.t0}).col(0) - x.values.col(0)).norm() <
        1e-8 * x.values.col(0).norm());
}

TEST_CASE("eigenvalue recovery on random diagonalizable systems") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> radius(0.3, 0.98);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 7;
    std::vector<Complex> eigs;
    for (int i = 0; i < n; ++i) eigs.push_back(std::polar(radius(rng), angle(rng)));
    const CMatrix m = testing::system_with_eigs(eigs, rng);
    const CMatrix data = testing::recursion(m, testing::random_cmatrix(n, 1, rng), 3 * n + 5);
    const auto model = dmd::fit(snapshots::split(testing::wrap(data)), n, 1.0);
    CHECK(testing::spectrum_distance(model.lambda, testing::eigenvalues(m)) < 1e-8);
  }
}

TEST_CASE("fit rank errors") {
  const auto x = diag_system();
  CHECK_THROWS_AS(dmd::fit(snapshots::split(x), 3, x.dt), RankError);
  // Rank 2 data with a rank-2 request on 3 rows is fine; asking for 3 of an embedded rank-2 signal is singular.
  CMatrix lifted(3, x.cols());
  lifted << x.values, x.values.row(0) + x.values.row(1);
  CHECK_THROWS_AS(dmd::fit(snapshots::split(testing::wrap(lifted)), 3, 1.0), SingularError);
  CHECK_THROWS_AS(dmd::fit(snapshots::split(testing::wrap(CMatrix::Zero(3, 5))), 0, 1.0), RankError);
}

TEST_CASE("auto rank uses the energy rule") {
  const auto x = diag_system();
  const auto model = dmd::fit(snapshots::split(x), 0, x.dt);
  CHECK(model.rank == dmd::energy_rank(testing::jacobi_singular_values(CMatrix(x.values.leftCols(x.cols() - 1)))));
}

TEST_CASE("reconstruct with a constant mode") {
  DmdModel model;
  model.rank = 2;
  model.phi = CMatrix::Random(4, 2);
  model.lambda = CVector::Ones(2);
  model.omega = CVector::Zero(2);
  model.b = CVector::Zero(2);
  model.b(0) = 1.0;
  const CMatrix out = dmd::reconstruct(model, std::vector<double>{0.0, 1.0, 7.5});
  for (Eigen::Index j = 0; j < out.cols(); ++j) CHECK((out.col(j) - model.phi.col(0)).norm() < 1e-15);
}

TEST_CASE("reconstruct uses time relative to t0") {
  auto x = diag_system();
  x.t0 = 3.0;
  const auto model = dmd::fit(snapshots::split(x), 2, x.dt);
  CHECK(model.t0 == 3.0);
  const CMatrix pred = dmd::reconstruct(model, x.times());
  CHECK((pred - x.values).norm() / x.values.norm() < 1e-8);
}

TEST_CASE("relative error series") {
  std::mt19937_64 rng(6);
  const CMatrix truth = testing::random_cmatrix(4, 5, rng);
  CHECK(dmd::relative_error_series(truth, truth).cwiseAbs().maxCoeff() == 0.0);
  const Vector twice = dmd::relative_error_series(2.0 * truth, truth);
  CHECK((twice.array() - 1.0).abs().maxCoeff() < 1e-15);

  CMatrix t = CMatrix::Zero(3, 1);
  t(0, 0) = 4.0;
  CMatrix p = t;
  p(1, 0) += 1.0;
  CHECK(dmd::relative_error_series(p, t)(0) == doctest::Approx(0.25));

  CHECK_THROWS_AS(dmd::relative_error_series(CMatrix::Zero(3, 2), CMatrix::Zero(3, 2)), ZeroNormError);
}

TEST_CASE("model json round trip") {
  const auto x = diag_system();
  const auto model = dmd::fit(snapshots::split(x), 2, x.dt);
  const auto back = dmd::model_from_json(nlohmann::json::parse(dmd::to_json(model).dump()));
  CHECK(back.rank == 2);
  CHECK(back.phi == model.phi);
  CHECK(back.lambda == model.lambda);
  CHECK(back.b == model.b);
  CHECK_THROWS_AS(dmd::model_from_json(nlohmann::json::parse(R"({"rank": 2})")), SchemaError);
}
