#include "noisydmd/dmd.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "linalg.hpp"
#include "noisydmd/errors.hpp"

namespace noisydmd::dmd {

SvdTriple truncated_svd(const CMatrix& x, int r) {
  const Eigen::Index max_rank = std::min(x.rows(), x.cols());
  if (r < 1 || r > max_rank) {
    throw RankError("truncated_svd: rank " + std::to_string(r) + " outside [1, " +
                    std::to_string(max_rank) + "]");
  }
  if (!x.allFinite()) throw NumericalError("truncated_svd: non-finite input");
  const auto svd = linalg::thin_svd<Complex>(x);
  return SvdTriple{svd.u.leftCols(r), svd.s.head(r), svd.v.leftCols(r)};
}

int energy_rank(std::span<const double> singular_values, double fraction) {
  double total = 0.0;
  for (double s : singular_values) total += s * s;
  if (total <= 0.0) return 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < singular_values.size(); ++i) {
    acc += singular_values[i] * singular_values[i];
    if (acc >= fraction * total) return static_cast<int>(i + 1);
  }
  return static_cast<int>(singular_values.size());
}

int energy_rank(const Vector& singular_values, double fraction) {
  return energy_rank(std::span<const double>(singular_values.data(),
                                             static_cast<std::size_t>(singular_values.size())),
                     fraction);
}

DmdModel fit_from_svd(const SvdTriple& svd, const CMatrix& x1, const CMatrix& x2, double dt,
                      double t0) {
  if (!(dt > 0.0)) throw ValueError("dmd: dt must be positive");
  const auto r = svd.s.size();
  if (svd.s(r - 1) < kSingularCutoff * svd.s(0)) {
    throw SingularError("dmd: retained singular value " + std::to_string(svd.s(r - 1)) +
                        " is below 1e-12 * s_1; requested rank exceeds the data rank");
  }

  // X2 V S^-1, shared by the projected operator and the modes.
  const CMatrix x2_v_sinv = x2 * svd.v * svd.s.cwiseInverse().asDiagonal();
  const CMatrix a_tilde = svd.u.adjoint() * x2_v_sinv;

  Eigen::ComplexEigenSolver<CMatrix> eig(a_tilde, true);
  if (eig.info() != Eigen::Success) throw NumericalError("dmd: eigendecomposition failed");

  DmdModel model;
  model.rank = static_cast<int>(r);
  model.dt = dt;
  model.t0 = t0;
  model.lambda = eig.eigenvalues();
  model.w_eigvecs = eig.eigenvectors();
  model.phi = x2_v_sinv * model.w_eigvecs;
  model.omega = model.lambda.unaryExpr([dt](const Complex& l) { return std::log(l) / dt; });

  Eigen::JacobiSVD<CMatrix> wsvd(model.w_eigvecs);
  const auto& ws = wsvd.singularValues();
  model.eigvec_condition = ws(ws.size() - 1) > 0.0 ? ws(0) / ws(ws.size() - 1)
                                                   : std::numeric_limits<double>::infinity();

  // b = pinv(Phi) x1 via a rank-revealing least-squares solve.
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(model.phi);
  model.b = cod.solve(x1.col(0));
  return model;
}

DmdModel fit(const SplitPair& pair, int r, double dt) {
  const CMatrix& x1 = pair.x1.values;
  const CMatrix& x2 = pair.x2.values;
  if (x1.rows() != x2.rows() || x1.cols() != x2.cols()) throw ShapeError("dmd: split shapes differ");
  const Eigen::Index max_rank = std::min(x1.rows(), x1.cols());
  if (r <= 0) {
    r = energy_rank(linalg::singular_values<Complex>(x1));
    if (r == 0) throw RankError("dmd: data matrix is identically zero");
  }
  if (r > max_rank) {
    throw RankError("dmd: rank " + std::to_string(r) + " exceeds min(Q, P-1) = " +
                    std::to_string(max_rank));
  }
  return fit_from_svd(truncated_svd(x1, r), x1, x2, dt, pair.x1.t0);
}

CMatrix reconstruct(const DmdModel& model, std::span<const double> times) {
  CMatrix out(model.phi.rows(), static_cast<Eigen::Index>(times.size()));
  CVector coeff(model.rank);
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double t = times[j] - model.t0;
    if (!std::isfinite(t)) throw ValueError("reconstruct: non-finite time");
    for (int i = 0; i < model.rank; ++i) {
      // exp(omega * 0) is 1 even when lambda = 0 makes omega infinite.
      coeff(i) = t == 0.0 ? model.b(i) : std::exp(model.omega(i) * t) * model.b(i);
    }
    out.col(static_cast<Eigen::Index>(j)) = model.phi * coeff;
  }
  return out;
}

Vector relative_error_series(const CMatrix& pred, const CMatrix& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) {
    throw ShapeError("relative_error_series: shape mismatch");
  }
  Vector eps(truth.cols());
  for (Eigen::Index j = 0; j < truth.cols(); ++j) {
    const double denom = truth.col(j).norm();
    if (denom == 0.0) throw ZeroNormError("relative_error_series: truth column " + std::to_string(j) + " is zero");
    eps(j) = (pred.col(j) - truth.col(j)).norm() / denom;
  }
  return eps;
}

namespace {

nlohmann::json complex_list(const CVector& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back({v(i).real(), v(i).imag()});
  return arr;
}

CVector complex_vector(const nlohmann::json& arr) {
  CVector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = Complex(arr[i].at(0).get<double>(), arr[i].at(1).get<double>());
  }
  return v;
}

}  // namespace

nlohmann::json to_json(const DmdModel& model) {
  nlohmann::json doc;
  auto cols = nlohmann::json::array();
  for (Eigen::Index j = 0; j < model.phi.cols(); ++j) cols.push_back(complex_list(model.phi.col(j)));
  doc["phi"] = std::move(cols);
  doc["lambda"] = complex_list(model.lambda);
  doc["omega"] = complex_list(model.omega);
  doc["b"] = complex_list(model.b);
  doc["rank"] = model.rank;
  doc["dt"] = model.dt;
  doc["t0"] = model.t0;
  return doc;
}

DmdModel model_from_json(const nlohmann::json& doc) {
  try {
    DmdModel model;
    model.rank = doc.at("rank").get<int>();
    model.dt = doc.at("dt").get<double>();
    model.t0 = doc.value("t0", 0.0);
    model.lambda = complex_vector(doc.at("lambda"));
    model.omega = complex_vector(doc.at("omega"));
    model.b = complex_vector(doc.at("b"));
    const auto& cols = doc.at("phi");
    if (cols.size() != static_cast<std::size_t>(model.rank) || model.rank < 1) {
      throw SchemaError("model json: phi column count does not match rank");
    }
    const auto q = static_cast<Eigen::Index>(cols.at(0).size());
    model.phi.resize(q, model.rank);
    for (int j = 0; j < model.rank; ++j) {
      CVector c = complex_vector(cols[static_cast<std::size_t>(j)]);
      if (c.size() != q) throw SchemaError("model json: ragged phi columns");
      model.phi.col(j) = c;
    }
    if (model.lambda.size() != model.rank || model.omega.size() != model.rank || model.b.size() != model.rank) {
      throw SchemaError("model json: vector lengths do not match rank");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("model json: ") + e.what());
  }
}

}  // namespace noisydmd::dmd
