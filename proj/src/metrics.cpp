#include "noisydmd/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "linalg.hpp"
#include "noisydmd/errors.hpp"

namespace noisydmd::metrics {
namespace {

void require_same_shape(const CMatrix& a, const CMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
  if (a.size() == 0) throw ShapeError(std::string(what) + ": empty input");
}

template <typename Scalar>
int rank_of(const MatrixOf<Scalar>& x, double tol) {
  if (x.size() == 0) return 0;
  const Vector s = linalg::singular_values<Scalar>(x);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol * s(0)) ++r;
  }
  return r;
}

// CSV numbers: shortest round-trip representation keeps outputs byte-stable.
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

double rmse(const CMatrix& pred, const CMatrix& truth) {
  require_same_shape(pred, truth, "rmse");
  return std::sqrt((pred - truth).squaredNorm() / static_cast<double>(truth.size()));
}

double mean_absolute_deviation(const CMatrix& m) {
  // Second pass removes the rounding error of the first mean, so constants have MAD exactly 0.
  Complex mean = m.mean();
  mean += (m.array() - mean).mean();
  return (m.array() - mean).abs().sum() / static_cast<double>(m.size());
}

CcPaper cc_paper(const CMatrix& pred, const CMatrix& truth) {
  require_same_shape(pred, truth, "cc_paper");
  const double mad_truth = mean_absolute_deviation(truth);
  if (mad_truth == 0.0) throw DegenerateError("cc_paper: truth has zero mean absolute deviation");
  const double radicand = 1.0 - mean_absolute_deviation(pred) / mad_truth;
  if (radicand < 0.0) return CcPaper{std::numeric_limits<double>::quiet_NaN(), true};
  return CcPaper{std::sqrt(radicand), false};
}

double cc_pearson(const CMatrix& pred, const CMatrix& truth) {
  require_same_shape(pred, truth, "cc_pearson");
  const bool use_modulus = !pred.imag().isZero(0.0) || !truth.imag().isZero(0.0);
  const Eigen::ArrayXd a = use_modulus ? pred.reshaped().cwiseAbs().array().eval()
                                       : pred.reshaped().real().array().eval();
  const Eigen::ArrayXd b = use_modulus ? truth.reshaped().cwiseAbs().array().eval()
                                       : truth.reshaped().real().array().eval();
  const Eigen::ArrayXd da = a - a.mean();
  const Eigen::ArrayXd db = b - b.mean();
  const double saa = da.square().sum();
  const double sbb = db.square().sum();
  if (saa == 0.0 || sbb == 0.0) throw DegenerateError("cc_pearson: constant input");
  return (da * db).sum() / std::sqrt(saa * sbb);
}

int numerical_rank(const CMatrix& x, double tol) { return rank_of<Complex>(x, tol); }
int numerical_rank(const Matrix& x, double tol) { return rank_of<double>(x, tol); }

void write_csv_row(std::ostream& os, const MetricsRecord& r) {
  os << r.dataset << ',' << to_string(r.method) << ',' << fmt(r.snr_db) << ',' << r.seed << ','
     << r.rank_used << ',' << fmt(r.rmse) << ',' << fmt(r.cc_paper) << ',' << fmt(r.cc_pearson) << ','
     << r.filtered_rank << ',' << r.error_series_path << ',';
  // Errors are free text; keep the row parseable.
  for (char c : r.error) os << (c == ',' || c == '\n' ? ';' : c);
  os << '\n';
}

}  // namespace noisydmd::metrics
