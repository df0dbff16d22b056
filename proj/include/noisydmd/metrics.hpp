#pragma once

#include <cstdint>
#include <ostream>
#include <string>

#include "noisydmd/rpca.hpp"
#include "noisydmd/types.hpp"

namespace noisydmd {

/// One experiment row of the metrics CSV.
struct MetricsRecord {
  std::string dataset;
  FilterMethod method = FilterMethod::none;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  int rank_used = 0;
  double rmse = 0.0;
  double cc_paper = 0.0;
  double cc_pearson = 0.0;
  int filtered_rank = 0;
  std::string error_series_path;
  std::string error;  // empty on success
};

namespace metrics {

/// Literal correlation coefficient sqrt(1 - MAD(pred) / MAD(truth)).
/// A negative radicand yields a quiet NaN with `negative_radicand` set.
struct CcPaper {
  double value = 0.0;
  bool negative_radicand = false;
};

/// sqrt(sum |pred - truth|^2 / n), n = total entry count.
double rmse(const CMatrix& pred, const CMatrix& truth);

/// sum |M - mean(M)| / n over all entries.
double mean_absolute_deviation(const CMatrix& m);

CcPaper cc_paper(const CMatrix& pred, const CMatrix& truth);

/// Sample correlation of the flattened real parts, or of the moduli when
/// either input has a nonzero imaginary part.
double cc_pearson(const CMatrix& pred, const CMatrix& truth);

/// Count of singular values above tol * sigma_1; 0 for the zero matrix.
int numerical_rank(const CMatrix& x, double tol = 1e-6);
int numerical_rank(const Matrix& x, double tol = 1e-6);

inline constexpr const char* kCsvHeader =
    "dataset,method,snr_db,seed,rank_used,rmse,cc_paper,cc_pearson,filtered_rank,error_series_path,error";

void write_csv_row(std::ostream& os, const MetricsRecord& r);

}  // namespace metrics
}  // namespace noisydmd
