#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "noisydmd/types.hpp"

namespace noisydmd {

template <typename Scalar>
using MatrixOf = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// One row of the optional per-iteration diagnostics.
struct RpcaIterate {
  int iteration = 0;
  double residual = 0.0;   // ||D - L - S||_F / ||D||_F
  int rank = 0;            // singular values kept by the SVT step
  double objective = 0.0;  // ||L||_* + lambda ||S||_1
  double mu = 0.0;
};

/// D = L + S with solver diagnostics.
template <typename Scalar>
struct RpcaResult {
  MatrixOf<Scalar> l;
  MatrixOf<Scalar> s;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  double lambda = 0.0;
  double mu_initial = 0.0;
  std::vector<RpcaIterate> trace;
};

/// Principal component pursuit by alternating directions with a fixed penalty.
struct AdmParams {
  std::optional<double> mu;  // auto: n m / (4 ||D||_1)
  double lambda_coef = 1.0;  // lambda = lambda_coef / sqrt(max(n, m))
  double tol = 1e-7;
  int max_iter = 500;
  bool keep_trace = false;
  std::optional<std::filesystem::path> trace_path;

  void validate() const;
};

/// Inexact augmented Lagrange multiplier method with a growing penalty.
struct IalmParams {
  std::optional<double> mu0;     // auto: 1.25 / sigma_1(D)
  double rho = 1.5;
  std::optional<double> mu_cap;  // auto: 1e7 * mu0
  double lambda_coef = 1.0;
  double tol = 1e-7;
  int max_iter = 1000;
  bool keep_trace = false;
  std::optional<std::filesystem::path> trace_path;

  void validate() const;
};

enum class FilterMethod { none, adm, ialm, tls };

std::string to_string(FilterMethod m);
FilterMethod filter_method_from_string(const std::string& name);

/// Filtered data plus its numerical rank (the quantity in the rank plots).
struct FilterReport {
  CMatrix filtered;
  FilterMethod method = FilterMethod::none;
  int numerical_rank = 0;
};

namespace rpca {

/// Elementwise soft threshold; complex entries keep their phase.
template <typename Scalar>
MatrixOf<Scalar> shrink(const MatrixOf<Scalar>& x, double tau);

/// Singular value thresholding: U shrink(S, tau) V^*.
template <typename Scalar>
MatrixOf<Scalar> svt(const MatrixOf<Scalar>& x, double tau, int* kept_rank = nullptr);

template <typename Scalar>
RpcaResult<Scalar> rpca_adm(const MatrixOf<Scalar>& d, const AdmParams& params = {});

template <typename Scalar>
RpcaResult<Scalar> rpca_ialm(const MatrixOf<Scalar>& d, const IalmParams& params = {});

template <typename Scalar>
FilterReport filter_report(const MatrixOf<Scalar>& d, const RpcaResult<Scalar>& result,
                           FilterMethod method, double rank_tol = 1e-6);

/// ||L||_* + lambda * sum |S_ij|.
template <typename Scalar>
double objective(const MatrixOf<Scalar>& l, const MatrixOf<Scalar>& s, double lambda);

/// lambda_coef / sqrt(max(rows, cols)).
double default_lambda(Eigen::Index rows, Eigen::Index cols, double lambda_coef = 1.0);

}  // namespace rpca
}  // namespace noisydmd
