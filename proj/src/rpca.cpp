#include "noisydmd/rpca.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "linalg.hpp"
#include "noisydmd/errors.hpp"
#include "noisydmd/metrics.hpp"

namespace noisydmd {

std::string to_string(FilterMethod m) {
  switch (m) {
    case FilterMethod::none: return "none";
    case FilterMethod::adm: return "adm";
    case FilterMethod::ialm: return "ialm";
    case FilterMethod::tls: return "tls";
  }
  return "none";
}

FilterMethod filter_method_from_string(const std::string& name) {
  if (name == "none") return FilterMethod::none;
  if (name == "adm") return FilterMethod::adm;
  if (name == "ialm") return FilterMethod::ialm;
  if (name == "tls") return FilterMethod::tls;
  throw ConfigError("unknown method '" + name + "' (expected none, adm, ialm or tls)");
}

void AdmParams::validate() const {
  if (mu && !(*mu > 0.0)) throw ConfigError("adm: mu must be positive");
  if (!(lambda_coef > 0.0)) throw ConfigError("adm: lambda_coef must be positive");
  if (!(tol > 0.0)) throw ConfigError("adm: tol must be positive");
  if (max_iter < 1) throw ConfigError("adm: max_iter must be >= 1");
}

void IalmParams::validate() const {
  if (mu0 && !(*mu0 > 0.0)) throw ConfigError("ialm: mu0 must be positive");
  if (!(rho > 1.0)) throw ConfigError("ialm: rho must be > 1");
  if (mu_cap && !(*mu_cap > 0.0)) throw ConfigError("ialm: mu_cap must be positive");
  if (!(lambda_coef > 0.0)) throw ConfigError("ialm: lambda_coef must be positive");
  if (!(tol > 0.0)) throw ConfigError("ialm: tol must be positive");
  if (max_iter < 1) throw ConfigError("ialm: max_iter must be >= 1");
}

namespace rpca {
namespace {

template <typename Scalar>
struct SvtOutput {
  MatrixOf<Scalar> value;
  int rank = 0;
  double nuclear_norm = 0.0;
};

template <typename Scalar>
SvtOutput<Scalar> svt_impl(const MatrixOf<Scalar>& x, double tau) {
  if (!(tau >= 0.0)) throw ValueError("svt: tau must be nonnegative");
  SvtOutput<Scalar> out;
  out.value = MatrixOf<Scalar>::Zero(x.rows(), x.cols());
  if (x.size() == 0) return out;
  if (!x.allFinite()) throw NumericalError("svt: non-finite input");

  const auto svd = linalg::thin_svd<Scalar>(x);
  const Vector& sv = svd.s;
  Eigen::Index k = 0;
  while (k < sv.size() && sv(k) > tau) ++k;
  out.rank = static_cast<int>(k);
  if (k == 0) return out;

  const Vector shrunk = (sv.head(k).array() - tau).matrix();
  out.nuclear_norm = shrunk.sum();
  out.value.noalias() = svd.u.leftCols(k) * shrunk.asDiagonal() * svd.v.leftCols(k).adjoint();
  return out;
}

template <typename Scalar>
double l1_norm(const MatrixOf<Scalar>& x) {
  return x.cwiseAbs().sum();
}

template <typename Scalar>
double spectral_norm(const MatrixOf<Scalar>& x) {
  const Vector s = linalg::singular_values<Scalar>(x);
  return s.size() > 0 ? s(0) : 0.0;
}

template <typename Scalar>
RpcaResult<Scalar> zero_result(const MatrixOf<Scalar>& d, double lambda) {
  RpcaResult<Scalar> r;
  r.l = MatrixOf<Scalar>::Zero(d.rows(), d.cols());
  r.s = MatrixOf<Scalar>::Zero(d.rows(), d.cols());
  r.converged = true;
  r.lambda = lambda;
  return r;
}

void write_trace(const std::filesystem::path& path, const std::vector<RpcaIterate>& trace) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open trace file " + path.string());
  os << "iteration,residual,rank,objective,mu\n" << std::setprecision(12);
  for (const auto& it : trace) {
    os << it.iteration << ',' << it.residual << ',' << it.rank << ',' << it.objective << ',' << it.mu << '\n';
  }
}

// Shared loop: L <- svt(D - S + Y/mu, 1/mu); S <- shrink(D - L + Y/mu, lambda/mu);
// Y <- Y + mu (D - L - S); mu <- min(growth * mu, mu_cap).
template <typename Scalar>
RpcaResult<Scalar> alternate(const MatrixOf<Scalar>& d, MatrixOf<Scalar> y, double lambda, double mu,
                             double growth, double mu_cap, double tol, int max_iter, bool keep_trace,
                             const std::optional<std::filesystem::path>& trace_path) {
  const double norm_d = d.norm();
  RpcaResult<Scalar> result;
  result.lambda = lambda;
  result.mu_initial = mu;
  result.l = MatrixOf<Scalar>::Zero(d.rows(), d.cols());
  result.s = MatrixOf<Scalar>::Zero(d.rows(), d.cols());
  result.residual = 1.0;
  const bool tracing = keep_trace || trace_path.has_value();

  MatrixOf<Scalar> work(d.rows(), d.cols());
  for (int k = 1; k <= max_iter; ++k) {
    const double inv_mu = 1.0 / mu;
    work = d - result.s + inv_mu * y;
    auto low_rank = svt_impl<Scalar>(work, inv_mu);
    result.l = std::move(low_rank.value);

    work = d - result.l + inv_mu * y;
    result.s = shrink<Scalar>(work, lambda * inv_mu);

    work = d - result.l - result.s;
    y += mu * work;
    result.residual = work.norm() / norm_d;
    result.iterations = k;

    if (tracing) {
      result.trace.push_back(RpcaIterate{k, result.residual, low_rank.rank,
                                         low_rank.nuclear_norm + lambda * l1_norm<Scalar>(result.s), mu});
    }
    if (!std::isfinite(result.residual)) throw NumericalError("rpca: iteration diverged");
    if (result.residual <= tol) {
      result.converged = true;
      break;
    }
    mu = std::min(growth * mu, mu_cap);
  }
  if (trace_path) write_trace(*trace_path, result.trace);
  if (!keep_trace) result.trace.clear();
  return result;
}

}  // namespace

double default_lambda(Eigen::Index rows, Eigen::Index cols, double lambda_coef) {
  return lambda_coef / std::sqrt(static_cast<double>(std::max(rows, cols)));
}

template <typename Scalar>
MatrixOf<Scalar> shrink(const MatrixOf<Scalar>& x, double tau) {
  if (!(tau >= 0.0)) throw ValueError("shrink: tau must be nonnegative");
  return x.unaryExpr([tau](const Scalar& v) -> Scalar {
    const double mag = std::abs(v);
    if (mag <= tau) return Scalar(0);
    return v * ((mag - tau) / mag);
  });
}

template <typename Scalar>
MatrixOf<Scalar> svt(const MatrixOf<Scalar>& x, double tau, int* kept_rank) {
  auto out = svt_impl<Scalar>(x, tau);
  if (kept_rank) *kept_rank = out.rank;
  return std::move(out.value);
}

template <typename Scalar>
double objective(const MatrixOf<Scalar>& l, const MatrixOf<Scalar>& s, double lambda) {
  return linalg::singular_values<Scalar>(l).sum() + lambda * l1_norm<Scalar>(s);
}

template <typename Scalar>
RpcaResult<Scalar> rpca_adm(const MatrixOf<Scalar>& d, const AdmParams& params) {
  params.validate();
  if (!d.allFinite()) throw ValueError("rpca_adm: input has non-finite entries");
  const double lambda = default_lambda(d.rows(), d.cols(), params.lambda_coef);
  const double l1 = l1_norm<Scalar>(d);
  if (l1 == 0.0) return zero_result<Scalar>(d, lambda);

  const double mu = params.mu.value_or(static_cast<double>(d.size()) / (4.0 * l1));
  return alternate<Scalar>(d, MatrixOf<Scalar>::Zero(d.rows(), d.cols()), lambda, mu, 1.0, mu,
                           params.tol, params.max_iter, params.keep_trace, params.trace_path);
}

template <typename Scalar>
RpcaResult<Scalar> rpca_ialm(const MatrixOf<Scalar>& d, const IalmParams& params) {
  params.validate();
  if (!d.allFinite()) throw ValueError("rpca_ialm: input has non-finite entries");
  const double lambda = default_lambda(d.rows(), d.cols(), params.lambda_coef);
  const double norm2 = spectral_norm<Scalar>(d);
  if (norm2 == 0.0) return zero_result<Scalar>(d, lambda);

  // Dual start Y = D / J(D), J(D) = max(||D||_2, ||D||_inf / lambda).
  const double norm_inf = d.cwiseAbs().maxCoeff();
  const double j = std::max(norm2, norm_inf / lambda);
  const double mu0 = params.mu0.value_or(1.25 / norm2);
  const double mu_cap = params.mu_cap.value_or(1e7 * mu0);
  return alternate<Scalar>(d, d / j, lambda, mu0, params.rho, mu_cap, params.tol, params.max_iter,
                           params.keep_trace, params.trace_path);
}

template <typename Scalar>
FilterReport filter_report(const MatrixOf<Scalar>& /*d*/, const RpcaResult<Scalar>& result,
                           FilterMethod method, double rank_tol) {
  FilterReport report;
  report.filtered = result.l.template cast<Complex>();
  report.method = method;
  report.numerical_rank = metrics::numerical_rank(report.filtered, rank_tol);
  return report;
}

#define NOISYDMD_INSTANTIATE_RPCA(Scalar)                                                          \
  template MatrixOf<Scalar> shrink<Scalar>(const MatrixOf<Scalar>&, double);                      \
  template MatrixOf<Scalar> svt<Scalar>(const MatrixOf<Scalar>&, double, int*);                   \
  template double objective<Scalar>(const MatrixOf<Scalar>&, const MatrixOf<Scalar>&, double);    \
  template RpcaResult<Scalar> rpca_adm<Scalar>(const MatrixOf<Scalar>&, const AdmParams&);        \
  template RpcaResult<Scalar> rpca_ialm<Scalar>(const MatrixOf<Scalar>&, const IalmParams&);      \
  template FilterReport filter_report<Scalar>(const MatrixOf<Scalar>&, const RpcaResult<Scalar>&, \
                                              FilterMethod, double);

NOISYDMD_INSTANTIATE_RPCA(double)
NOISYDMD_INSTANTIATE_RPCA(Complex)

#undef NOISYDMD_INSTANTIATE_RPCA

}  // namespace rpca
}  // namespace noisydmd
