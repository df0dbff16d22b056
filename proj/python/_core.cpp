#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "noisydmd/errors.hpp"
#include "noisydmd/experiment.hpp"
#include "noisydmd/plot.hpp"

namespace py = pybind11;
using namespace noisydmd;

namespace {

SnapshotMatrix from_array(const CMatrix& values, bool is_complex, double dt, double t0) {
  SnapshotMatrix x;
  x.values = values;
  x.is_complex = is_complex;
  x.dt = dt;
  x.t0 = t0;
  x.grid = GridMeta::line(static_cast<std::uint64_t>(values.rows()), 0.0, 1.0);
  x.validate();
  return x;
}

template <typename Scalar>
py::dict rpca_dict(RpcaResult<Scalar>&& r) {
  py::dict d;
  d["l"] = std::move(r.l);
  d["s"] = std::move(r.s);
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["residual"] = r.residual;
  d["lambda"] = r.lambda;
  d["mu_initial"] = r.mu_initial;
  py::list trace;
  for (const auto& it : r.trace) {
    trace.append(py::make_tuple(it.iteration, it.residual, it.rank, it.objective, it.mu));
  }
  d["trace"] = trace;
  return d;
}

template <typename Scalar>
void def_rpca(py::module_& m) {
  m.def(
      "shrink", [](const MatrixOf<Scalar>& x, double tau) { return rpca::shrink<Scalar>(x, tau); }, py::arg("x"),
      py::arg("tau"));
  m.def(
      "svt",
      [](const MatrixOf<Scalar>& x, double tau) {
        int rank = 0;
        MatrixOf<Scalar> out = rpca::svt<Scalar>(x, tau, &rank);
        return py::make_tuple(out, rank);
      },
      py::arg("x"), py::arg("tau"), "Singular value thresholding; returns (matrix, kept rank).");
  m.def(
      "rpca_adm",
      [](const MatrixOf<Scalar>& d, std::optional<double> mu, double lambda_coef, double tol, int max_iter,
         bool keep_trace) {
        AdmParams p;
        p.mu = mu;
        p.lambda_coef = lambda_coef;
        p.tol = tol;
        p.max_iter = max_iter;
        p.keep_trace = keep_trace;
        return rpca_dict(rpca::rpca_adm<Scalar>(d, p));
      },
      py::arg("d"), py::arg("mu") = py::none(), py::arg("lambda_coef") = 1.0, py::arg("tol") = 1e-7,
      py::arg("max_iter") = 500, py::arg("keep_trace") = false);
  m.def(
      "rpca_ialm",
      [](const MatrixOf<Scalar>& d, std::optional<double> mu0, double rho, std::optional<double> mu_cap,
         double lambda_coef, double tol, int max_iter, bool keep_trace) {
        IalmParams p;
        p.mu0 = mu0;
        p.rho = rho;
        p.mu_cap = mu_cap;
        p.lambda_coef = lambda_coef;
        p.tol = tol;
        p.max_iter = max_iter;
        p.keep_trace = keep_trace;
        return rpca_dict(rpca::rpca_ialm<Scalar>(d, p));
      },
      py::arg("d"), py::arg("mu0") = py::none(), py::arg("rho") = 1.5, py::arg("mu_cap") = py::none(),
      py::arg("lambda_coef") = 1.0, py::arg("tol") = 1e-7, py::arg("max_iter") = 1000,
      py::arg("keep_trace") = false);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Noise-robust dynamic mode decomposition";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<SnapshotMatrix>(m, "SnapshotMatrix")
      .def(py::init(&from_array), py::arg("values"), py::arg("is_complex") = true, py::arg("dt") = 1.0,
           py::arg("t0") = 0.0)
      .def_readonly("values", &SnapshotMatrix::values)
      .def_readonly("is_complex", &SnapshotMatrix::is_complex)
      .def_readonly("dt", &SnapshotMatrix::dt)
      .def_readonly("t0", &SnapshotMatrix::t0)
      .def_property_readonly("shape", [](const SnapshotMatrix& x) { return py::make_tuple(x.rows(), x.cols()); })
      .def("times", &SnapshotMatrix::times)
      .def("__repr__", [](const SnapshotMatrix& x) {
        return "<SnapshotMatrix " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
               " dt=" + std::to_string(x.dt) + ">";
      });

  m.def("load", &snapshots::load, py::arg("path"));
  m.def("save", &snapshots::save, py::arg("x"), py::arg("path"));
  m.def(
      "add_noise",
      [](const SnapshotMatrix& x, double snr_db, std::uint64_t seed) {
        return snapshots::add_noise(x, NoiseSpec{snr_db, seed});
      },
      py::arg("x"), py::arg("snr_db"), py::arg("seed") = 0);
  m.def("empirical_snr_db", &snapshots::empirical_snr_db, py::arg("signal"), py::arg("noisy"));

  m.def(
      "solve_nlse",
      [](int n_w, int n_t, double t_max, double amplitude) {
        pde::NlseConfig c;
        c.n_w = n_w;
        c.n_t = n_t;
        c.t_max = t_max;
        c.amplitude = amplitude;
        return pde::solve_nlse(c);
      },
      py::arg("n_w") = pde::NlseConfig{}.n_w, py::arg("n_t") = pde::NlseConfig{}.n_t,
      py::arg("t_max") = pde::NlseConfig{}.t_max, py::arg("amplitude") = pde::NlseConfig{}.amplitude);
  m.def(
      "solve_fne",
      [](int n_x, int n_t, double t_max, bool stack_w) {
        pde::FneConfig c;
        c.n_x = n_x;
        c.n_t = n_t;
        c.t_max = t_max;
        c.stack_w = stack_w;
        return pde::solve_fne(c);
      },
      py::arg("n_x") = pde::FneConfig{}.n_x, py::arg("n_t") = pde::FneConfig{}.n_t,
      py::arg("t_max") = pde::FneConfig{}.t_max, py::arg("stack_w") = true);
  m.def(
      "solve_swe",
      [](int nx, int ny, int n_t, double t_max) {
        pde::SweConfig c;
        c.nx = nx;
        c.ny = ny;
        c.n_t = n_t;
        c.t_max = t_max;
        return pde::solve_swe(c);
      },
      py::arg("nx") = pde::SweConfig{}.nx, py::arg("ny") = pde::SweConfig{}.ny,
      py::arg("n_t") = pde::SweConfig{}.n_t, py::arg("t_max") = pde::SweConfig{}.t_max);

  def_rpca<double>(m);
  def_rpca<Complex>(m);

  py::class_<DmdModel>(m, "DmdModel")
      .def_readonly("modes", &DmdModel::phi)
      .def_readonly("eigenvalues", &DmdModel::lambda)
      .def_readonly("omega", &DmdModel::omega)
      .def_readonly("amplitudes", &DmdModel::b)
      .def_readonly("rank", &DmdModel::rank)
      .def_readonly("dt", &DmdModel::dt)
      .def_readonly("t0", &DmdModel::t0)
      .def_readonly("eigvec_condition", &DmdModel::eigvec_condition)
      .def("reconstruct", [](const DmdModel& model, const std::vector<double>& t) { return dmd::reconstruct(model, t); },
           py::arg("times"));

  m.def(
      "dmd_fit", [](const SnapshotMatrix& x, int rank) { return dmd::fit(snapshots::split(x), rank, x.dt); },
      py::arg("x"), py::arg("rank") = 0, "Exact DMD; rank 0 selects the 99.9% energy rule.");
  m.def(
      "tls_fit", [](const SnapshotMatrix& x, int rank) { return tls::fit(snapshots::split(x), rank, x.dt); },
      py::arg("x"), py::arg("rank") = 0, "Total-least-squares DMD.");
  m.def(
      "tls_project",
      [](const SnapshotMatrix& x, int rank) {
        TlsProjected p = tls::project(snapshots::split(x), rank);
        return py::make_tuple(std::move(p.x1), std::move(p.x2), p.proj.r);
      },
      py::arg("x"), py::arg("rank") = 0, "Returns (X1 Vn Vn^*, X2 Vn Vn^*, r).");

  m.def("rmse", &metrics::rmse, py::arg("pred"), py::arg("truth"));
  m.def(
      "cc_paper", [](const CMatrix& p, const CMatrix& t) { return metrics::cc_paper(p, t).value; },
      py::arg("pred"), py::arg("truth"));
  m.def("cc_pearson", &metrics::cc_pearson, py::arg("pred"), py::arg("truth"));
  m.def(
      "numerical_rank", [](const CMatrix& x, double tol) { return metrics::numerical_rank(x, tol); }, py::arg("x"),
      py::arg("tol") = 1e-6);
  m.def("relative_error_series", &dmd::relative_error_series, py::arg("pred"), py::arg("truth"));
}
