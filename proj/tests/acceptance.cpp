// Acceptance report: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

#include "noisydmd/errors.hpp"
#include "noisydmd/experiment.hpp"
#include "noisydmd/metrics.hpp"
#include "noisydmd/pde.hpp"
#include "noisydmd/rpca.hpp"
#include "support.hpp"

using namespace noisydmd;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Cells are shared between criteria that need the same (dataset, method, snr, seed).
class CellCache {
 public:
  const MetricsRecord& get(Dataset ds, FilterMethod m, double snr, std::uint64_t seed) {
    const auto key = std::make_tuple(ds, m, snr, seed);
    if (auto it = cells_.find(key); it != cells_.end()) return it->second;
    const auto& clean = data(ds);
    ExperimentConfig cfg;
    cfg.dataset = ds;
    return cells_[key] = experiment::run_cell(clean, m, snr, seed, cfg).record;
  }
  bool has(Dataset ds, FilterMethod m, double snr, std::uint64_t seed) const {
    return cells_.count(std::make_tuple(ds, m, snr, seed)) > 0;
  }
  const SnapshotMatrix& data(Dataset ds) {
    auto it = data_.find(ds);
    if (it == data_.end()) {
      ExperimentConfig cfg;
      cfg.dataset = ds;
      it = data_.emplace(ds, experiment::generate(cfg)).first;
    }
    return it->second;
  }

 private:
  std::map<std::tuple<Dataset, FilterMethod, double, std::uint64_t>, MetricsRecord> cells_;
  std::map<Dataset, SnapshotMatrix> data_;
};

CellCache cache;

Verdict dmd_spectrum() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> radius(0.3, 0.98);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 8;
    std::vector<Complex> eigs;
    for (int i = 0; i < n; ++i) eigs.push_back(std::polar(radius(rng), angle(rng)));
    const CMatrix m = testing::system_with_eigs(eigs, rng);
    const CMatrix data = testing::recursion(m, testing::random_cmatrix(n, 1, rng), 3 * n + 5);
    const auto model = dmd::fit(snapshots::split(testing::wrap(data)), n, 1.0);
    worst = std::max(worst, testing::spectrum_distance(model.lambda, testing::eigenvalues(m)));
  }
  const double t = seconds_since(start);
  std::ostringstream os;
  os << "worst eigenvalue error " << worst << ", " << t << " s";
  return {worst < 1e-8 && t < 5.0, os.str()};
}

Verdict nlse_soliton() {
  const auto start = Clock::now();
  pde::NlseConfig cfg;
  cfg.amplitude = 1.0;
  cfg.n_w = 512;
  cfg.n_t = 100;
  const auto x = pde::solve_nlse(cfg);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double w = cfg.w_min + static_cast<double>(i) * (cfg.w_max - cfg.w_min) / cfg.n_w;
      const Complex exact = std::exp(Complex(0.0, x.time(k) / 2)) / std::cosh(w);
      worst = std::max(worst, std::abs(x.values(i, k) - exact));
    }
  }
  const Vector mass = x.values.cwiseAbs2().colwise().sum().transpose();
  const double drift = ((mass.array() - mass(0)).abs() / mass(0)).maxCoeff();
  const double t = seconds_since(start);
  std::ostringstream os;
  os << "max error " << worst << ", norm drift " << drift << ", " << t << " s";
  return {worst < 1e-6 && drift < 1e-8 && t < 10.0, os.str()};
}

Verdict conservation() {
  const auto swe = pde::solve_swe({});
  const Vector mass = swe.values.real().colwise().sum().transpose();
  const double drift = ((mass.array() - mass(0)).abs() / mass(0)).maxCoeff();

  pde::FneConfig f;
  f.v0.assign(static_cast<std::size_t>(f.n_x), 0.0);
  f.w0.assign(static_cast<std::size_t>(f.n_x), 0.0);
  const double fne_max = pde::solve_fne(f).values.cwiseAbs().maxCoeff();
  std::ostringstream os;
  os << "swe mass drift " << drift << " over " << swe.cols() - 1 << " steps, fne zero-state max " << fne_max;
  return {drift < 1e-8 && swe.cols() == 150 && fne_max == 0.0, os.str()};
}

Verdict kernels() {
  int failures = 0;
  auto expect = [&](bool ok) { failures += ok ? 0 : 1; };

  Matrix x(2, 2);
  x << 3, -0.5, 0, 2;
  Matrix shrunk(2, 2);
  shrunk << 2, 0, 0, 1;
  expect(rpca::shrink<double>(x, 1.0) == shrunk);
  expect(rpca::shrink<double>(x, 0.0) == x);
  CMatrix z(1, 1);
  z(0, 0) = Complex(3, 4);
  expect(rpca::shrink<Complex>(z, 2.5)(0, 0) == Complex(1.5, 2.0));

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 5;
  d(1, 1) = 1;
  Matrix svt_expected = Matrix::Zero(2, 2);
  svt_expected(0, 0) = 3;
  expect((rpca::svt<double>(d, 2.0) - svt_expected).norm() < 1e-14);
  std::mt19937_64 rng(11);
  const Matrix r = testing::random_matrix(6, 4, rng);
  expect((rpca::svt<double>(r, 0.0) - r).norm() < 1e-12 * r.norm());
  expect(rpca::svt<double>(r, testing::jacobi_singular_values(r)(0)).norm() == 0.0);
  const int example_failures = failures;

  std::uniform_real_distribution<double> frac(0.0, 1.2);
  for (int trial = 0; trial < 1000; ++trial) {
    const Matrix m = testing::random_matrix(2 + trial % 7, 2 + (trial / 7) % 7, rng);
    const double tau = frac(rng);
    const Matrix s = rpca::shrink<double>(m, tau);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      expect(std::abs(s.reshaped()(i)) <= std::abs(m.reshaped()(i)));
      expect(std::abs(m.reshaped()(i)) > tau || s.reshaped()(i) == 0.0);
    }
    const Vector sm = testing::jacobi_singular_values(m);
    const double svt_tau = tau * sm(0);
    int kept = -1;
    const Matrix y = rpca::svt<double>(m, svt_tau, &kept);
    const Vector sy = testing::jacobi_singular_values(y);
    expect(kept == (sm.array() > svt_tau).count());
    for (Eigen::Index i = 0; i < sm.size(); ++i) {
      expect(std::abs(sy(i) - std::max(sm(i) - svt_tau, 0.0)) < 1e-10 * sm(0));
    }
  }
  std::ostringstream os;
  os << example_failures << " example failures, " << failures - example_failures
     << " property failures over 1000 random matrices";
  return {failures == 0, os.str()};
}

Verdict planted_rpca() {
  std::mt19937_64 rng(7);
  const Matrix l0 = testing::low_rank(100, 100, 2, rng);
  const Matrix s0 = testing::sparse(100, 100, 0.05, l0.cwiseAbs().maxCoeff(), rng);
  bool ok = true;
  std::ostringstream os;
  for (int which = 0; which < 2; ++which) {
    const auto start = Clock::now();
    const auto r = which == 0 ? rpca::rpca_adm<double>(l0 + s0) : rpca::rpca_ialm<double>(l0 + s0);
    const double t = seconds_since(start);
    const double el = (r.l - l0).norm() / l0.norm();
    const double es = (r.s - s0).norm() / s0.norm();
    ok = ok && r.converged && r.iterations <= 500 && el < 1e-3 && es < 1e-3 && t < 30.0;
    os << (which == 0 ? "adm" : "ialm") << ": L err " << el << ", S err " << es << ", " << r.iterations
       << " it, converged " << r.converged << ", " << t << " s" << (which == 0 ? "; " : "");
  }
  return {ok, os.str()};
}

Verdict tls_debias() {
  const auto start = Clock::now();
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = 0.9;
  a(1, 1) = 0.5;
  const auto clean = testing::wrap(testing::recursion(a, Eigen::VectorXcd::Ones(2), 20), 1.0, false);
  Eigen::VectorXcd truth(2);
  truth << 0.9, 0.5;
  double e_dmd = 0.0, e_tls = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto pair = snapshots::split(snapshots::add_noise(clean, NoiseSpec{20.0, seed}));
    e_dmd += testing::spectrum_distance(dmd::fit(pair, 2, 1.0).lambda, truth) / 50;
    e_tls += testing::spectrum_distance(tls::fit(pair, 2, 1.0).lambda, truth) / 50;
  }
  const double t = seconds_since(start);
  std::ostringstream os;
  os << "mean eigenvalue error dmd " << e_dmd << ", tls " << e_tls << ", " << t << " s";
  return {e_tls < e_dmd && t < 10.0, os.str()};
}

Verdict snr_trend() {
  const auto start = Clock::now();
  const double budget = 300.0;
  const std::vector<double> snrs{10, 20, 30, 40};
  bool ok = true, out_of_time = false;
  std::ostringstream os;
  cache.data(Dataset::fne);
  for (auto m : {FilterMethod::none, FilterMethod::tls, FilterMethod::ialm, FilterMethod::adm}) {
    std::vector<double> means;
    for (double snr : snrs) {
      double sum = 0.0;
      int n = 0;
      for (std::uint64_t seed = 0; seed < 5 && !out_of_time; ++seed) {
        if (seconds_since(start) > budget) {
          out_of_time = true;
          break;
        }
        const auto& r = cache.get(Dataset::fne, m, snr, seed);
        if (r.error.empty()) {
          sum += r.rmse;
          ++n;
        }
      }
      if (out_of_time) break;
      means.push_back(n ? sum / n : std::nan(""));
    }
    os << to_string(m) << " [";
    for (std::size_t i = 0; i < means.size(); ++i) os << (i ? " " : "") << means[i];
    os << "]";
    bool decreasing = means.size() == snrs.size();
    for (std::size_t i = 1; i < means.size(); ++i) decreasing = decreasing && means[i] < means[i - 1];
    if (!decreasing) {
      ok = false;
      os << (means.size() == snrs.size() ? " not monotone" : " incomplete");
    }
    os << "; ";
    if (out_of_time) break;
  }
  const double t = seconds_since(start);
  if (out_of_time) os << "time budget of " << budget << " s exhausted; ";
  os << t << " s";
  return {ok && !out_of_time && t < budget, os.str()};
}

Verdict denoising_benefit() {
  bool ok = true;
  std::ostringstream os;
  for (auto m : {FilterMethod::adm, FilterMethod::ialm, FilterMethod::tls}) {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto& base = cache.get(Dataset::nlse, FilterMethod::none, 20.0, seed);
      const auto& r = cache.get(Dataset::nlse, m, 20.0, seed);
      if (r.error.empty() && base.error.empty() && r.rmse < base.rmse) ++wins;
    }
    ok = ok && wins >= 8;
    os << to_string(m) << " beats none on " << wins << "/10; ";
  }
  os << "seed 0 rmse none " << cache.get(Dataset::nlse, FilterMethod::none, 20.0, 0).rmse;
  return {ok, os.str()};
}

Verdict rank_pattern() {
  bool ok = true;
  std::ostringstream os;
  for (auto ds : {Dataset::nlse, Dataset::fne, Dataset::swe}) {
    const int adm = cache.get(ds, FilterMethod::adm, 20.0, 0).filtered_rank;
    const int ialm = cache.get(ds, FilterMethod::ialm, 20.0, 0).filtered_rank;
    const int tls = cache.get(ds, FilterMethod::tls, 20.0, 0).filtered_rank;
    ok = ok && ialm < adm && ialm < tls;
    os << to_string(ds) << " adm " << adm << " ialm " << ialm << " tls " << tls << "; ";
  }
  return {ok, os.str()};
}

Verdict determinism() {
  auto run = [](const std::string& name) {
    ExperimentConfig cfg;
    cfg.nlse.n_w = 64;
    cfg.nlse.n_t = 40;
    cfg.snr_db = {10, 30};
    cfg.seeds = {0, 1};
    cfg.output_dir = testing::scratch_dir(name);
    experiment::run_sweep(cfg);
    std::string all = testing::slurp(cfg.output_dir / "metrics.csv") + testing::slurp(cfg.output_dir / "summary.csv");
    for (const auto& e : std::filesystem::directory_iterator(cfg.output_dir / "error_series")) {
      all += e.path().filename().string() + testing::slurp(e.path());
    }
    return all;
  };
  const auto a = run("accept_det_a");
  const auto b = run("accept_det_b");
  std::ostringstream os;
  os << a.size() << " bytes compared";
  return {!a.empty() && a == b, os.str()};
}

Verdict literal_cc() {
  std::mt19937_64 rng(99);
  int failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const CMatrix x = testing::random_cmatrix(3 + trial % 9, 2 + trial % 5, rng);
    failures += metrics::cc_paper(x, x).value == 0.0 ? 0 : 1;
    failures += metrics::cc_paper(CMatrix::Constant(x.rows(), x.cols(), Complex(0.7, -1.0)), x).value == 1.0 ? 0 : 1;
  }
  return {failures == 0, std::to_string(failures) + " failures over 100 random matrices"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"dmd spectrum oracle", dmd_spectrum},
      {"nlse analytic soliton", nlse_soliton},
      {"conservation suite", conservation},
      {"shrink/svt kernels", kernels},
      {"rpca planted recovery", planted_rpca},
      {"tls debiasing", tls_debias},
      {"fne snr trend", snr_trend},
      {"nlse denoising benefit", denoising_benefit},
      {"filtered rank pattern", rank_pattern},
      {"pipeline determinism", determinism},
      {"literal cc behavior", literal_cc},
  };
  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    passed += v.pass ? 1 : 0;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
