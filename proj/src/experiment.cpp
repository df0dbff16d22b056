#include "noisydmd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "noisydmd/errors.hpp"

namespace noisydmd {

std::string to_string(Dataset d) {
  switch (d) {
    case Dataset::nlse: return "nlse";
    case Dataset::fne: return "fne";
    case Dataset::swe: return "swe";
  }
  return "nlse";
}

Dataset dataset_from_string(const std::string& name) {
  if (name == "nlse") return Dataset::nlse;
  if (name == "fne") return Dataset::fne;
  if (name == "swe") return Dataset::swe;
  throw ConfigError("unknown dataset '" + name + "' (expected nlse, fne or swe)");
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("at least one method is required");
  std::set<FilterMethod> seen_methods(methods.begin(), methods.end());
  if (seen_methods.size() != methods.size()) throw ConfigError("methods must be distinct");
  if (!clean) {
    if (snr_db.empty()) throw ConfigError("snr list is empty");
    for (std::size_t i = 0; i < snr_db.size(); ++i) {
      if (std::isnan(snr_db[i])) throw ConfigError("snr values must not be NaN");
      if (i > 0 && !(snr_db[i] > snr_db[i - 1])) throw ConfigError("snr list must be strictly increasing");
    }
  }
  if (seeds.empty()) throw ConfigError("seed list is empty");
  std::set<std::uint64_t> seen_seeds(seeds.begin(), seeds.end());
  if (seen_seeds.size() != seeds.size()) throw ConfigError("seeds must be distinct");
  if (rank < 0) throw ConfigError("rank must be positive or 0 (auto)");
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) throw ConfigError("rank_tol must be in (0, 1)");
  if (!(forecast >= 0.0)) throw ConfigError("forecast must be nonnegative");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  adm.validate();
  ialm.validate();
  switch (dataset) {
    case Dataset::nlse: nlse.validate(); break;
    case Dataset::fne: fne.validate(); break;
    case Dataset::swe: swe.validate(); break;
  }
}

std::vector<double> ExperimentConfig::effective_snr() const {
  if (clean) return {std::numeric_limits<double>::infinity()};
  return snr_db;
}

// ---------------------------------------------------------------------------
// JSON config

namespace {

using nlohmann::json;

template <typename T>
void read_opt(const json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

template <typename T>
void read_opt(const json& doc, const char* key, std::optional<T>& out) {
  if (!doc.contains(key)) return;
  const auto& v = doc.at(key);
  if (v.is_null() || (v.is_string() && v.get<std::string>() == "auto")) {
    out.reset();
  } else {
    out = v.get<T>();
  }
}

json opt_to_json(const std::optional<double>& v) { return v ? json(*v) : json("auto"); }

double json_number(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("expected a number, got '" + s + "'");
  }
  return v.get<double>();
}

json number_to_json(double v) { return std::isinf(v) ? json("inf") : json(v); }

}  // namespace

ExperimentConfig config_from_json(const json& doc, ExperimentConfig cfg) {
  try {
    if (doc.contains("dataset")) cfg.dataset = dataset_from_string(doc.at("dataset").get<std::string>());
    if (doc.contains("snr_db")) {
      const auto& v = doc.at("snr_db");
      cfg.snr_db.clear();
      if (v.is_array()) {
        for (const auto& e : v) cfg.snr_db.push_back(json_number(e));
      } else {
        cfg.snr_db.push_back(json_number(v));
      }
    }
    read_opt(doc, "clean", cfg.clean);
    read_opt(doc, "seeds", cfg.seeds);
    if (doc.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : doc.at("methods")) cfg.methods.push_back(filter_method_from_string(m.get<std::string>()));
    }
    if (doc.contains("rank")) {
      const auto& v = doc.at("rank");
      cfg.rank = v.is_string() && v.get<std::string>() == "auto" ? 0 : v.get<int>();
    }
    read_opt(doc, "rank_tol", cfg.rank_tol);
    read_opt(doc, "filter_splits", cfg.filter_splits);
    read_opt(doc, "forecast", cfg.forecast);
    if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
    read_opt(doc, "threads", cfg.threads);
    read_opt(doc, "write_error_series", cfg.write_error_series);

    if (doc.contains("nlse")) {
      const auto& n = doc.at("nlse");
      read_opt(n, "w_min", cfg.nlse.w_min);
      read_opt(n, "w_max", cfg.nlse.w_max);
      read_opt(n, "n_w", cfg.nlse.n_w);
      read_opt(n, "t_max", cfg.nlse.t_max);
      read_opt(n, "n_t", cfg.nlse.n_t);
      read_opt(n, "amplitude", cfg.nlse.amplitude);
      read_opt(n, "max_step", cfg.nlse.max_step);
    }
    if (doc.contains("fne")) {
      const auto& f = doc.at("fne");
      read_opt(f, "x_min", cfg.fne.x_min);
      read_opt(f, "x_max", cfg.fne.x_max);
      read_opt(f, "n_x", cfg.fne.n_x);
      read_opt(f, "t_max", cfg.fne.t_max);
      read_opt(f, "n_t", cfg.fne.n_t);
      read_opt(f, "d_coeff", cfg.fne.d_coeff);
      read_opt(f, "a_param", cfg.fne.a_param);
      read_opt(f, "b_param", cfg.fne.b_param);
      read_opt(f, "c_param", cfg.fne.c_param);
      read_opt(f, "stack_w", cfg.fne.stack_w);
      read_opt(f, "max_step", cfg.fne.max_step);
    }
    if (doc.contains("swe")) {
      const auto& s = doc.at("swe");
      read_opt(s, "nx", cfg.swe.nx);
      read_opt(s, "ny", cfg.swe.ny);
      read_opt(s, "lx", cfg.swe.lx);
      read_opt(s, "ly", cfg.swe.ly);
      read_opt(s, "g", cfg.swe.g);
      read_opt(s, "rho", cfg.swe.rho);
      read_opt(s, "kappa0", cfg.swe.kappa0);
      read_opt(s, "t_max", cfg.swe.t_max);
      read_opt(s, "n_t", cfg.swe.n_t);
      read_opt(s, "cfl", cfg.swe.cfl);
      read_opt(s, "max_step", cfg.swe.max_step);
      read_opt(s, "max_substeps", cfg.swe.max_substeps);
      if (s.contains("initial_drop")) {
        const auto& d = s.at("initial_drop");
        read_opt(d, "center_x", cfg.swe.initial_drop.center_x);
        read_opt(d, "center_y", cfg.swe.initial_drop.center_y);
        read_opt(d, "width", cfg.swe.initial_drop.width);
        read_opt(d, "amplitude", cfg.swe.initial_drop.amplitude);
      }
    }
    if (doc.contains("adm")) {
      const auto& a = doc.at("adm");
      read_opt(a, "mu", cfg.adm.mu);
      read_opt(a, "lambda_coef", cfg.adm.lambda_coef);
      read_opt(a, "tol", cfg.adm.tol);
      read_opt(a, "max_iter", cfg.adm.max_iter);
    }
    if (doc.contains("ialm")) {
      const auto& a = doc.at("ialm");
      read_opt(a, "mu0", cfg.ialm.mu0);
      read_opt(a, "rho", cfg.ialm.rho);
      read_opt(a, "mu_cap", cfg.ialm.mu_cap);
      read_opt(a, "lambda_coef", cfg.ialm.lambda_coef);
      read_opt(a, "tol", cfg.ialm.tol);
      read_opt(a, "max_iter", cfg.ialm.max_iter);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json doc;
  doc["dataset"] = to_string(cfg.dataset);
  json snr = json::array();
  for (double s : cfg.effective_snr()) snr.push_back(number_to_json(s));
  doc["snr_db"] = snr;
  doc["clean"] = cfg.clean;
  doc["seeds"] = cfg.seeds;
  json methods = json::array();
  for (auto m : cfg.methods) methods.push_back(to_string(m));
  doc["methods"] = methods;
  doc["rank"] = cfg.rank == 0 ? json("auto") : json(cfg.rank);
  doc["rank_rule"] = {{"kind", "cumulative_energy"}, {"fraction", dmd::kEnergyFraction}};
  doc["singular_cutoff"] = dmd::kSingularCutoff;
  doc["rank_tol"] = cfg.rank_tol;
  doc["filter_splits"] = cfg.filter_splits;
  doc["forecast"] = cfg.forecast;
  doc["threads"] = cfg.threads;
  doc["noise"] = {{"kind", "white_gaussian"}, {"snr_units", "dB, measured Frobenius power"},
                  {"rng", "mt19937_64 + std::normal_distribution"}};
  doc["metrics_truth"] = "clean";

  switch (cfg.dataset) {
    case Dataset::nlse: {
      const auto& n = cfg.nlse;
      doc["nlse"] = {{"w_min", n.w_min}, {"w_max", n.w_max}, {"n_w", n.n_w}, {"t_max", n.t_max},
                     {"n_t", n.n_t}, {"amplitude", n.amplitude}, {"max_step", n.max_step},
                     {"initial_profile", n.initial_profile == pde::NlseProfile::custom ? "custom" : "soliton_sech"},
                     {"integrator", "strang split-step fourier"}};
      break;
    }
    case Dataset::fne: {
      const auto& f = cfg.fne;
      doc["fne"] = {{"x_min", f.x_min}, {"x_max", f.x_max}, {"n_x", f.n_x}, {"t_max", f.t_max},
                    {"n_t", f.n_t}, {"d_coeff", f.d_coeff}, {"a_param", f.a_param},
                    {"b_param", f.b_param}, {"c_param", f.c_param}, {"stack_w", f.stack_w},
                    {"max_step", f.max_step}, {"integrator", "rk4 + central differences"}};
      break;
    }
    case Dataset::swe: {
      const auto& s = cfg.swe;
      doc["swe"] = {{"nx", s.nx}, {"ny", s.ny}, {"lx", s.lx}, {"ly", s.ly}, {"g", s.g},
                    {"rho", s.rho}, {"kappa0", s.kappa0}, {"t_max", s.t_max}, {"n_t", s.n_t},
                    {"cfl", s.cfl}, {"max_step", s.max_step}, {"max_substeps", s.max_substeps},
                    {"initial_drop", {{"center_x", s.initial_drop.center_x},
                                      {"center_y", s.initial_drop.center_y},
                                      {"width", s.initial_drop.width},
                                      {"amplitude", s.initial_drop.amplitude}}},
                    {"integrator", "two-step lax-wendroff, reflective walls"}};
      break;
    }
  }
  doc["adm"] = {{"mu", opt_to_json(cfg.adm.mu)}, {"mu_auto_rule", "n*m/(4*||D||_1)"},
                {"lambda_coef", cfg.adm.lambda_coef}, {"tol", cfg.adm.tol}, {"max_iter", cfg.adm.max_iter}};
  doc["ialm"] = {{"mu0", opt_to_json(cfg.ialm.mu0)}, {"mu0_auto_rule", "1.25/sigma_1(D)"},
                 {"rho", cfg.ialm.rho}, {"mu_cap", opt_to_json(cfg.ialm.mu_cap)},
                 {"mu_cap_auto_rule", "1e7*mu0"}, {"lambda_coef", cfg.ialm.lambda_coef},
                 {"tol", cfg.ialm.tol}, {"max_iter", cfg.ialm.max_iter}};
  return doc;
}

// ---------------------------------------------------------------------------
// Running

namespace experiment {
namespace {

std::string snr_label(double snr) {
  if (std::isinf(snr)) return "inf";
  std::ostringstream os;
  os << snr;
  return os.str();
}

std::string cell_name(const ExperimentConfig& cfg, FilterMethod m, double snr, std::uint64_t seed) {
  return to_string(cfg.dataset) + "_" + to_string(m) + "_snr" + snr_label(snr) + "_seed" + std::to_string(seed);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

template <typename Scalar>
MatrixOf<Scalar> rpca_low_rank(const MatrixOf<Scalar>& d, FilterMethod method, const ExperimentConfig& cfg,
                               MethodOutcome& outcome) {
  RpcaResult<Scalar> r = method == FilterMethod::adm ? rpca::rpca_adm<Scalar>(d, cfg.adm)
                                                     : rpca::rpca_ialm<Scalar>(d, cfg.ialm);
  outcome.rpca_iterations += r.iterations;
  outcome.rpca_converged = outcome.rpca_converged && r.converged;
  return std::move(r.l);
}

CMatrix rpca_filter(const CMatrix& d, bool is_complex, FilterMethod method, const ExperimentConfig& cfg,
                    MethodOutcome& outcome) {
  if (is_complex) return rpca_low_rank<Complex>(d, method, cfg, outcome);
  const Matrix real = d.real();
  return rpca_low_rank<double>(real, method, cfg, outcome).cast<Complex>();
}

// [A | last column of B]: a full-length view of projected or separately
// filtered shift pairs.
CMatrix join_pair(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows(), a.cols() + 1);
  out << a, b.col(b.cols() - 1);
  return out;
}

}  // namespace

SnapshotMatrix generate(const ExperimentConfig& cfg) {
  switch (cfg.dataset) {
    case Dataset::nlse: return pde::solve_nlse(cfg.nlse);
    case Dataset::fne: return pde::solve_fne(cfg.fne);
    case Dataset::swe: return pde::solve_swe(cfg.swe);
  }
  throw ConfigError("unknown dataset");
}

MethodOutcome apply_method(const SnapshotMatrix& noisy, FilterMethod method, const ExperimentConfig& cfg) {
  MethodOutcome out;
  out.report.method = method;
  switch (method) {
    case FilterMethod::none: {
      out.model = dmd::fit(snapshots::split(noisy), cfg.rank, noisy.dt);
      out.report.filtered = noisy.values;
      out.report.numerical_rank = metrics::numerical_rank(noisy.values, cfg.rank_tol);
      break;
    }
    case FilterMethod::adm:
    case FilterMethod::ialm: {
      SplitPair pair;
      if (cfg.filter_splits) {
        pair = snapshots::split(noisy);
        pair.x1.values = rpca_filter(pair.x1.values, noisy.is_complex, method, cfg, out);
        pair.x2.values = rpca_filter(pair.x2.values, noisy.is_complex, method, cfg, out);
        out.report.filtered = join_pair(pair.x1.values, pair.x2.values);
        out.report.numerical_rank = metrics::numerical_rank(pair.x1.values, cfg.rank_tol);
      } else {
        SnapshotMatrix filtered = noisy;
        filtered.values = rpca_filter(noisy.values, noisy.is_complex, method, cfg, out);
        out.report.numerical_rank = metrics::numerical_rank(filtered.values, cfg.rank_tol);
        pair = snapshots::split(filtered);
        out.report.filtered = std::move(filtered.values);
      }
      out.model = dmd::fit(pair, cfg.rank, noisy.dt);
      break;
    }
    case FilterMethod::tls: {
      TlsProjected projected;
      out.model = tls::fit(snapshots::split(noisy), cfg.rank, noisy.dt, &projected);
      out.report.filtered = join_pair(projected.x1, projected.x2);
      out.report.numerical_rank = metrics::numerical_rank(projected.x1, cfg.rank_tol);
      break;
    }
  }
  return out;
}

CellResult run_cell(const SnapshotMatrix& clean, FilterMethod method, double snr_db, std::uint64_t seed,
                    const ExperimentConfig& cfg) {
  CellResult cell;
  auto& rec = cell.record;
  rec.dataset = to_string(cfg.dataset);
  rec.method = method;
  rec.snr_db = snr_db;
  rec.seed = seed;
  rec.rmse = rec.cc_paper = rec.cc_pearson = std::numeric_limits<double>::quiet_NaN();
  try {
    const SnapshotMatrix noisy = snapshots::add_noise(clean, NoiseSpec{snr_db, seed});
    const MethodOutcome outcome = apply_method(noisy, method, cfg);
    rec.rank_used = outcome.model.rank;
    rec.filtered_rank = outcome.report.numerical_rank;

    cell.times = clean.times();
    CMatrix pred = dmd::reconstruct(outcome.model, cell.times);
    if (!clean.is_complex) pred = pred.real().cast<Complex>();

    rec.rmse = metrics::rmse(pred, clean.values);
    try {
      rec.cc_paper = metrics::cc_paper(pred, clean.values).value;
    } catch (const DegenerateError&) {
    }
    try {
      rec.cc_pearson = metrics::cc_pearson(pred, clean.values);
    } catch (const DegenerateError&) {
    }
    cell.epsilon = dmd::relative_error_series(pred, clean.values);

    if (cfg.forecast > 0.0) {
      const auto steps = std::max<Eigen::Index>(3, static_cast<Eigen::Index>(std::ceil(cfg.forecast / clean.dt)));
      SnapshotMatrix ahead = clean;
      ahead.t0 = clean.time(clean.cols());
      std::vector<double> t(static_cast<std::size_t>(steps));
      for (Eigen::Index k = 0; k < steps; ++k) t[static_cast<std::size_t>(k)] = ahead.time(k);
      ahead.values = dmd::reconstruct(outcome.model, t);
      if (!clean.is_complex) ahead.values = ahead.values.real().cast<Complex>();
      cell.forecast = std::move(ahead);
    }
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return cell;
}

std::vector<MetricsRecord> run_pipeline(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_pipeline(cfg, generate(cfg));
}

std::vector<MetricsRecord> run_pipeline(const ExperimentConfig& cfg, const SnapshotMatrix& clean) {
  cfg.validate();
  clean.validate();

  struct Task {
    FilterMethod method;
    double snr;
    std::uint64_t seed;
  };
  std::vector<FilterMethod> methods = cfg.methods;
  std::sort(methods.begin(), methods.end());
  std::vector<std::uint64_t> seeds = cfg.seeds;
  std::sort(seeds.begin(), seeds.end());
  std::vector<Task> tasks;
  for (auto m : methods) {
    for (double snr : cfg.effective_snr()) {
      for (auto seed : seeds) tasks.push_back({m, snr, seed});
    }
  }

  std::filesystem::create_directories(cfg.output_dir);
  const auto series_dir = cfg.output_dir / "error_series";
  if (cfg.write_error_series) std::filesystem::create_directories(series_dir);

  std::vector<MetricsRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex io_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const auto& t = tasks[i];
      CellResult cell = run_cell(clean, t.method, t.snr, t.seed, cfg);
      if (cfg.write_error_series && cell.record.error.empty()) {
        const std::string name = cell_name(cfg, t.method, t.snr, t.seed) + ".csv";
        cell.record.error_series_path = "error_series/" + name;
        std::lock_guard lock(io_mutex);
        write_error_series(series_dir / name, cell.times, cell.epsilon);
      }
      if (cell.forecast) {
        const auto dir = cfg.output_dir / "forecast";
        std::lock_guard lock(io_mutex);
        std::filesystem::create_directories(dir);
        snapshots::save(*cell.forecast, dir / (cell_name(cfg, t.method, t.snr, t.seed) + ".dmds"));
      }
      records[i] = std::move(cell.record);
    }
  };
  const int nthreads = std::min<int>(cfg.threads, static_cast<int>(tasks.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  }

  write_metrics_csv(cfg.output_dir / "metrics.csv", records);
  write_manifest(cfg.output_dir / "manifest.json", cfg);
  return records;
}

std::vector<SweepSummary> summarize(const std::vector<MetricsRecord>& records) {
  std::map<std::pair<FilterMethod, double>, std::vector<const MetricsRecord*>> groups;
  for (const auto& r : records) groups[{r.method, r.snr_db}].push_back(&r);

  auto mean_of = [](const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };

  std::vector<SweepSummary> out;
  for (const auto& [key, rows] : groups) {
    SweepSummary s;
    s.dataset = rows.front()->dataset;
    s.method = key.first;
    s.snr_db = key.second;
    s.n_seeds = static_cast<int>(rows.size());
    std::vector<double> rmse, ccp, ccr, frank, rank;
    for (const auto* r : rows) {
      if (!r->error.empty()) {
        ++s.n_failed;
        continue;
      }
      if (!std::isnan(r->rmse)) rmse.push_back(r->rmse);
      if (!std::isnan(r->cc_paper)) ccp.push_back(r->cc_paper);
      if (!std::isnan(r->cc_pearson)) ccr.push_back(r->cc_pearson);
      frank.push_back(r->filtered_rank);
      rank.push_back(r->rank_used);
    }
    s.mean_rmse = mean_of(rmse);
    s.mean_cc_paper = mean_of(ccp);
    s.mean_cc_pearson = mean_of(ccr);
    s.mean_filtered_rank = mean_of(frank);
    s.mean_rank_used = mean_of(rank);
    out.push_back(s);
  }
  return out;
}

std::vector<SweepSummary> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_sweep(cfg, generate(cfg));
}

std::vector<SweepSummary> run_sweep(const ExperimentConfig& cfg, const SnapshotMatrix& clean) {
  const auto records = run_pipeline(cfg, clean);
  auto summary = summarize(records);
  write_summary_csv(cfg.output_dir / "summary.csv", summary);
  return summary;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << metrics::kCsvHeader << '\n';
  for (const auto& r : records) metrics::write_csv_row(os, r);
  if (!os) throw IoError("write failed for " + path.string());
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<SweepSummary>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << kSummaryHeader << '\n';
  for (const auto& s : rows) {
    os << s.dataset << ',' << to_string(s.method) << ',' << fmt(s.snr_db) << ',' << s.n_seeds << ','
       << s.n_failed << ',' << fmt(s.mean_rmse) << ',' << fmt(s.mean_cc_paper) << ',' << fmt(s.mean_cc_pearson)
       << ',' << fmt(s.mean_filtered_rank) << ',' << fmt(s.mean_rank_used) << '\n';
  }
  if (!os) throw IoError("write failed for " + path.string());
}

void write_error_series(const std::filesystem::path& path, const std::vector<double>& times, const Vector& eps) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "t,epsilon\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    os << fmt(times[k]) << ',' << fmt(eps(static_cast<Eigen::Index>(k))) << '\n';
  }
  if (!os) throw IoError("write failed for " + path.string());
}

void write_manifest(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << to_json(cfg).dump(2) << '\n';
}

}  // namespace experiment
}  // namespace noisydmd
