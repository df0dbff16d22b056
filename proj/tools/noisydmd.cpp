// noisydmd command-line driver.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "noisydmd/errors.hpp"
#include "noisydmd/experiment.hpp"
#include "noisydmd/plot.hpp"

namespace fs = std::filesystem;
using namespace noisydmd;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kNumerical = 3, kIo = 4 };

struct Globals {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  bool quiet = false;
};

struct Log {
  const bool* quiet;
  template <typename... Args>
  void operator()(const Args&... args) const {
    if (*quiet) return;
    (std::cout << ... << args) << '\n';
  }
};

std::uint64_t default_seed() {
  const char* env = std::getenv("NOISYDMD_SEED");
  if (!env || !*env) return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::logic_error&) {
    throw ConfigError(std::string("NOISYDMD_SEED is not a nonnegative integer: '") + env + "'");
  }
}

double parse_snr(const std::string& s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("bad SNR value '" + s + "'");
}

int parse_rank(const std::string& s) {
  if (s == "auto") return 0;
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size() && v > 0) return v;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("rank must be 'auto' or a positive integer, got '" + s + "'");
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ExperimentConfig base_config(const Globals& g) {
  ExperimentConfig cfg;
  const auto seed0 = default_seed();
  std::iota(cfg.seeds.begin(), cfg.seeds.end(), seed0);
  if (!g.config_path.empty()) cfg = config_from_json(read_json(g.config_path), cfg);
  if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
  if (g.threads > 0) cfg.threads = g.threads;
  return cfg;
}

fs::path in_out_dir(const ExperimentConfig& cfg, const std::string& path, const std::string& fallback) {
  if (!path.empty()) return path;
  fs::create_directories(cfg.output_dir);
  return cfg.output_dir / fallback;
}

// Options shared by pipeline and sweep.
struct RunOptions {
  std::string dataset;
  std::vector<std::string> snr;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> methods;
  std::string rank;
  bool clean = false;
  std::string input;
  double forecast = 0.0;
  bool filter_splits = false;
  bool no_error_series = false;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("dataset", o.dataset, "nlse, fne or swe (default from config, else nlse)");
  cmd->add_option("--snr-db", o.snr, "SNR values in dB, strictly increasing")->delimiter(',');
  cmd->add_option("--seeds", o.seeds, "noise seeds")->delimiter(',');
  cmd->add_option("--methods", o.methods, "subset of none, adm, ialm, tls")->delimiter(',');
  cmd->add_option("--rank", o.rank, "DMD rank: auto or N");
  cmd->add_flag("--clean", o.clean, "skip corruption");
  cmd->add_option("--input", o.input, "use this clean dataset file instead of generating one");
  cmd->add_option("--forecast", o.forecast, "also reconstruct this far past the last snapshot");
  cmd->add_flag("--filter-splits", o.filter_splits, "filter X1 and X2 separately");
  cmd->add_flag("--no-error-series", o.no_error_series, "skip the per-cell error CSVs");
}

ExperimentConfig run_config(const Globals& g, const RunOptions& o, const CLI::App* cmd) {
  ExperimentConfig cfg = base_config(g);
  if (!o.dataset.empty()) cfg.dataset = dataset_from_string(o.dataset);
  if (cmd->count("--snr-db")) {
    cfg.snr_db.clear();
    for (const auto& s : o.snr) cfg.snr_db.push_back(parse_snr(s));
  }
  if (cmd->count("--seeds")) cfg.seeds = o.seeds;
  if (cmd->count("--methods")) {
    cfg.methods.clear();
    for (const auto& m : o.methods) cfg.methods.push_back(filter_method_from_string(m));
  }
  if (!o.rank.empty()) cfg.rank = parse_rank(o.rank);
  if (o.clean) cfg.clean = true;
  if (cmd->count("--forecast")) cfg.forecast = o.forecast;
  if (o.filter_splits) cfg.filter_splits = true;
  if (o.no_error_series) cfg.write_error_series = false;
  cfg.validate();
  return cfg;
}

SnapshotMatrix clean_data(const ExperimentConfig& cfg, const RunOptions& o) {
  return o.input.empty() ? experiment::generate(cfg) : snapshots::load(o.input);
}

int run(int argc, char** argv) {
  CLI::App app{"Noise-robust dynamic mode decomposition experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--out-dir", g.out_dir, "output directory");
  app.add_option("--threads", g.threads, "worker threads for pipeline and sweep")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "suppress informational output");
  const Log log{&g.quiet};

  // generate
  auto* gen = app.add_subcommand("generate", "simulate a dataset and write it as a .dmds file");
  std::string gen_dataset, gen_out;
  std::optional<int> gen_nw, gen_nt, gen_nx, gen_ny;
  std::optional<double> gen_tmax;
  gen->add_option("dataset", gen_dataset, "nlse, fne or swe")->required();
  gen->add_option("--out", gen_out, "output file (default <out-dir>/<dataset>.dmds)");
  gen->add_option("--nw", gen_nw, "NLSE grid points");
  gen->add_option("--nx", gen_nx, "FNE / SWE grid points along x");
  gen->add_option("--ny", gen_ny, "SWE grid points along y");
  gen->add_option("--nt", gen_nt, "number of snapshots");
  gen->add_option("--tmax", gen_tmax, "final time");
  gen->callback([&] {
    ExperimentConfig cfg = base_config(g);
    cfg.dataset = dataset_from_string(gen_dataset);
    switch (cfg.dataset) {
      case Dataset::nlse:
        if (gen_nw) cfg.nlse.n_w = *gen_nw;
        if (gen_nt) cfg.nlse.n_t = *gen_nt;
        if (gen_tmax) cfg.nlse.t_max = *gen_tmax;
        break;
      case Dataset::fne:
        if (gen_nx) cfg.fne.n_x = *gen_nx;
        if (gen_nt) cfg.fne.n_t = *gen_nt;
        if (gen_tmax) cfg.fne.t_max = *gen_tmax;
        break;
      case Dataset::swe:
        if (gen_nx) cfg.swe.nx = *gen_nx;
        if (gen_ny) cfg.swe.ny = *gen_ny;
        if (gen_nt) cfg.swe.n_t = *gen_nt;
        if (gen_tmax) cfg.swe.t_max = *gen_tmax;
        break;
    }
    const SnapshotMatrix x = experiment::generate(cfg);
    const auto out = in_out_dir(cfg, gen_out, gen_dataset + ".dmds");
    snapshots::save(x, out);
    log("Q=", x.rows(), " P=", x.cols(), " dt=", x.dt);
    log("wrote ", out.string());
  });

  // corrupt
  auto* cor = app.add_subcommand("corrupt", "add white Gaussian noise at a given SNR");
  std::string cor_in, cor_out, cor_snr;
  std::optional<std::uint64_t> cor_seed;
  cor->add_option("--in", cor_in, "clean .dmds file")->required();
  cor->add_option("--out", cor_out, "output file (default <out-dir>/noisy.dmds)");
  cor->add_option("--snr-db", cor_snr, "SNR in dB")->required();
  cor->add_option("--seed", cor_seed, "noise seed (default $NOISYDMD_SEED, else 0)");
  cor->callback([&] {
    const ExperimentConfig cfg = base_config(g);
    const SnapshotMatrix clean = snapshots::load(cor_in);
    const NoiseSpec spec{parse_snr(cor_snr), cor_seed.value_or(default_seed())};
    const SnapshotMatrix noisy = snapshots::add_noise(clean, spec);
    const auto out = in_out_dir(cfg, cor_out, "noisy.dmds");
    snapshots::save(noisy, out);
    log("seed=", spec.seed, " empirical_snr_db=", snapshots::empirical_snr_db(clean.values, noisy.values));
    log("wrote ", out.string());
  });

  // filter
  auto* fil = app.add_subcommand("filter", "remove noise with RPCA (adm, ialm) or the TLS projection");
  std::string fil_in, fil_out, fil_method, fil_trace, fil_rank = "auto";
  fil->add_option("--in", fil_in, "noisy .dmds file")->required();
  fil->add_option("--out", fil_out, "output file (default <out-dir>/filtered.dmds)");
  fil->add_option("--method", fil_method, "adm, ialm or tls")->required();
  fil->add_option("--trace", fil_trace, "write the RPCA iteration trace CSV here");
  fil->add_option("--rank", fil_rank, "TLS projection rank: auto or N");
  fil->callback([&] {
    ExperimentConfig cfg = base_config(g);
    const FilterMethod method = filter_method_from_string(fil_method);
    if (method == FilterMethod::none) throw ConfigError("filter: method must be adm, ialm or tls");
    SnapshotMatrix x = snapshots::load(fil_in);
    if (!fil_trace.empty()) cfg.adm.trace_path = cfg.ialm.trace_path = fs::path(fil_trace);
    if (method == FilterMethod::tls) {
      const TlsProjected p = tls::project(snapshots::split(x), parse_rank(fil_rank));
      CMatrix joined(x.rows(), x.cols());
      joined << p.x1, p.x2.col(p.x2.cols() - 1);
      x.values = std::move(joined);
      log("method=tls r=", p.proj.r, " filtered_rank=", metrics::numerical_rank(p.x1, cfg.rank_tol));
    } else {
      auto report = [&](const auto& r) {
        log("method=", fil_method, " iterations=", r.iterations, " converged=", r.converged ? "true" : "false",
            " residual=", r.residual);
      };
      if (x.is_complex) {
        auto r = method == FilterMethod::adm ? rpca::rpca_adm<Complex>(x.values, cfg.adm)
                                             : rpca::rpca_ialm<Complex>(x.values, cfg.ialm);
        report(r);
        x.values = std::move(r.l);
      } else {
        const Matrix d = x.values.real();
        auto r = method == FilterMethod::adm ? rpca::rpca_adm<double>(d, cfg.adm)
                                             : rpca::rpca_ialm<double>(d, cfg.ialm);
        report(r);
        x.values = r.l.cast<Complex>();
      }
      log("filtered_rank=", metrics::numerical_rank(x.values, cfg.rank_tol));
    }
    const auto out = in_out_dir(cfg, fil_out, "filtered.dmds");
    snapshots::save(x, out);
    log("wrote ", out.string());
  });

  // fit
  auto* fit = app.add_subcommand("fit", "fit a DMD model and write it as JSON");
  std::string fit_in, fit_out, fit_rank = "auto";
  bool fit_tls = false;
  fit->add_option("--in", fit_in, ".dmds file")->required();
  fit->add_option("--out", fit_out, "model file (default <out-dir>/model.json)");
  fit->add_option("--rank", fit_rank, "auto or N");
  fit->add_flag("--tls", fit_tls, "use TLS-DMD");
  fit->callback([&] {
    const ExperimentConfig cfg = base_config(g);
    const SnapshotMatrix x = snapshots::load(fit_in);
    const SplitPair pair = snapshots::split(x);
    const int r = parse_rank(fit_rank);
    const DmdModel model = fit_tls ? tls::fit(pair, r, x.dt) : dmd::fit(pair, r, x.dt);
    const auto out = in_out_dir(cfg, fit_out, "model.json");
    std::ofstream os(out);
    if (!os) throw IoError("cannot open " + out.string() + " for writing");
    os << dmd::to_json(model).dump(2) << '\n';
    log("rank=", model.rank, " eigvec_condition=", model.eigvec_condition);
    log("wrote ", out.string());
  });

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score a fitted model against a clean dataset");
  std::string ev_model, ev_truth, ev_out, ev_series, ev_method = "none", ev_dataset;
  double ev_snr = std::numeric_limits<double>::infinity();
  std::optional<std::uint64_t> ev_seed;
  ev->add_option("--model", ev_model, "model JSON from fit")->required();
  ev->add_option("--truth", ev_truth, "clean .dmds file")->required();
  ev->add_option("--out", ev_out, "metrics CSV (default <out-dir>/evaluate.csv)");
  ev->add_option("--error-series", ev_series, "write the t,epsilon CSV here");
  ev->add_option("--method", ev_method, "method label for the CSV row");
  ev->add_option("--dataset", ev_dataset, "dataset label (default: truth file stem)");
  ev->add_option("--snr-db", ev_snr, "SNR label for the CSV row");
  ev->add_option("--seed", ev_seed, "seed label for the CSV row");
  ev->callback([&] {
    const ExperimentConfig cfg = base_config(g);
    const SnapshotMatrix truth = snapshots::load(ev_truth);
    const DmdModel model = dmd::model_from_json(read_json(ev_model));
    const auto times = truth.times();
    CMatrix pred = dmd::reconstruct(model, times);
    if (!truth.is_complex) pred = pred.real().cast<Complex>();
    if (pred.rows() != truth.rows()) throw ShapeError("model and truth have different grid sizes");

    MetricsRecord rec;
    rec.dataset = ev_dataset.empty() ? fs::path(ev_truth).stem().string() : ev_dataset;
    rec.method = filter_method_from_string(ev_method);
    rec.snr_db = ev_snr;
    rec.seed = ev_seed.value_or(default_seed());
    rec.rank_used = model.rank;
    rec.filtered_rank = metrics::numerical_rank(pred, cfg.rank_tol);
    rec.rmse = metrics::rmse(pred, truth.values);
    const auto cc = metrics::cc_paper(pred, truth.values);
    rec.cc_paper = cc.value;
    rec.cc_pearson = metrics::cc_pearson(pred, truth.values);
    if (!ev_series.empty()) {
      experiment::write_error_series(ev_series, times, dmd::relative_error_series(pred, truth.values));
      rec.error_series_path = ev_series;
    }
    const auto out = in_out_dir(cfg, ev_out, "evaluate.csv");
    experiment::write_metrics_csv(out, {rec});
    log(std::setprecision(10), "rmse=", rec.rmse, " cc_paper=", rec.cc_paper, " cc_pearson=", rec.cc_pearson,
        cc.negative_radicand ? " (cc_paper radicand negative)" : "");
    log("wrote ", out.string());
  });

  // pipeline / sweep
  auto* pipe = app.add_subcommand("pipeline", "corrupt, filter, fit and score every (method, snr, seed) cell");
  RunOptions pipe_opts;
  add_run_options(pipe, pipe_opts);
  pipe->callback([&] {
    const ExperimentConfig cfg = run_config(g, pipe_opts, pipe);
    const auto records = experiment::run_pipeline(cfg, clean_data(cfg, pipe_opts));
    int failed = 0;
    for (const auto& r : records) failed += r.error.empty() ? 0 : 1;
    log(records.size(), " cells, ", failed, " failed");
    log("wrote ", (cfg.output_dir / "metrics.csv").string());
  });

  auto* sweep = app.add_subcommand("sweep", "pipeline plus per-(method, snr) means over seeds");
  RunOptions sweep_opts;
  add_run_options(sweep, sweep_opts);
  sweep->callback([&] {
    const ExperimentConfig cfg = run_config(g, sweep_opts, sweep);
    const auto rows = experiment::run_sweep(cfg, clean_data(cfg, sweep_opts));
    for (const auto& s : rows) {
      log(to_string(s.method), " snr=", s.snr_db, " mean_rmse=", s.mean_rmse, " mean_cc_pearson=", s.mean_cc_pearson,
          " mean_filtered_rank=", s.mean_filtered_rank);
    }
    log("wrote ", (cfg.output_dir / "summary.csv").string());
  });

  // plot
  auto* pl = app.add_subcommand("plot", "render a CSV or .dmds file as SVG");
  std::string pl_kind, pl_out;
  std::vector<std::string> pl_inputs;
  plot::PlotOptions pl_opts;
  pl->add_option("--kind", pl_kind, "surface, sweep, error_t or rank_bar")->required();
  pl->add_option("--out", pl_out, "SVG file (default <out-dir>/<kind>.svg)");
  pl->add_option("--metric", pl_opts.metric, "summary column for sweep plots");
  pl->add_option("--snapshot", pl_opts.snapshot, "surface: draw one snapshot of 2-D data");
  pl->add_option("inputs", pl_inputs, "input files")->required();
  pl->callback([&] {
    const ExperimentConfig cfg = base_config(g);
    const auto kind = plot::plot_kind_from_string(pl_kind);
    const auto out = in_out_dir(cfg, pl_out, pl_kind + ".svg");
    plot::render(kind, {pl_inputs.begin(), pl_inputs.end()}, out, pl_opts);
    log("wrote ", out.string());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ValueError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ShapeError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const SchemaError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kIo;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
}
