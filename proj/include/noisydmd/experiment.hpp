#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "noisydmd/dmd.hpp"
#include "noisydmd/metrics.hpp"
#include "noisydmd/pde.hpp"
#include "noisydmd/rpca.hpp"
#include "noisydmd/tlsdmd.hpp"

namespace noisydmd {

enum class Dataset { nlse, fne, swe };

std::string to_string(Dataset d);
Dataset dataset_from_string(const std::string& name);

/// Everything a pipeline or sweep run depends on. Serialized verbatim into
/// the run manifest.
struct ExperimentConfig {
  Dataset dataset = Dataset::nlse;
  pde::NlseConfig nlse;
  pde::FneConfig fne;
  pde::SweConfig swe;

  std::vector<double> snr_db{5, 10, 15, 20, 25, 30, 35, 40};
  bool clean = false;  // ignore snr_db and run uncorrupted data
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<FilterMethod> methods{FilterMethod::none, FilterMethod::adm, FilterMethod::ialm,
                                    FilterMethod::tls};
  int rank = 0;  // 0 = energy rule
  double rank_tol = 1e-6;
  AdmParams adm;
  IalmParams ialm;
  bool filter_splits = false;  // filter X1 and X2 separately instead of X once
  double forecast = 0.0;       // extra reconstruction time past the last snapshot
  std::filesystem::path output_dir = "noisydmd_out";
  int threads = 1;
  bool write_error_series = true;

  void validate() const;
  /// The SNR list actually used (a single +inf entry when clean).
  std::vector<double> effective_snr() const;
};

ExperimentConfig config_from_json(const nlohmann::json& doc, ExperimentConfig base = {});
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Result of running one method on one (possibly corrupted) dataset.
struct MethodOutcome {
  DmdModel model;
  FilterReport report;
  int rpca_iterations = 0;
  bool rpca_converged = true;
};

struct CellResult {
  MetricsRecord record;
  std::vector<double> times;
  Vector epsilon;
  std::optional<SnapshotMatrix> forecast;  // set when cfg.forecast > 0
};

struct SweepSummary {
  std::string dataset;
  FilterMethod method = FilterMethod::none;
  double snr_db = 0.0;
  int n_seeds = 0;
  int n_failed = 0;
  double mean_rmse = 0.0;
  double mean_cc_paper = 0.0;
  double mean_cc_pearson = 0.0;
  double mean_filtered_rank = 0.0;
  double mean_rank_used = 0.0;
};

namespace experiment {

SnapshotMatrix generate(const ExperimentConfig& cfg);

/// Filters `noisy` with `method` and fits the matching DMD model.
MethodOutcome apply_method(const SnapshotMatrix& noisy, FilterMethod method, const ExperimentConfig& cfg);

/// Corrupt, filter, fit, reconstruct at the snapshot times, and score
/// against `clean`. Failures are returned in record.error, never thrown.
CellResult run_cell(const SnapshotMatrix& clean, FilterMethod method, double snr_db, std::uint64_t seed,
                    const ExperimentConfig& cfg);

/// All (method, snr, seed) cells, sorted canonically. Writes metrics.csv,
/// the error_series/ CSVs and manifest.json under cfg.output_dir.
std::vector<MetricsRecord> run_pipeline(const ExperimentConfig& cfg);
std::vector<MetricsRecord> run_pipeline(const ExperimentConfig& cfg, const SnapshotMatrix& clean);

/// Per-(method, snr) means over seeds, ignoring failed cells and NaNs.
std::vector<SweepSummary> summarize(const std::vector<MetricsRecord>& records);

/// run_pipeline plus summary.csv.
std::vector<SweepSummary> run_sweep(const ExperimentConfig& cfg);
std::vector<SweepSummary> run_sweep(const ExperimentConfig& cfg, const SnapshotMatrix& clean);

inline constexpr const char* kSummaryHeader =
    "dataset,method,snr_db,n_seeds,n_failed,mean_rmse,mean_cc_paper,mean_cc_pearson,mean_filtered_rank,"
    "mean_rank_used";

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records);
void write_summary_csv(const std::filesystem::path& path, const std::vector<SweepSummary>& rows);
void write_error_series(const std::filesystem::path& path, const std::vector<double>& times, const Vector& eps);
void write_manifest(const std::filesystem::path& path, const ExperimentConfig& cfg);

}  // namespace experiment
}  // namespace noisydmd
