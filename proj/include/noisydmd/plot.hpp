#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "noisydmd/snapshots.hpp"

namespace noisydmd::plot {

enum class PlotKind { surface, sweep, error_t, rank_bar };

PlotKind plot_kind_from_string(const std::string& name);

/// Header plus string cells; enough for the CSVs this project writes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header; SchemaError if absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Heatmap of |X| over (snapshot, grid point). With `snapshot` set and plane2d
/// data, draws that single snapshot as a 2-D field instead.
std::string surface_svg(const SnapshotMatrix& x, std::optional<int> snapshot = std::nullopt);

/// One polyline per method: `metric` (a summary column) against snr_db.
std::string sweep_svg(const CsvTable& summary, const std::string& metric = "mean_rmse");

/// One polyline per (label, t/epsilon table).
std::string error_t_svg(const std::vector<std::pair<std::string, CsvTable>>& series);

/// One bar per method: mean filtered_rank over successful rows of a metrics CSV.
std::string rank_bar_svg(const CsvTable& metrics);

struct PlotOptions {
  std::string metric = "mean_rmse";
  std::optional<int> snapshot;
};

/// Reads the inputs for `kind` and writes an SVG file to `out`.
void render(PlotKind kind, const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out,
            const PlotOptions& options = {});

}  // namespace noisydmd::plot
