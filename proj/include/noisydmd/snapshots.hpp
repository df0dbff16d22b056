#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "noisydmd/types.hpp"

namespace noisydmd {

enum class GridKind : std::uint8_t { line1d = 0, plane2d = 1 };

struct GridAxis {
  std::uint64_t count = 0;
  double min = 0.0;
  double max = 0.0;

  double spacing() const;
  bool operator==(const GridAxis&) const = default;
};

/// Spatial layout of the rows of a snapshot matrix.
///
/// For plane2d data the first axis varies fastest in the flattened row index,
/// i.e. row q = i + axes[0].count * j.
struct GridMeta {
  GridKind kind = GridKind::line1d;
  std::vector<GridAxis> axes;

  std::uint64_t point_count() const;
  bool operator==(const GridMeta&) const = default;

  static GridMeta line(std::uint64_t n, double min, double max);
  static GridMeta plane(std::uint64_t nx, double xmin, double xmax,
                        std::uint64_t ny, double ymin, double ymax);
};

/// Q x P matrix of snapshots taken at t0, t0 + dt, ..., t0 + (P-1) dt.
///
/// Values are stored complex; `is_complex` records whether the imaginary
/// part carries data (NLSE) or is identically zero (FNE, SWE).
struct SnapshotMatrix {
  CMatrix values;
  bool is_complex = false;
  double dt = 1.0;
  double t0 = 0.0;
  GridMeta grid;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  double time(Eigen::Index k) const { return t0 + dt * static_cast<double>(k); }
  std::vector<double> times() const;

  /// Throws ShapeError / ValueError when an invariant is violated.
  void validate() const;

  bool operator==(const SnapshotMatrix& other) const;
};

/// Shift pair (X1, X2): X1 holds columns 0..P-2 and X2 columns 1..P-1.
struct SplitPair {
  SnapshotMatrix x1;
  SnapshotMatrix x2;
};

struct NoiseSpec {
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;

  bool clean() const { return snr_db == std::numeric_limits<double>::infinity(); }
};

namespace snapshots {

SplitPair split(const SnapshotMatrix& x);

/// Adds white Gaussian noise scaled to the measured signal power.
///
/// Per-entry variance is ||X||_F^2 / (Q P 10^(snr/10)); complex data gets
/// independent real and imaginary parts of half that variance each. An
/// infinite SNR returns the input unchanged.
SnapshotMatrix add_noise(const SnapshotMatrix& x, const NoiseSpec& spec);

/// 10 log10(||signal||^2 / ||noisy - signal||^2).
double empirical_snr_db(const CMatrix& signal, const CMatrix& noisy);

void save(const SnapshotMatrix& x, const std::filesystem::path& path);
SnapshotMatrix load(const std::filesystem::path& path);

/// One row per snapshot: `t,q0,q1,...`; complex entries written as `re+imi`.
void export_csv(const SnapshotMatrix& x, const std::filesystem::path& path);

}  // namespace snapshots
}  // namespace noisydmd
