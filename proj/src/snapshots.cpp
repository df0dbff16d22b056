#include "noisydmd/snapshots.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "noisydmd/errors.hpp"

namespace noisydmd {

double GridAxis::spacing() const {
  return count > 1 ? (max - min) / static_cast<double>(count - 1) : 0.0;
}

std::uint64_t GridMeta::point_count() const {
  std::uint64_t n = axes.empty() ? 0 : 1;
  for (const auto& a : axes) n *= a.count;
  return n;
}

GridMeta GridMeta::line(std::uint64_t n, double min, double max) {
  return GridMeta{GridKind::line1d, {GridAxis{n, min, max}}};
}

GridMeta GridMeta::plane(std::uint64_t nx, double xmin, double xmax,
                         std::uint64_t ny, double ymin, double ymax) {
  return GridMeta{GridKind::plane2d,
                  {GridAxis{nx, xmin, xmax}, GridAxis{ny, ymin, ymax}}};
}

std::vector<double> SnapshotMatrix::times() const {
  std::vector<double> t(static_cast<std::size_t>(cols()));
  for (Eigen::Index k = 0; k < cols(); ++k) t[static_cast<std::size_t>(k)] = time(k);
  return t;
}

void SnapshotMatrix::validate() const {
  if (rows() < 2 || cols() < 3) {
    throw ShapeError("snapshot matrix must be at least 2x3, got " +
                     std::to_string(rows()) + "x" + std::to_string(cols()));
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValueError("dt must be positive and finite");
  if (!std::isfinite(t0)) throw ValueError("t0 must be finite");
  if (!values.allFinite()) throw ValueError("snapshot matrix has non-finite entries");
  const std::size_t naxes = grid.kind == GridKind::line1d ? 1 : 2;
  if (grid.axes.size() != naxes) throw ShapeError("grid axis count does not match grid kind");
  if (grid.point_count() != static_cast<std::uint64_t>(rows())) {
    throw ShapeError("grid point count does not match row count");
  }
}

bool SnapshotMatrix::operator==(const SnapshotMatrix& other) const {
  return is_complex == other.is_complex && dt == other.dt && t0 == other.t0 &&
         grid == other.grid && values.rows() == other.values.rows() &&
         values.cols() == other.values.cols() && values == other.values;
}

namespace snapshots {

SplitPair split(const SnapshotMatrix& x) {
  if (x.cols() < 3) {
    throw ShapeError("split needs at least 3 snapshots, got " + std::to_string(x.cols()));
  }
  const Eigen::Index m = x.cols() - 1;
  SplitPair pair{x, x};
  pair.x1.values = x.values.leftCols(m);
  pair.x2.values = x.values.rightCols(m);
  pair.x2.t0 = x.t0 + x.dt;
  return pair;
}

SnapshotMatrix add_noise(const SnapshotMatrix& x, const NoiseSpec& spec) {
  if (spec.clean()) return x;
  if (!std::isfinite(spec.snr_db)) throw ValueError("snr_db must be finite or +inf");
  x.validate();

  const double n = static_cast<double>(x.values.size());
  const double variance = x.values.squaredNorm() / (n * std::pow(10.0, spec.snr_db / 10.0));

  std::mt19937_64 rng(spec.seed);
  SnapshotMatrix out = x;
  if (x.is_complex) {
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        out.values(i, j) += Complex(re, im);
      }
    }
  } else {
    std::normal_distribution<double> normal(0.0, std::sqrt(variance));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) out.values(i, j) += normal(rng);
    }
  }
  return out;
}

double empirical_snr_db(const CMatrix& signal, const CMatrix& noisy) {
  if (signal.rows() != noisy.rows() || signal.cols() != noisy.cols()) {
    throw ShapeError("empirical_snr_db: shape mismatch");
  }
  return 10.0 * std::log10(signal.squaredNorm() / (noisy - signal).squaredNorm());
}

namespace {

constexpr std::array<char, 4> kMagic{'D', 'M', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;

class LeWriter {
public:
  explicit LeWriter(std::ostream& os) : os_(os) {}

  template <typename T>
  void put(T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    auto bits = std::bit_cast<U>(value);
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
    }
    os_.write(bytes.data(), bytes.size());
  }

private:
  std::ostream& os_;
};

class LeReader {
public:
  explicit LeReader(std::istream& is) : is_(is) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint8_t>>>;
    std::array<unsigned char, sizeof(T)> bytes{};
    is_.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (is_.gcount() != static_cast<std::streamsize>(sizeof(T))) {
      throw FormatError("truncated DMDS file");
    }
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
    return std::bit_cast<T>(bits);
  }

private:
  std::istream& is_;
};

}  // namespace

void save(const SnapshotMatrix& x, const std::filesystem::path& path) {
  x.validate();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");

  os.write(kMagic.data(), kMagic.size());
  LeWriter w(os);
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint8_t>(x.is_complex ? 1 : 0);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(x.grid.kind));
  w.put<std::uint16_t>(0);
  w.put<std::uint64_t>(static_cast<std::uint64_t>(x.rows()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(x.cols()));
  w.put<double>(x.dt);
  w.put<double>(x.t0);
  for (const auto& axis : x.grid.axes) {
    w.put<std::uint64_t>(axis.count);
    w.put<double>(axis.min);
    w.put<double>(axis.max);
  }
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      w.put<double>(x.values(i, j).real());
      if (x.is_complex) w.put<double>(x.values(i, j).imag());
    }
  }
  if (!os) throw IoError("write failed for " + path.string());
}

SnapshotMatrix load(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());

  std::array<char, 4> magic{};
  is.read(magic.data(), magic.size());
  if (is.gcount() != 4 || magic != kMagic) throw FormatError("bad magic in " + path.string());

  LeReader r(is);
  if (r.get<std::uint32_t>() != kVersion) throw FormatError("unsupported DMDS version");
  const auto complex_flag = r.get<std::uint8_t>();
  const auto kind = r.get<std::uint8_t>();
  r.get<std::uint16_t>();
  if (complex_flag > 1) throw FormatError("bad complex flag");
  if (kind > 1) throw FormatError("bad grid kind");

  SnapshotMatrix x;
  x.is_complex = complex_flag == 1;
  x.grid.kind = static_cast<GridKind>(kind);
  const auto q = r.get<std::uint64_t>();
  const auto p = r.get<std::uint64_t>();
  x.dt = r.get<double>();
  x.t0 = r.get<double>();
  const int naxes = x.grid.kind == GridKind::line1d ? 1 : 2;
  for (int a = 0; a < naxes; ++a) {
    GridAxis axis;
    axis.count = r.get<std::uint64_t>();
    axis.min = r.get<double>();
    axis.max = r.get<double>();
    x.grid.axes.push_back(axis);
  }
  if (x.grid.point_count() != q) throw FormatError("grid block does not match Q");
  constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 34;
  if (q == 0 || p == 0 || q > kMaxEntries / p) throw FormatError("implausible dimensions");

  // Payload length must match the header exactly.
  const auto payload_start = is.tellg();
  is.seekg(0, std::ios::end);
  const auto file_end = is.tellg();
  is.seekg(payload_start);
  const std::uint64_t expected = q * p * (x.is_complex ? 16u : 8u);
  if (static_cast<std::uint64_t>(file_end - payload_start) != expected) {
    throw FormatError("payload length does not match header dimensions");
  }

  x.values.resize(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < x.values.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.values.rows(); ++i) {
      const double re = r.get<double>();
      const double im = x.is_complex ? r.get<double>() : 0.0;
      x.values(i, j) = Complex(re, im);
    }
  }
  return x;
}

void export_csv(const SnapshotMatrix& x, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << std::setprecision(17);
  os << 't';
  for (Eigen::Index i = 0; i < x.rows(); ++i) os << ",q" << i;
  os << '\n';
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    os << x.time(j);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const Complex v = x.values(i, j);
      os << ',' << v.real();
      if (x.is_complex) os << (std::signbit(v.imag()) ? "-" : "+") << std::abs(v.imag()) << 'i';
    }
    os << '\n';
  }
  if (!os) throw IoError("write failed for " + path.string());
}

}  // namespace snapshots
}  // namespace noisydmd
