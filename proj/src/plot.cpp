#include "noisydmd/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "noisydmd/errors.hpp"

namespace noisydmd::plot {
namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 150;  // room for the legend
constexpr double kTop = 40;
constexpr double kBottom = 50;

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

std::string tick_label(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double parse_number(const std::string& s) {
  if (s == "nan" || s.empty()) return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw SchemaError("not a number: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw SchemaError("not a number: '" + s + "'");
  }
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0, hi = 1;
    if (hi - lo < 1e-300) {
      const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.05;
      lo -= pad;
      hi += pad;
    }
  }
};

class Canvas {
public:
  Canvas(std::string title, std::string xlabel, std::string ylabel) {
    os_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
        << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(kHeight) << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
        << "\" fill=\"white\"/>\n";
    text(kWidth / 2 - kRight / 2 + kLeft / 2, 24, title, "middle", 15);
    text(kLeft + plot_w() / 2, kHeight - 12, xlabel, "middle", 12);
    os_ << "<text x=\"16\" y=\"" << num(kTop + plot_h() / 2) << "\" font-family=\"sans-serif\" font-size=\"12\" "
        << "text-anchor=\"middle\" transform=\"rotate(-90 16 " << num(kTop + plot_h() / 2) << ")\">"
        << escape(ylabel) << "</text>\n";
  }

  static double plot_w() { return kWidth - kLeft - kRight; }
  static double plot_h() { return kHeight - kTop - kBottom; }

  void set_ranges(Range x, Range y) {
    x.finish();
    y.finish();
    x_ = x;
    y_ = y;
  }
  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * plot_w(); }
  double py(double y) const { return kTop + plot_h() - (y - y_.lo) / (y_.hi - y_.lo) * plot_h(); }

  void axes(bool x_ticks = true) {
    os_ << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(plot_w())
        << "\" height=\"" << num(plot_h()) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fy = y_.lo + (y_.hi - y_.lo) * i / 4.0;
      const double yy = py(fy);
      line(kLeft - 4, yy, kLeft, yy);
      text(kLeft - 6, yy + 4, tick_label(fy), "end", 10);
      if (!x_ticks) continue;
      const double fx = x_.lo + (x_.hi - x_.lo) * i / 4.0;
      const double xx = px(fx);
      line(xx, kTop + plot_h(), xx, kTop + plot_h() + 4);
      text(xx, kTop + plot_h() + 16, tick_label(fx), "middle", 10);
    }
  }

  void line(double x1, double y1, double x2, double y2, const char* color = "black") {
    os_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
        << "\" stroke=\"" << color << "\"/>\n";
  }

  void text(double x, double y, const std::string& s, const char* anchor, int size) {
    os_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\"" << size
        << "\" text-anchor=\"" << anchor << "\">" << escape(s) << "</text>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const char* color, const std::string& label) {
    os_ << "<polyline class=\"series\" data-label=\"" << escape(label) << "\" fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [x, y] : pts) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!first) os_ << ' ';
      os_ << num(px(x)) << ',' << num(py(y));
      first = false;
    }
    os_ << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill, const char* cls = nullptr) {
    os_ << "<rect";
    if (cls) os_ << " class=\"" << cls << "\"";
    os_ << " x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
        << "\" fill=\"" << fill << "\"/>\n";
  }

  void legend_entry(int index, const char* color, const std::string& label) {
    const double y = kTop + 10 + 18 * index;
    const double x = kWidth - kRight + 12;
    os_ << "<line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x + 20) << "\" y2=\"" << num(y)
        << "\" stroke=\"" << color << "\" stroke-width=\"3\"/>\n";
    text(x + 26, y + 4, label, "start", 11);
  }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

private:
  std::ostringstream os_;
  Range x_, y_;
};

std::string color_map(double f) {
  // Five-stop blue -> teal -> yellow ramp.
  static constexpr std::array<std::array<double, 3>, 5> stops{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140},
                                                               {94, 201, 98}, {253, 231, 37}}};
  f = std::clamp(std::isfinite(f) ? f : 0.0, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(f));
  const double t = f - i;
  std::ostringstream os;
  os << '#' << std::hex << std::setfill('0');
  for (int c = 0; c < 3; ++c) {
    const int v = static_cast<int>(std::lround(stops[i][c] + t * (stops[i + 1][c] - stops[i][c])));
    os << std::setw(2) << v;
  }
  return os.str();
}

void write_file(const std::filesystem::path& out, const std::string& svg) {
  std::ofstream os(out, std::ios::trunc | std::ios::binary);
  if (!os) throw IoError("cannot open " + out.string() + " for writing");
  os << svg;
  if (!os) throw IoError("write failed for " + out.string());
}

}  // namespace

PlotKind plot_kind_from_string(const std::string& name) {
  if (name == "surface") return PlotKind::surface;
  if (name == "sweep") return PlotKind::sweep;
  if (name == "error_t") return PlotKind::error_t;
  if (name == "rank_bar") return PlotKind::rank_bar;
  throw ConfigError("unknown plot kind '" + name + "' (expected surface, sweep, error_t or rank_bar)");
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw SchemaError("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable table;
  std::string line;
  if (!std::getline(is, line)) throw SchemaError(path.string() + " is empty");
  table.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw SchemaError(path.string() + ": row has " + std::to_string(cells.size()) + " cells, header has " +
                        std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

std::string surface_svg(const SnapshotMatrix& x, std::optional<int> snapshot) {
  const bool field = snapshot.has_value() && x.grid.kind == GridKind::plane2d;
  Eigen::MatrixXd mag;
  std::string title;
  std::string xlabel;
  std::string ylabel;
  if (field) {
    if (*snapshot < 0 || *snapshot >= x.cols()) throw ValueError("snapshot index out of range");
    const auto nx = static_cast<Eigen::Index>(x.grid.axes[0].count);
    const auto ny = static_cast<Eigen::Index>(x.grid.axes[1].count);
    // Rows = y, columns = x.
    mag = x.values.col(*snapshot).cwiseAbs().reshaped(nx, ny).transpose();
    title = "snapshot " + std::to_string(*snapshot);
    xlabel = "x";
    ylabel = "y";
  } else {
    mag = x.values.cwiseAbs();
    title = x.is_complex ? "|X|" : "X";
    if (!x.is_complex) mag = x.values.real();
    xlabel = "t";
    ylabel = "grid point";
  }

  // Block-average down to a bounded number of cells.
  constexpr Eigen::Index kMaxCells = 160;
  const Eigen::Index rows = std::min(mag.rows(), kMaxCells);
  const Eigen::Index cols = std::min(mag.cols(), kMaxCells);
  Eigen::MatrixXd cells(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Eigen::Index c0 = j * mag.cols() / cols, c1 = (j + 1) * mag.cols() / cols;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Eigen::Index r0 = i * mag.rows() / rows, r1 = (i + 1) * mag.rows() / rows;
      cells(i, j) = mag.block(r0, c0, r1 - r0, c1 - c0).mean();
    }
  }
  const double lo = cells.minCoeff();
  const double hi = cells.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;

  Canvas canvas(title, xlabel, ylabel);
  Range xr, yr;
  if (field) {
    xr.add(x.grid.axes[0].min), xr.add(x.grid.axes[0].max);
    yr.add(x.grid.axes[1].min), yr.add(x.grid.axes[1].max);
  } else {
    xr.add(x.time(0)), xr.add(x.time(x.cols() - 1));
    yr.add(0), yr.add(static_cast<double>(x.rows() - 1));
  }
  canvas.set_ranges(xr, yr);
  const double cw = Canvas::plot_w() / static_cast<double>(cols);
  const double ch = Canvas::plot_h() / static_cast<double>(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      // Row 0 at the bottom.
      const double y = kTop + Canvas::plot_h() - (static_cast<double>(i) + 1) * ch;
      canvas.rect(kLeft + static_cast<double>(j) * cw, y, cw + 0.05, ch + 0.05,
                  color_map((cells(i, j) - lo) / span), "cell");
    }
  }
  canvas.axes();
  for (int k = 0; k <= 4; ++k) {
    const double f = k / 4.0;
    canvas.rect(kWidth - kRight + 20, kTop + Canvas::plot_h() * (1 - f) - 10, 20, 20, color_map(f));
    canvas.text(kWidth - kRight + 46, kTop + Canvas::plot_h() * (1 - f) + 4, tick_label(lo + f * span), "start", 10);
  }
  return canvas.finish();
}

std::string sweep_svg(const CsvTable& summary, const std::string& metric) {
  const auto c_method = summary.column("method");
  const auto c_snr = summary.column("snr_db");
  const auto c_val = summary.column(metric);

  std::map<std::string, std::vector<std::pair<double, double>>> series;
  std::vector<std::string> order;
  Range xr, yr;
  for (const auto& row : summary.rows) {
    const auto& m = row[c_method];
    if (!series.contains(m)) order.push_back(m);
    const double x = parse_number(row[c_snr]);
    const double y = parse_number(row[c_val]);
    series[m].emplace_back(x, y);
    xr.add(x);
    yr.add(y);
  }
  Canvas canvas(metric + " vs SNR", "SNR (dB)", metric);
  canvas.set_ranges(xr, yr);
  canvas.axes();
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto pts = series[order[i]];
    std::sort(pts.begin(), pts.end());
    const char* color = kPalette[i % kPalette.size()];
    canvas.polyline(pts, color, order[i]);
    canvas.legend_entry(static_cast<int>(i), color, order[i]);
  }
  return canvas.finish();
}

std::string error_t_svg(const std::vector<std::pair<std::string, CsvTable>>& series) {
  Range xr, yr;
  std::vector<std::vector<std::pair<double, double>>> points;
  for (const auto& [label, table] : series) {
    const auto c_t = table.column("t");
    const auto c_e = table.column("epsilon");
    auto& pts = points.emplace_back();
    for (const auto& row : table.rows) {
      const double t = parse_number(row[c_t]);
      const double e = parse_number(row[c_e]);
      pts.emplace_back(t, e);
      xr.add(t);
      yr.add(e);
    }
  }
  Canvas canvas("Relative error over time", "t", "epsilon");
  canvas.set_ranges(xr, yr);
  canvas.axes();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % kPalette.size()];
    canvas.polyline(points[i], color, series[i].first);
    canvas.legend_entry(static_cast<int>(i), color, series[i].first);
  }
  return canvas.finish();
}

std::string rank_bar_svg(const CsvTable& metrics) {
  const auto c_method = metrics.column("method");
  const auto c_rank = metrics.column("filtered_rank");
  const bool has_error = metrics.has_column("error");
  const std::size_t c_error = has_error ? metrics.column("error") : 0;

  std::vector<std::string> order;
  std::map<std::string, std::pair<double, int>> sums;
  for (const auto& row : metrics.rows) {
    if (has_error && !row[c_error].empty()) continue;
    const auto& m = row[c_method];
    if (!sums.contains(m)) order.push_back(m);
    auto& [sum, n] = sums[m];
    sum += parse_number(row[c_rank]);
    ++n;
  }
  Range xr, yr;
  xr.add(0), xr.add(static_cast<double>(std::max<std::size_t>(order.size(), 1)));
  yr.add(0);
  for (const auto& m : order) yr.add(sums[m].first / sums[m].second);
  yr.hi *= 1.1;

  Canvas canvas("Rank of filtered data", "method", "numerical rank");
  canvas.set_ranges(xr, yr);
  canvas.axes(false);
  const double slot = Canvas::plot_w() / static_cast<double>(std::max<std::size_t>(order.size(), 1));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double value = sums[order[i]].first / sums[order[i]].second;
    const double x0 = kLeft + slot * (static_cast<double>(i) + 0.2);
    const double top = canvas.py(value);
    canvas.rect(x0, top, slot * 0.6, kTop + Canvas::plot_h() - top, kPalette[i % kPalette.size()], "bar");
    canvas.text(x0 + slot * 0.3, top - 4, tick_label(value), "middle", 10);
    canvas.text(x0 + slot * 0.3, kTop + Canvas::plot_h() + 16, order[i], "middle", 11);
  }
  return canvas.finish();
}

void render(PlotKind kind, const std::vector<std::filesystem::path>& inputs, const std::filesystem::path& out,
            const PlotOptions& options) {
  if (inputs.empty()) throw ConfigError("plot needs at least one input file");
  std::string svg;
  switch (kind) {
    case PlotKind::surface: {
      const auto& in = inputs.front();
      svg = surface_svg(snapshots::load(in), options.snapshot);
      break;
    }
    case PlotKind::sweep:
      svg = sweep_svg(read_csv(inputs.front()), options.metric);
      break;
    case PlotKind::error_t: {
      std::vector<std::pair<std::string, CsvTable>> series;
      for (const auto& p : inputs) series.emplace_back(p.stem().string(), read_csv(p));
      svg = error_t_svg(series);
      break;
    }
    case PlotKind::rank_bar:
      svg = rank_bar_svg(read_csv(inputs.front()));
      break;
  }
  write_file(out, svg);
}

}  // namespace noisydmd::plot
