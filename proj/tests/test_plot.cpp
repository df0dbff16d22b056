#include <doctest.h>

#include <fstream>
#include <regex>

#include "noisydmd/errors.hpp"
#include "noisydmd/plot.hpp"
#include "support.hpp"

using namespace noisydmd;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// Minimal well-formedness: one root, every open tag closed in order.
bool balanced_xml(const std::string& text) {
  std::vector<std::string> stack;
  const std::regex tag(R"(<(/?)([A-Za-z_][\w:-]*)[^>]*?(/?)>)");
  int roots = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), tag); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    if (m[0].str().rfind("<?", 0) == 0) continue;
    const std::string name = m[2];
    if (m[1] == "/") {
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else if (m[3] != "/") {
      if (stack.empty()) ++roots;
      stack.push_back(name);
    } else if (stack.empty()) {
      ++roots;
    }
  }
  return stack.empty() && roots == 1;
}

plot::CsvTable table(std::vector<std::string> header, std::vector<std::vector<std::string>> rows) {
  return {std::move(header), std::move(rows)};
}

plot::CsvTable metrics_table() {
  auto t = table({"dataset", "method", "snr_db", "seed", "rank_used", "rmse", "cc_paper", "cc_pearson",
                  "filtered_rank", "error_series_path", "error"},
                 {});
  for (const char* m : {"none", "adm", "tls"}) {
    for (int s = 0; s < 2; ++s) {
      t.rows.push_back({"fne", m, "20", std::to_string(s), "5", "0.1", "0.5", "0.9", std::to_string(10 + s), "", ""});
    }
  }
  t.rows.push_back({"fne", "ialm", "20", "0", "0", "nan", "nan", "nan", "0", "", "rank error"});
  return t;
}

}  // namespace

TEST_CASE("rank bar chart has one bar per successful method") {
  const auto svg = plot::rank_bar_svg(metrics_table());
  CHECK(balanced_xml(svg));
  CHECK(count(svg, "class=\"bar\"") == 3);
}

TEST_CASE("sweep chart has one series per method") {
  auto t = table({"dataset", "method", "snr_db", "mean_rmse"}, {});
  for (const char* m : {"none", "ialm"}) {
    for (const char* snr : {"10", "20", "30"}) t.rows.push_back({"swe", m, snr, "0.05"});
  }
  const auto svg = plot::sweep_svg(t);
  CHECK(balanced_xml(svg));
  CHECK(count(svg, "class=\"series\"") == 2);
  CHECK_THROWS_AS(plot::sweep_svg(t, "mean_nothing"), SchemaError);
}

TEST_CASE("error plot requires t and epsilon") {
  const auto good = table({"t", "epsilon"}, {{"0", "0.1"}, {"1", "0.2"}});
  const auto svg = plot::error_t_svg({{"a", good}, {"b", good}});
  CHECK(balanced_xml(svg));
  CHECK_THROWS_AS(plot::error_t_svg({{"a", table({"t", "eps"}, {{"0", "1"}})}}), SchemaError);
}

TEST_CASE("surface plot of a snapshot matrix") {
  std::mt19937_64 rng(1);
  const auto x = testing::wrap(testing::random_cmatrix(30, 12, rng));
  const auto svg = plot::surface_svg(x);
  CHECK(balanced_xml(svg));
  CHECK(count(svg, "class=\"cell\"") == 30 * 12);
  CHECK(svg == plot::surface_svg(x));
}

TEST_CASE("render writes byte-identical files") {
  const auto dir = testing::scratch_dir("plot_render");
  {
    std::ofstream os(dir / "metrics.csv");
    const auto t = metrics_table();
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << '\n';
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    }
  }
  plot::render(plot::PlotKind::rank_bar, {dir / "metrics.csv"}, dir / "a.svg");
  plot::render(plot::PlotKind::rank_bar, {dir / "metrics.csv"}, dir / "b.svg");
  CHECK(testing::slurp(dir / "a.svg") == testing::slurp(dir / "b.svg"));
  CHECK_THROWS_AS(plot::read_csv(dir / "missing.csv"), IoError);
  CHECK_THROWS_AS(plot::plot_kind_from_string("pie"), ConfigError);
}
