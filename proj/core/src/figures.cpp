#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "harness_internal.hpp"

namespace robustbf {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 170, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                               "#8c564b", "#e377c2", "#7f7f7f", "#17becf", "#bcbd22"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string px(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::string render(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                   const std::string& ylabel) {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  bool any = false;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!any) {
        x0 = x1 = x;
        y0 = y1 = y;
        any = true;
      }
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  y0 = std::min(y0, 0.0);
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << px(kLeft + pw / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << escape(title)
     << "</text>\n";
  os << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    os << "<text x=\"" << px(sx(xv)) << "\" y=\"" << px(kTop + ph + 15) << "\" text-anchor=\"middle\">" << num(xv)
       << "</text>\n";
    os << "<text x=\"" << px(kLeft - 5) << "\" y=\"" << px(sy(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
       << "</text>\n";
    os << "<line x1=\"" << px(kLeft) << "\" x2=\"" << px(kLeft + pw) << "\" y1=\"" << px(sy(yv)) << "\" y2=\""
       << px(sy(yv)) << "\" stroke=\"#ddd\"/>\n";
  }
  os << "<text x=\"" << px(kLeft + pw / 2) << "\" y=\"" << px(kHeight - 12) << "\" text-anchor=\"middle\">"
     << escape(xlabel) << "</text>\n";
  os << "<text transform=\"translate(15," << px(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(ylabel) << "</text>\n";
  if (!any)
    os << "<text x=\"" << px(kLeft + pw / 2) << "\" y=\"" << px(kTop + ph / 2) << "\" text-anchor=\"middle\" fill=\"#888\">no data</text>\n";
  for (size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    const auto& s = series[i];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t j = 0; j < s.points.size(); ++j)
      os << (j ? " " : "") << px(sx(s.points[j].first)) << ',' << px(sy(s.points[j].second));
    os << "\"/>\n";
    for (const auto& [x, y] : s.points)
      os << "<circle cx=\"" << px(sx(x)) << "\" cy=\"" << px(sy(y)) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    const double ly = kTop + 10 + 16 * i;
    os << "<line x1=\"" << px(kWidth - kRight + 10) << "\" x2=\"" << px(kWidth - kRight + 30) << "\" y1=\"" << px(ly)
       << "\" y2=\"" << px(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << px(kWidth - kRight + 35) << "\" y=\"" << px(ly + 4) << "\">" << escape(s.label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string series_label(Algorithm a, double eps) { return std::string(to_string(a)) + " eps=" + num(eps); }

}  // namespace

std::string emit_figure(const std::string& csv, const FigureSpec& spec) {
  if (spec.metric != "min_rate" && spec.metric != "sum_rate")
    throw InvalidArgument("unknown metric '" + spec.metric + "'");
  const std::vector<ResultRow> rows = rows_from_csv(csv);
  const bool min = spec.metric == "min_rate";
  std::map<std::pair<int, double>, std::map<double, std::pair<double, int>>> acc;
  std::vector<Series> series;
  std::string xlabel, ylabel;
  if (spec.kind == FigureKind::per_seed) {
    // Lowest SNR point only; seeds are placed by rank.
    double g0 = HUGE_VAL;
    for (const auto& r : rows) g0 = std::min(g0, r.gamma_db);
    std::map<std::uint64_t, int> rank;
    for (const auto& r : rows) rank.emplace(r.seed, 0);
    int i = 0;
    for (auto& [seed, idx] : rank) idx = ++i;
    const auto norm = detail::normalized(rows, spec.metric);
    for (size_t j = 0; j < rows.size(); ++j)
      if (rows[j].gamma_db == g0 && std::isfinite(norm[j]))
        acc[{static_cast<int>(rows[j].algo), rows[j].eps}][rank[rows[j].seed]] = {norm[j], 1};
    xlabel = "channel realization";
    ylabel = "normalized " + spec.metric;
  } else {
    for (const auto& r : rows)
      if (r.ok()) {
        auto& a = acc[{static_cast<int>(r.algo), r.eps}][r.gamma_db];
        a.first += min ? r.min_rate : r.sum_rate;
        ++a.second;
      }
    xlabel = "SNR scaling (dB)";
    ylabel = "mean " + spec.metric + " (nats)";
  }
  for (const auto& [key, pts] : acc) {
    Series s{series_label(static_cast<Algorithm>(key.first), key.second), {}};
    for (const auto& [x, v] : pts) s.points.emplace_back(x, v.first / v.second);
    series.push_back(std::move(s));
  }
  return render(series, spec.title, xlabel, ylabel);
}

}  // namespace robustbf
