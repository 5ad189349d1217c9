// Copyright 2026 The pirhc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal SVG line charts built only from the CSV files on disk.

#include <pirhc/scenario.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pirhc {

namespace {

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

std::optional<Csv> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  Csv csv;
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  csv.header = split(line);
  while (std::getline(in, line)) {
    std::vector<double> row;
    for (const std::string& cell : split(line)) {
      double v = std::nan("");
      std::from_chars(cell.data(), cell.data() + cell.size(), v);
      row.push_back(v);
    }
    if (row.size() == csv.header.size()) csv.rows.push_back(std::move(row));
  }
  return csv;
}

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string svg_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<Series>& series, bool log_x, bool log_y) {
  constexpr double W = 640, H = 400, L = 70, R = 150, Tm = 40, B = 50;
  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double a = tx(s.x[i]), b = ty(s.y[i]);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      x0 = std::min(x0, a), x1 = std::max(x1, a), y0 = std::min(y0, b), y1 = std::max(y1, b);
    }
  }
  if (!std::isfinite(x0) || !std::isfinite(y0)) return {};
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - Tm - B); };

  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  auto tick = [&](double v, bool log) { return log ? std::pow(10.0, v) : v; };
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0;
    const double fy = y0 + (y1 - y0) * k / 4.0;
    const double sx = L + (W - L - R) * k / 4.0;
    const double sy = H - B - (H - Tm - B) * k / 4.0;
    o << "<text x=\"" << sx << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << tick(fx, log_x) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
      << tick(fy, log_y) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << xlabel << "</text>\n";
  o << "<text x=\"16\" y=\"" << (Tm + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
    << (Tm + H - B) / 2 << ")\">" << ylabel << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kColors[k % std::size(kColors)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(tx(s.x[i])) || !std::isfinite(ty(s.y[i]))) continue;
      o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    o << "\"/>\n";
    o << "<text x=\"" << W - R + 10 << "\" y=\"" << Tm + 16 * (k + 1) << "\" font-size=\"11\" fill=\"" << color
      << "\">" << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

bool emit(const std::filesystem::path& path, const std::string& svg) {
  if (svg.empty()) return false;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << svg;
  return static_cast<bool>(out);
}

Series column_series(const Csv& csv, int xc, int yc, std::string label) {
  Series s{std::move(label), {}, {}};
  for (const auto& row : csv.rows) {
    s.x.push_back(row[static_cast<std::size_t>(xc)]);
    s.y.push_back(row[static_cast<std::size_t>(yc)]);
  }
  return s;
}

}  // namespace

std::vector<std::string> write_plots(const std::filesystem::path& dir) {
  std::vector<std::string> written;
  try {
    if (auto csv = read_csv(dir / "moments.csv"); csv && !csv->rows.empty()) {
      const Series s = column_series(*csv, csv->column("t"), csv->column("moment"), "E|X_t|^p");
      if (emit(dir / "moments.svg", svg_chart("moment curve", "t [s]", "moment", {s}, false, true))) {
        written.push_back("moments.svg");
      }
    }
    if (auto csv = read_csv(dir / "controls.csv"); csv && !csv->rows.empty()) {
      const int t = csv->column("t_k");
      std::vector<Series> s{column_series(*csv, t, csv->column("u_hat_0"), "u_hat_0"),
                            column_series(*csv, t, csv->column("u_applied_0"), "u_applied_0")};
      if (emit(dir / "controls.svg", svg_chart("controls, realization 0", "t [s]", "u", s, false, false))) {
        written.push_back("controls.svg");
      }
    }
    if (auto csv = read_csv(dir / "sweep_moments.csv"); csv && !csv->rows.empty()) {
      std::vector<Series> series;
      for (const auto& row : csv->rows) {
        const std::string label = csv->header[0] + "=" + format_double(row[0]);
        if (series.empty() || series.back().label != label) series.push_back(Series{label, {}, {}});
        series.back().x.push_back(row[1]);
        series.back().y.push_back(row[2]);
      }
      if (emit(dir / "sweep_moments.svg", svg_chart("moment curves per sweep value", "t [s]", "moment", series, false,
                                                     true))) {
        written.push_back("sweep_moments.svg");
      }
    }
    if (auto csv = read_csv(dir / "clt.csv"); csv && !csv->rows.empty()) {
      const Series s = column_series(*csv, csv->column("rollouts"), csv->column("variance"), "Var(u_hat)");
      if (emit(dir / "clt.svg", svg_chart("variance of u_hat", "N", "variance", {s}, true, true))) {
        written.push_back("clt.svg");
      }
    }
    if (auto csv = read_csv(dir / "bias.csv"); csv && !csv->rows.empty()) {
      const Series s = column_series(*csv, csv->column("dt2_seconds"), csv->column("mean_error"), "|bias|");
      if (emit(dir / "bias.svg", svg_chart("bias of u_hat", "dt2 [s]", "|mean(u_hat) - u*|", {s}, true, true))) {
        written.push_back("bias.svg");
      }
    }
  } catch (...) {
    // Plots never gate the run.
  }
  return written;
}

}  // namespace pirhc
