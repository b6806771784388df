#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "starkecho/io.hpp"

namespace starkecho::io {

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    if (t.columns.empty()) {
      while (std::getline(cells, cell, ',')) t.columns.push_back(cell);
      continue;
    }
    auto& row = t.rows.emplace_back();
    while (std::getline(cells, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::invalid_argument("line " + std::to_string(line_no) + ": not a number '" + cell + "'");
      }
    }
    if (row.size() != t.columns.size())
      throw std::invalid_argument("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(t.columns.size()) + " fields");
  }
  if (t.columns.empty()) throw std::invalid_argument("empty CSV");
  return t;
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  std::string s = buf;
  return s == "-0.00" ? "0.00" : s;
}

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  std::string s = buf;
  return s == "-0" ? "0" : s;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Roughly five round tick values covering [lo, hi].
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  std::vector<double> out;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) out.push_back(v);
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string plot_svg(const CsvTable& table, const PlotOptions& opt) {
  std::string x_name = opt.x_column;
  if (x_name.empty()) {
    if (table.column("time_us") >= 0) x_name = "time_us";
    else if (table.column("phi_rad") >= 0) x_name = "phi_rad";
    else throw std::invalid_argument("CSV has neither a time_us nor a phi_rad column");
  }
  const int xc = table.column(x_name);
  if (xc < 0) throw std::invalid_argument("CSV has no column '" + x_name + "'");

  std::vector<std::string> y_names = opt.y_columns;
  if (y_names.empty())
    for (const auto& c : table.columns)
      if (c != x_name) y_names.push_back(c);
  std::vector<int> yc;
  for (const auto& n : y_names) {
    const int c = table.column(n);
    if (c < 0) throw std::invalid_argument("CSV has no column '" + n + "'");
    yc.push_back(c);
  }
  if (table.rows.empty()) throw std::invalid_argument("CSV has no data rows");

  double x0 = table.rows.front()[xc], x1 = x0, y0 = 0.0, y1 = 0.0;
  bool first = true;
  for (const auto& r : table.rows) {
    x0 = std::min(x0, r[xc]);
    x1 = std::max(x1, r[xc]);
    for (int c : yc) {
      y0 = first ? r[c] : std::min(y0, r[c]);
      y1 = first ? r[c] : std::max(y1, r[c]);
      first = false;
    }
  }
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double left = 70, right = 150, top = 36, bottom = 48;
  const double pw = opt.width - left - right;
  const double ph = opt.height - top - bottom;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
    << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << opt.width << "\" height=\"" << opt.height << "\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    s << "<text x=\"" << num(left + pw / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(opt.title) << "</text>\n";

  for (auto [a, b] : opt.shaded) {
    const double xa = std::clamp(a, x0, x1), xb = std::clamp(b, x0, x1);
    if (xb <= xa) continue;
    s << "<rect x=\"" << num(sx(xa)) << "\" y=\"" << num(top) << "\" width=\"" << num(std::max(sx(xb) - sx(xa), 1.0))
      << "\" height=\"" << num(ph) << "\" fill=\"#cccccc\" fill-opacity=\"0.5\"/>\n";
  }

  s << "<g stroke=\"#999999\" stroke-width=\"0.5\">\n";
  for (double t : ticks(x0, x1))
    s << "<line x1=\"" << num(sx(t)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(sx(t)) << "\" y2=\""
      << num(top + ph) << "\"/>\n";
  for (double t : ticks(y0, y1))
    s << "<line x1=\"" << num(left) << "\" y1=\"" << num(sy(t)) << "\" x2=\"" << num(left + pw) << "\" y2=\""
      << num(sy(t)) << "\"/>\n";
  s << "</g>\n";
  for (double t : ticks(x0, x1))
    s << "<text x=\"" << num(sx(t)) << "\" y=\"" << num(top + ph + 16) << "\" text-anchor=\"middle\">" << label(t)
      << "</text>\n";
  for (double t : ticks(y0, y1))
    s << "<text x=\"" << num(left - 6) << "\" y=\"" << num(sy(t) + 4) << "\" text-anchor=\"end\">" << label(t)
      << "</text>\n";
  s << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(opt.height - 10.0) << "\" text-anchor=\"middle\">"
    << escape(x_name) << "</text>\n";

  for (std::size_t i = 0; i < yc.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      if (r) s << ' ';
      s << num(sx(table.rows[r][xc])) << ',' << num(sy(table.rows[r][yc[i]]));
    }
    s << "\"/>\n";
    const double ly = top + 14 + 18 * static_cast<double>(i);
    s << "<line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(left + pw + 36)
      << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << num(left + pw + 42) << "\" y=\"" << num(ly) << "\">" << escape(y_names[i]) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace starkecho::io
