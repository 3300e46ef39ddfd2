#include "auvmae/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace auvmae {

namespace {

// White (0) to dark blue (1).
std::string color(double v) {
  if (std::isnan(v)) return "#cccccc";
  v = std::clamp(v, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(255 * (1 - 0.85 * v)));
  const int g = static_cast<int>(std::lround(255 * (1 - 0.65 * v)));
  const int b = static_cast<int>(std::lround(255 * (1 - 0.25 * v)));
  std::ostringstream out;
  out << '#' << std::hex << std::setfill('0') << std::setw(2) << r << std::setw(2) << g << std::setw(2) << b;
  return out.str();
}

std::string fmt(double v, int digits = 2) {
  if (std::isnan(v)) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << v;
  return out.str();
}

}  // namespace

std::string intra_heatmap_svg(const Matrix& m, const std::vector<int>& au_ids, const std::string& title) {
  const int n = static_cast<int>(m.rows());
  const int cell = 48, margin = 60;
  const int size = margin + n * cell + 10;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size + 20
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<text x=\"" << margin << "\" y=\"16\" font-size=\"14\">" << title << "</text>\n";
  for (int i = 0; i < n; ++i) {
    svg << "<text x=\"8\" y=\"" << margin + 20 + i * cell + cell / 2 << "\">AU" << au_ids[i] << "</text>\n";
    svg << "<text x=\"" << margin + i * cell + 8 << "\" y=\"" << margin + 10 << "\">AU" << au_ids[i]
        << "</text>\n";
    for (int j = 0; j < n; ++j) {
      const int x = margin + j * cell, y = margin + 20 + i * cell;
      const double v = m(i, j);
      svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\"" << cell
          << "\" fill=\"" << color(v) << "\" stroke=\"#ffffff\"/>\n";
      svg << "<text x=\"" << x + 10 << "\" y=\"" << y + cell / 2 + 4 << "\" fill=\""
          << (v > 0.6 ? "#ffffff" : "#000000") << "\">" << fmt(v) << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string inter_heatmap_svg(const std::vector<double>& tensor, int n, const std::vector<int>& au_ids,
                              const std::string& title) {
  const int cw = 28, ch = 16, margin_left = 90, margin_top = 40;
  const int rows = n * n;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << margin_left + 16 * cw + 10 << "\" height=\""
      << margin_top + rows * ch + 10 << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  svg << "<text x=\"" << margin_left << "\" y=\"14\" font-size=\"14\">" << title << "</text>\n";
  for (int s = 0; s < 16; ++s)
    svg << "<text x=\"" << margin_left + s * cw + 8 << "\" y=\"" << margin_top - 6 << "\">" << s << "</text>\n";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int row = i * n + j;
      const int y = margin_top + row * ch;
      svg << "<text x=\"4\" y=\"" << y + 12 << "\">AU" << au_ids[i] << "/AU" << au_ids[j] << "</text>\n";
      for (int s = 0; s < 16; ++s) {
        const double v = tensor[(static_cast<std::size_t>(i) * n + j) * 16 + s];
        // Square-root scale keeps small transition masses visible.
        svg << "<rect x=\"" << margin_left + s * cw << "\" y=\"" << y << "\" width=\"" << cw << "\" height=\""
            << ch << "\" fill=\"" << color(std::isnan(v) ? v : std::sqrt(v)) << "\"/>\n";
      }
    }
  svg << "</svg>\n";
  return svg.str();
}

std::string metrics_table_markdown(const std::vector<std::pair<std::string, MetricReport>>& rows,
                                   bool accuracy) {
  if (rows.empty()) return {};
  const auto& ids = rows.front().second.au_ids;
  std::ostringstream out;
  out << "| Run |";
  for (int id : ids) out << " AU" << id << " |";
  out << " Avg |\n|---|";
  for (std::size_t k = 0; k <= ids.size(); ++k) out << "---|";
  out << '\n';
  for (const auto& [name, r] : rows) {
    const Vector& v = accuracy ? r.per_au_acc : r.per_au_f1;
    out << "| " << name << " |";
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << fmt(100 * v[i], 1) << " |";
    out << ' ' << fmt(100 * (accuracy ? r.avg_acc : r.avg_f1), 1) << " |\n";
  }
  return out.str();
}

std::string metrics_table_csv(const std::vector<std::pair<std::string, MetricReport>>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "run,au,f1,acc\n";
  for (const auto& [name, r] : rows) {
    for (std::size_t i = 0; i < r.au_ids.size(); ++i)
      out << name << ',' << r.au_ids[i] << ',' << r.per_au_f1[static_cast<Eigen::Index>(i)] << ','
          << r.per_au_acc[static_cast<Eigen::Index>(i)] << '\n';
    out << name << ",avg," << r.avg_f1 << ',' << r.avg_acc << '\n';
  }
  return out.str();
}

}  // namespace auvmae
