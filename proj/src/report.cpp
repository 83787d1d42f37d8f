#include "leoipac/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "leoipac/errors.hpp"

namespace leoipac {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

}  // namespace

std::string csv_header_comment() { return std::string("# leo-ipac-sim v") + kVersion + " schema=1"; }

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& records) {
  os << csv_header_comment() << '\n';
  os << "axis,value,scheme,ber,ber_se,nmse_db,nmse_se_db,position_rmse_m,velocity_rmse_mps,"
        "bits,bit_errors,trials_used,trials_failed\n";
  for (const auto& r : records) {
    os << r.axis << ',' << fmt(r.value) << ',' << r.scheme << ',' << fmt(r.ber) << ','
       << fmt(r.ber_se) << ',' << fmt(r.nmse_db) << ',' << fmt(r.nmse_se_db) << ','
       << fmt(r.position_rmse) << ',' << fmt(r.velocity_rmse) << ',' << r.bits << ','
       << r.bit_errors << ',' << r.trials_used << ',' << r.trials_failed << '\n';
  }
}

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series,
                           bool log_y) {
  const double W = 640, H = 420, L = 70, R = 170, Tm = 40, B = 55;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto ty = [&](double y) { return log_y ? std::log10(std::max(y, 1e-12)) : y; };
  for (const auto& [name, pts] : series)
    for (const auto& [x, y] : pts) {
      if (!std::isfinite(y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, ty(y));
      y1 = std::max(y1, ty(y));
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - Tm - B); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    const double yp = H - B - (H - Tm - B) * i / 4.0;
    os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
       << fmt(std::round(xv * 1000) / 1000) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << yp + 4 << "\" text-anchor=\"end\">"
       << (log_y ? "1e" : "") << fmt(std::round(yv * 100) / 100) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
     << escape(x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << (Tm + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(y_label) << "</text>\n";
  std::size_t ci = 0;
  for (const auto& [name, pts] : series) {
    const char* col = kColors[ci % (sizeof(kColors) / sizeof(kColors[0]))];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts)
      if (std::isfinite(y)) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    for (const auto& [x, y] : pts)
      if (std::isfinite(y))
        os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    const double ly = Tm + 18.0 * static_cast<double>(ci);
    os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 32 << "\" y2=\"" << ly
       << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - R + 38 << "\" y=\"" << ly + 4 << "\">" << escape(name) << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::string> write_svg_plots(const std::string& dir,
                                         const std::vector<MetricsRecord>& records) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<std::string> axes;
  for (const auto& r : records)
    if (std::find(axes.begin(), axes.end(), r.axis) == axes.end()) axes.push_back(r.axis);
  std::vector<std::string> written;
  for (const auto& axis : axes) {
    for (const std::string metric : {"ber", "nmse_db"}) {
      std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;
      for (const auto& r : records) {
        if (r.axis != axis) continue;
        if (metric == "nmse_db" && r.scheme.rfind("perfect_csi", 0) == 0) continue;
        auto it = std::find_if(series.begin(), series.end(), [&](const auto& s) { return s.first == r.scheme; });
        if (it == series.end()) {
          series.push_back({r.scheme, {}});
          it = series.end() - 1;
        }
        it->second.push_back({r.value, metric == "ber" ? r.ber : r.nmse_db});
      }
      const bool log_y = metric == "ber";
      const std::string path = (fs::path(dir) / (axis + "_" + metric + ".svg")).string();
      std::ofstream out(path);
      if (!out) throw ConfigError("cannot write " + path);
      out << svg_line_chart(metric == "ber" ? "Bit error rate" : "Channel NMSE", axis,
                            metric == "ber" ? "BER" : "NMSE (dB)", series, log_y);
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace leoipac
