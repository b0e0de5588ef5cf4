#include "fetilab/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace fetilab {

namespace {

std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

ReportRow make_report_row(const ExperimentResult& result, const std::string& label) {
  ReportRow row;
  row.label = label;
  row.hash = result.config.hash();
  row.iterations = result.iterations;
  const double r0 = result.history.empty() ? 0.0 : result.history.initial().global_residual;
  row.log10_initial_residual = r0 > 0.0 ? std::log10(r0) : -INFINITY;
  row.converged = result.converged;
  row.validated = result.validated;
  row.oracle_error = result.oracle_error;
  return row;
}

std::string history_csv(const ResidualHistory& history) {
  std::string out = "iter,interface_residual,global_residual,seconds\n";
  for (const auto& e : history.entries)
    out += std::to_string(e.iteration) + "," + fmt("%.17g", e.interface_residual) + "," +
           fmt("%.17g", e.global_residual) + "," + fmt("%.6f", e.seconds) + "\n";
  return out;
}

std::string convergence_svg(const std::vector<Curve>& curves, const std::string& title) {
  const double width = 720, height = 480, left = 80, right = 220, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;

  int max_iter = 1;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& c : curves)
    for (const auto& e : c.history.entries) {
      max_iter = std::max(max_iter, e.iteration);
      if (e.global_residual > 0.0 && std::isfinite(e.global_residual)) {
        lo = std::min(lo, std::log10(e.global_residual));
        hi = std::max(hi, std::log10(e.global_residual));
      }
    }
  if (!std::isfinite(lo)) lo = -1.0, hi = 0.0;
  lo = std::floor(lo);
  hi = std::ceil(hi);
  if (hi <= lo) hi = lo + 1.0;

  auto px = [&](double it) { return left + pw * it / max_iter; };
  auto py = [&](double lg) { return top + ph * (hi - lg) / (hi - lo); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", width) + "\" height=\"" +
                    fmt("%.0f", height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt("%.1f", left) + "\" y=\"24\" font-size=\"14\">" + xml_escape(title) + "</text>\n";
  svg += "<rect x=\"" + fmt("%.1f", left) + "\" y=\"" + fmt("%.1f", top) + "\" width=\"" + fmt("%.1f", pw) +
         "\" height=\"" + fmt("%.1f", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  const int step = std::max(1, static_cast<int>(std::ceil((hi - lo) / 10.0)));
  for (int d = static_cast<int>(lo); d <= static_cast<int>(hi); d += step) {
    const double y = py(d);
    svg += "<line x1=\"" + fmt("%.1f", left) + "\" y1=\"" + fmt("%.1f", y) + "\" x2=\"" + fmt("%.1f", left + pw) +
           "\" y2=\"" + fmt("%.1f", y) + "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + fmt("%.1f", left - 8) + "\" y=\"" + fmt("%.1f", y + 4) + "\" text-anchor=\"end\">1e" +
           std::to_string(d) + "</text>\n";
  }
  const int xstep = std::max(1, max_iter / 10);
  for (int it = 0; it <= max_iter; it += xstep)
    svg += "<text x=\"" + fmt("%.1f", px(it)) + "\" y=\"" + fmt("%.1f", top + ph + 18) + "\" text-anchor=\"middle\">" +
           std::to_string(it) + "</text>\n";
  svg += "<text x=\"" + fmt("%.1f", left + pw / 2) + "\" y=\"" + fmt("%.1f", height - 16) +
         "\" text-anchor=\"middle\">iteration</text>\n";
  svg += "<text x=\"20\" y=\"" + fmt("%.1f", top + ph / 2) + "\" transform=\"rotate(-90 20 " + fmt("%.1f", top + ph / 2) +
         ")\" text-anchor=\"middle\">global residual</text>\n";

  for (std::size_t k = 0; k < curves.size(); ++k) {
    const char* colour = kPalette[k % std::size(kPalette)];
    std::string points;
    for (const auto& e : curves[k].history.entries) {
      if (!(e.global_residual > 0.0) || !std::isfinite(e.global_residual)) continue;
      points += fmt("%.2f", px(e.iteration)) + "," + fmt("%.2f", py(std::log10(e.global_residual))) + " ";
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    const double ly = top + 16 + 18 * static_cast<double>(k);
    svg += "<line x1=\"" + fmt("%.1f", left + pw + 12) + "\" y1=\"" + fmt("%.1f", ly - 4) + "\" x2=\"" +
           fmt("%.1f", left + pw + 32) + "\" y2=\"" + fmt("%.1f", ly - 4) + "\" stroke=\"" + colour +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt("%.1f", left + pw + 38) + "\" y=\"" + fmt("%.1f", ly) + "\">" +
           xml_escape(curves[k].label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string report_table(const std::vector<ReportRow>& rows) {
  std::size_t wl = 13;
  for (const auto& r : rows) wl = std::max(wl, r.label.size());
  auto pad = [](std::string s, std::size_t w, bool right_align) {
    if (s.size() >= w) return s;
    return right_align ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
  };
  std::string out = pad("configuration", wl, false) + "  " + pad("hash", 16, false) + "  " + pad("iterations", 10, true) +
                    "  " + pad("log10 r0", 9, true) + "  " + pad("status", 9, false) + "\n";
  out += std::string(wl + 2 + 16 + 2 + 10 + 2 + 9 + 2 + 9, '-') + "\n";
  for (const auto& r : rows) {
    const std::string status = r.validated ? "ok" : (r.converged ? "mismatch" : "no-conv");
    out += pad(r.label, wl, false) + "  " + pad(r.hash, 16, false) + "  " + pad(std::to_string(r.iterations), 10, true) +
           "  " + pad(fmt("%.3f", r.log10_initial_residual), 9, true) + "  " + pad(status, 9, false) + "\n";
  }
  return out;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out = "configuration,hash,iterations,log10_initial_residual,converged,validated,oracle_error\n";
  for (const auto& r : rows)
    out += r.label + "," + r.hash + "," + std::to_string(r.iterations) + "," + fmt("%.6f", r.log10_initial_residual) +
           "," + (r.converged ? "1" : "0") + "," + (r.validated ? "1" : "0") + "," + fmt("%.3e", r.oracle_error) + "\n";
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write '" + path + "'");
  out << content;
  if (!out) throw OutputError("write failed for '" + path + "'");
}

}  // namespace fetilab
