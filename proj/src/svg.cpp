#include "rediffuse/svg.hpp"

#include <cstdio>
#include <stdexcept>

#include "rediffuse/io.hpp"

namespace rediffuse {

namespace {

constexpr double kLeft = 60.0, kTop = 20.0, kSide = 400.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};

std::string fx(double fpr) { return format_double(kLeft + kSide * fpr); }
std::string fy(double tpr) { return format_double(kTop + kSide * (1.0 - tpr)); }

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string render_roc_svg(
    const std::vector<std::pair<std::string, RocSummary>>& summaries) {
  if (summaries.empty())
    throw std::invalid_argument("roc plot: nothing to draw");

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"660\" "
       "height=\"470\" viewBox=\"0 0 660 470\">\n";
  s += "<rect width=\"660\" height=\"470\" fill=\"white\"/>\n";

  for (double v : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    s += "<line x1=\"" + fx(v) + "\" y1=\"" + fy(0) + "\" x2=\"" + fx(v) +
         "\" y2=\"" + fy(1) + "\" stroke=\"#dddddd\"/>\n";
    s += "<line x1=\"" + fx(0) + "\" y1=\"" + fy(v) + "\" x2=\"" + fx(1) +
         "\" y2=\"" + fy(v) + "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + fx(v) + "\" y=\"" + format_double(kTop + kSide + 18) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + format_double(v) +
         "</text>\n";
    s += "<text x=\"" + format_double(kLeft - 8) + "\" y=\"" + fy(v) +
         "\" font-size=\"12\" text-anchor=\"end\" "
         "dominant-baseline=\"middle\">" +
         format_double(v) + "</text>\n";
  }
  s += "<rect x=\"" + fx(0) + "\" y=\"" + fy(1) + "\" width=\"" +
       format_double(kSide) + "\" height=\"" + format_double(kSide) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + fx(0.5) + "\" y=\"" + format_double(kTop + kSide + 38) +
       "\" font-size=\"13\" text-anchor=\"middle\">false positive "
       "rate</text>\n";
  s += "<text x=\"16\" y=\"" + fy(0.5) +
       "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fy(0.5) + ")\">true positive rate</text>\n";

  s += "<line x1=\"" + fx(0) + "\" y1=\"" + fy(0) + "\" x2=\"" + fx(1) +
       "\" y2=\"" + fy(1) +
       "\" stroke=\"#999999\" stroke-dasharray=\"6 4\"/>\n";

  for (size_t i = 0; i < summaries.size(); ++i) {
    const char* color = kPalette[i % (sizeof kPalette / sizeof *kPalette)];
    std::string pts;
    for (const RocPoint& p : summaries[i].second.points) {
      if (!pts.empty()) pts += " ";
      pts += fx(p.fpr) + "," + fy(p.tpr);
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";

    double ly = kTop + 16 + 20.0 * double(i);
    s += "<line x1=\"486\" y1=\"" + format_double(ly - 4) +
         "\" x2=\"514\" y2=\"" + format_double(ly - 4) + "\" stroke=\"" +
         color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"520\" y=\"" + format_double(ly) +
         "\" font-size=\"12\">" + summaries[i].first + " (AUC " +
         fixed3(summaries[i].second.auc) + ")</text>\n";
  }

  s += "</svg>\n";
  return s;
}

void plot_roc_svg(
    const std::vector<std::pair<std::string, RocSummary>>& summaries,
    const std::filesystem::path& path) {
  write_text_file(path, render_roc_svg(summaries));
}

}  // namespace rediffuse
