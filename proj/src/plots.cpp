#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "portastat/io.hpp"
#include "portastat/report.hpp"

namespace portastat {
namespace {

constexpr const char* kLowColor = "#1f77b4";   // blue: trained on / drawn from low-use
constexpr const char* kHighColor = "#ff7f0e";  // orange: high-use

const char* color_of(Population p) { return p == Population::Low ? kLowColor : kHighColor; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Minimal SVG document with a single plotting frame mapping data to pixels.
class SvgCanvas {
 public:
  SvgCanvas(double width, double height, std::string_view title) : width_(width), height_(height) {
    body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
             "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\" font-family=\"sans-serif\">\n";
    body_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    text(width / 2, 22, title, 14, "middle");
  }

  void rect(double x, double y, double w, double h, const char* fill, double opacity = 1.0) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(std::max(w, 0.0)) + "\" height=\"" +
             num(std::max(h, 0.0)) + "\" fill=\"" + fill + "\" fill-opacity=\"" + num(opacity) + "\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const char* stroke = "black", double width = 1.0) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
             "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
  }

  void circle(double cx, double cy, double r, const char* fill) {
    body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) + "\" fill=\"" + fill + "\"/>\n";
  }

  void text(double x, double y, std::string_view s, int size = 11, const char* anchor = "start") {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) +
             "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
  }

  void whisker(double x, double y_lo, double y_hi, double half_width = 5.0) {
    line(x, y_lo, x, y_hi);
    line(x - half_width, y_lo, x + half_width, y_lo);
    line(x - half_width, y_hi, x + half_width, y_hi);
  }

  void legend(double x, double y) {
    rect(x, y - 9, 10, 10, kLowColor);
    text(x + 14, y, "low-use (Q)", 10);
    rect(x + 95, y - 9, 10, 10, kHighColor);
    text(x + 109, y, "high-use (P)", 10);
  }

  std::string finish() const { return body_ + "</svg>\n"; }
  double width() const { return width_; }
  double height() const { return height_; }

 private:
  double width_;
  double height_;
  std::string body_;
};

/// Vertical axis mapping values in [lo, hi] to the pixel band [top, bottom].
struct Axis {
  double lo, hi, top, bottom;

  double operator()(double v) const { return bottom - (std::clamp(v, lo, hi) - lo) / (hi - lo) * (bottom - top); }

  void draw(SvgCanvas& svg, double left, double right, int ticks, std::string_view label) const {
    svg.line(left, top, left, bottom);
    for (int t = 0; t <= ticks; ++t) {
      const double v = lo + (hi - lo) * t / ticks;
      svg.line(left - 4, (*this)(v), left, (*this)(v));
      svg.line(left, (*this)(v), right, (*this)(v), "#dddddd", 0.5);
      svg.text(left - 6, (*this)(v) + 4, num(v), 10, "end");
    }
    svg.text(14, (top + bottom) / 2, label, 11, "start");
  }
};

std::string file_name(std::string_view figure, FeatureKind kind, std::string_view trainpop) {
  return std::string(figure) + "_" + std::string(to_string(kind)) + "_" + std::string(trainpop) + ".svg";
}

std::string auc_plot(const GeneralizationMatrix& m) {
  SvgCanvas svg(420, 320, std::string(to_string(m.feature_kind)) + "-based models: AUC by test population");
  const Axis axis{0.0, 1.0, 40, 260};
  axis.draw(svg, 60, 400, 5, "AUC");
  svg.line(60, 260, 400, 260);
  double group_x = 90;
  for (auto test : kPopulations) {
    double x = group_x;
    for (auto train : kPopulations) {
      const auto& cell = m.at(train, test);
      svg.rect(x, axis(cell.auc), 55, 260 - axis(cell.auc), color_of(train));
      if (cell.interval) svg.whisker(x + 27.5, axis(cell.interval->lo), axis(cell.interval->hi));
      const double label_y = cell.interval ? std::min(axis(cell.auc), axis(cell.interval->hi)) : axis(cell.auc);
      svg.text(x + 27.5, label_y - 4, num(cell.auc), 9, "middle");
      x += 60;
    }
    svg.text(group_x + 57.5, 278, "test: " + std::string(to_string(test)) + "-use", 11, "middle");
    group_x += 170;
  }
  svg.legend(120, 305);
  return svg.finish();
}

std::string ks_plot(FeatureKind kind, const std::vector<const CovariateStabilityResult*>& results) {
  double top_value = 0.1;
  for (const auto* r : results) top_value = std::max(top_value, r->ks.statistic);
  top_value = std::min(1.0, std::ceil(top_value * 10.0) / 10.0);
  SvgCanvas svg(420, 320, std::string(to_string(kind)) + "-based models: covariate stability (KS)");
  const Axis axis{0.0, top_value, 40, 260};
  axis.draw(svg, 60, 400, 5, "KS");
  svg.line(60, 260, 400, 260);
  double group_x = 90;
  for (int label : {0, 1}) {
    double x = group_x;
    for (auto train : kPopulations) {
      for (const auto* r : results) {
        if (r->label != label || r->model_id != std::string(to_string(kind)) + "-" + std::string(to_string(train))) {
          continue;
        }
        svg.rect(x, axis(r->ks.statistic), 55, 260 - axis(r->ks.statistic), color_of(train));
        svg.text(x + 27.5, axis(r->ks.statistic) - 4, num(r->ks.statistic), 9, "middle");
      }
      x += 60;
    }
    svg.text(group_x + 57.5, 278, "y = " + std::to_string(label), 11, "middle");
    group_x += 170;
  }
  svg.legend(120, 305);
  return svg.finish();
}

std::string summary_plot(FeatureKind kind, const std::vector<const StabilitySummary*>& summaries) {
  double extent = 0.05;
  for (const auto* s : summaries) {
    extent = std::max(extent, std::abs(s->value));
    if (s->bootstrap_interval) {
      extent = std::max({extent, std::abs(s->bootstrap_interval->lo), std::abs(s->bootstrap_interval->hi)});
    }
  }
  extent = std::ceil(extent * 20.0) / 20.0;
  SvgCanvas svg(320, 320, std::string(to_string(kind)) + ": predictive stability summary");
  const Axis axis{-extent, extent, 40, 260};
  axis.draw(svg, 60, 300, 4, "E_low - E_high");
  const double zero = axis(0.0);
  svg.line(60, zero, 300, zero, "black", 1.5);
  double x = 100;
  for (auto train : kPopulations) {
    for (const auto* s : summaries) {
      if (s->model_id != std::string(to_string(kind)) + "-" + std::string(to_string(train))) continue;
      const double y = axis(s->value);
      svg.rect(x, std::min(y, zero), 60, std::abs(zero - y), color_of(train));
      if (s->bootstrap_interval) svg.whisker(x + 30, axis(s->bootstrap_interval->lo), axis(s->bootstrap_interval->hi));
      svg.text(x + 30, 278, "trained " + std::string(to_string(train)), 10, "middle");
    }
    x += 100;
  }
  svg.legend(60, 305);
  return svg.finish();
}

std::string distribution_plot(const std::string& model_id, const std::vector<const ScoreHistogram*>& hists) {
  SvgCanvas svg(560, 320, model_id + ": score distribution given label");
  double panel_left = 60;
  for (int label : {0, 1}) {
    double peak = 0.05;
    for (const auto* h : hists) {
      if (h->label != label || h->total() == 0) continue;
      for (auto c : h->counts) peak = std::max(peak, static_cast<double>(c) / static_cast<double>(h->total()));
    }
    const Axis axis{0.0, std::ceil(peak * 20.0) / 20.0, 40, 260};
    const double width = 220;
    axis.draw(svg, panel_left, panel_left + width, 4, label == 0 ? "fraction" : "");
    svg.line(panel_left, 260, panel_left + width, 260);
    const double bin_w = width / static_cast<double>(kHistogramBins);
    for (auto pop : kPopulations) {
      for (const auto* h : hists) {
        if (h->label != label || h->population != pop || h->total() == 0) continue;
        for (std::size_t b = 0; b < kHistogramBins; ++b) {
          const double frac = static_cast<double>(h->counts[b]) / static_cast<double>(h->total());
          svg.rect(panel_left + static_cast<double>(b) * bin_w, axis(frac), bin_w, 260 - axis(frac), color_of(pop), 0.5);
        }
      }
    }
    svg.text(panel_left, 275, "0", 10, "middle");
    svg.text(panel_left + width, 275, "1", 10, "middle");
    svg.text(panel_left + width / 2, 285, "score | y = " + std::to_string(label), 11, "middle");
    panel_left += 270;
  }
  svg.legend(180, 310);
  return svg.finish();
}

std::string curve_plot(const StabilityCurve& curve) {
  double extent = 0.1;
  for (const auto& b : curve.bins) {
    if (b.diff) extent = std::max(extent, std::abs(*b.diff));
    if (b.diff_interval) extent = std::max({extent, std::abs(b.diff_interval->lo), std::abs(b.diff_interval->hi)});
  }
  extent = std::min(1.0, std::ceil(extent * 10.0) / 10.0);
  SvgCanvas svg(480, 320, curve.model_id + ": E_low[y|s] - E_high[y|s] by score quintile");
  const Axis axis{-extent, extent, 40, 260};
  axis.draw(svg, 60, 460, 4, "diff");
  svg.line(60, axis(0.0), 460, axis(0.0), "black", 1.5);
  const double step = 400.0 / static_cast<double>(kStabilityBins);
  for (std::size_t b = 0; b < kStabilityBins; ++b) {
    const double cx = 60 + step * (static_cast<double>(b) + 0.5);
    const auto& bin = curve.bins[b];
    if (bin.diff_interval) svg.whisker(cx, axis(bin.diff_interval->lo), axis(bin.diff_interval->hi));
    if (bin.diff) {
      svg.circle(cx, axis(*bin.diff), 4, "black");
    } else {
      svg.text(cx, axis(0.0) - 6, "n/a", 9, "middle");
    }
    svg.text(cx, 278, "[" + num(curve.bin_edges[b]) + ", " + num(curve.bin_edges[b + 1]) + (b + 1 == kStabilityBins ? "]" : ")"),
             9, "middle");
    svg.text(cx, 292, "n=" + std::to_string(bin.n_q) + "/" + std::to_string(bin.n_p), 9, "middle");
  }
  svg.text(260, 310, "score quintile (n low/high)", 11, "middle");
  return svg.finish();
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const RunReport& report, const std::filesystem::path& out_dir) {
  try {
    std::filesystem::create_directories(out_dir);
  } catch (const std::filesystem::filesystem_error& e) {
    fail(ErrorKind::IoFailure, "cannot create plot directory " + out_dir.string() + ": " + e.what());
  }
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& svg) {
    const auto path = out_dir / name;
    io::write_file_atomic(path, svg);
    written.push_back(path);
  };

  for (const auto& m : report.matrices) emit(file_name("auc", m.feature_kind, "all"), auc_plot(m));

  for (auto kind : kFeatureKinds) {
    const std::string prefix = std::string(to_string(kind)) + "-";
    std::vector<const CovariateStabilityResult*> ks;
    for (const auto& r : report.covariate_stability) {
      if (r.model_id.rfind(prefix, 0) == 0) ks.push_back(&r);
    }
    if (!ks.empty()) emit(file_name("ks", kind, "all"), ks_plot(kind, ks));
  }

  for (auto kind : kFeatureKinds) {
    const std::string prefix = std::string(to_string(kind)) + "-";
    std::vector<const StabilitySummary*> sums;
    for (const auto& s : report.summaries) {
      if (s.model_id.rfind(prefix, 0) == 0) sums.push_back(&s);
    }
    if (!sums.empty()) emit(file_name("pssummary", kind, "all"), summary_plot(kind, sums));
  }

  for (auto kind : kFeatureKinds) {
    for (auto train : kPopulations) {
      const std::string id = std::string(to_string(kind)) + "-" + std::string(to_string(train));
      std::vector<const ScoreHistogram*> hists;
      for (const auto& h : report.score_histograms) {
        if (h.model_id == id) hists.push_back(&h);
      }
      if (!hists.empty()) emit(file_name("scoredist", kind, to_string(train)), distribution_plot(id, hists));
    }
  }

  for (auto kind : kFeatureKinds) {
    for (auto train : kPopulations) {
      const std::string id = std::string(to_string(kind)) + "-" + std::string(to_string(train));
      for (const auto& c : report.curves) {
        if (c.model_id == id) emit(file_name("pscurve", kind, to_string(train)), curve_plot(c));
      }
    }
  }
  return written;
}

}  // namespace portastat
