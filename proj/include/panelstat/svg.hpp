#pragma once

// Deterministic SVG rendering of the four summary charts, driven entirely
// by the serialized analysis document so charts can be re-rendered from
// analysis.json without recomputing anything. Also hosts the structural
// checker used by tests and by the report command to sanity-check output.

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace panelstat {

namespace svgdetail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string escape_text(const std::string& s) {
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

// Minimal element-soup builder; every element is written closed.
class Canvas {
 public:
  Canvas(double width, double height) : width_(width), height_(height) {
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
         << num(width) << "\" height=\"" << num(height)
         << "\" viewBox=\"0 0 " << num(width) << " " << num(height)
         << "\">\n";
    out_ << "<rect x=\"0\" y=\"0\" width=\"" << num(width)
         << "\" height=\"" << num(height) << "\" fill=\"#ffffff\"/>\n";
  }

  void rect(double x, double y, double w, double h,
            const std::string& fill, const std::string& extra = "") {
    out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\""
         << num(w) << "\" height=\"" << num(h) << "\" fill=\"" << fill
         << "\"" << (extra.empty() ? "" : " " + extra) << "/>\n";
  }

  void line(double x1, double y1, double x2, double y2,
            const std::string& stroke, double stroke_width = 1.0) {
    out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1)
         << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
         << "\" stroke=\"" << stroke << "\" stroke-width=\""
         << num(stroke_width) << "\"/>\n";
  }

  void circle(double cx, double cy, double r, const std::string& fill,
              const std::string& extra = "") {
    out_ << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(cy)
         << "\" r=\"" << num(r) << "\" fill=\"" << fill << "\""
         << (extra.empty() ? "" : " " + extra) << "/>\n";
  }

  void text(double x, double y, const std::string& content,
            const std::string& anchor = "start", double size = 12.0) {
    out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y)
         << "\" font-family=\"sans-serif\" font-size=\"" << num(size)
         << "\" text-anchor=\"" << anchor << "\">" << escape_text(content)
         << "</text>\n";
  }

  double width() const { return width_; }
  double height() const { return height_; }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  double width_, height_;
  std::ostringstream out_;
};

struct Frame {
  double x0, y0, x1, y1;  // plot area in canvas coordinates (y0 = top)
  double xmin, xmax, ymin, ymax;

  double px(double x) const {
    return x0 + (x - xmin) / (xmax - xmin) * (x1 - x0);
  }
  double py(double y) const {
    return y1 - (y - ymin) / (ymax - ymin) * (y1 - y0);
  }
};

inline void draw_axes(Canvas& canvas, const Frame& f,
                      const std::string& xlabel,
                      const std::string& ylabel) {
  canvas.line(f.x0, f.y1, f.x1, f.y1, "#333333");
  canvas.line(f.x0, f.y0, f.x0, f.y1, "#333333");
  canvas.text((f.x0 + f.x1) / 2.0, f.y1 + 32.0, xlabel, "middle");
  canvas.text(f.x0 - 40.0, f.y0 - 8.0, ylabel, "start");
  // Min/max tick labels on both axes.
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", f.xmin);
  canvas.text(f.x0, f.y1 + 16.0, buf, "middle", 10.0);
  std::snprintf(buf, sizeof(buf), "%g", f.xmax);
  canvas.text(f.x1, f.y1 + 16.0, buf, "middle", 10.0);
  std::snprintf(buf, sizeof(buf), "%g", f.ymin);
  canvas.text(f.x0 - 6.0, f.y1 + 4.0, buf, "end", 10.0);
  std::snprintf(buf, sizeof(buf), "%g", f.ymax);
  canvas.text(f.x0 - 6.0, f.y0 + 4.0, buf, "end", 10.0);
}

}  // namespace svgdetail

// ---------------------------------------------------------------------------
// Charts

namespace svgdetail {

inline std::string render_delta_histogram(const nlohmann::json& analysis,
                                          const std::string& metric) {
  const auto& paired = analysis.at("paired");
  if (!paired.contains(metric)) {
    throw std::runtime_error("nothing to plot: no paired block for " +
                             metric);
  }
  std::vector<double> deltas;
  for (const auto& d : paired.at(metric).at("deltas")) {
    deltas.push_back(d.at("delta").get<double>());
  }
  if (deltas.empty()) throw std::runtime_error("nothing to plot");

  double lo = deltas.front(), hi = deltas.front();
  for (double d : deltas) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  std::vector<std::size_t> bins;
  double width;
  if (lo == hi) {
    bins = {deltas.size()};
    width = 1.0;
    lo -= 0.5;
    hi += 0.5;
  } else {
    bins.assign(20, 0);
    width = (hi - lo) / 20.0;
    for (double d : deltas) {
      std::size_t idx = static_cast<std::size_t>((d - lo) / width);
      if (idx >= bins.size()) idx = bins.size() - 1;
      ++bins[idx];
    }
  }
  std::size_t peak = 1;
  for (std::size_t b : bins) peak = std::max(peak, b);

  Canvas canvas(720, 480);
  Frame f{70, 50, 680, 420, lo, hi, 0.0, static_cast<double>(peak)};
  canvas.text(360, 28, "Paired delta " + metric + " (agentic - zero-shot)",
              "middle", 16.0);
  const double bin_span = (hi - lo) / static_cast<double>(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i] == 0) continue;
    const double bx0 = f.px(lo + bin_span * static_cast<double>(i));
    const double bx1 = f.px(lo + bin_span * static_cast<double>(i + 1));
    const double by = f.py(static_cast<double>(bins[i]));
    canvas.rect(bx0, by, bx1 - bx0, f.y1 - by, "#4477aa",
                "stroke=\"#223355\"");
  }
  if (lo < 0.0 && hi > 0.0) {
    canvas.line(f.px(0.0), f.y0, f.px(0.0), f.y1, "#888888");
  }
  draw_axes(canvas, f, "delta " + metric, "questions");
  return canvas.finish();
}

inline std::string render_mr_scatter(const nlohmann::json& analysis) {
  const auto& rows = analysis.at("per_question");
  if (rows.empty()) throw std::runtime_error("nothing to plot");
  const auto& cfg = analysis.at("config_echo");
  const double m_min = cfg.at("anomaly_m_min").get<double>();
  const double r_max = cfg.at("anomaly_r_max").get<double>();

  Canvas canvas(720, 480);
  Frame f{70, 50, 680, 420, 0.0, 1.0, 0.0, 1.0};
  canvas.text(360, 28, "Consensus vs robustness", "middle", 16.0);
  // Shaded anomaly zone: high consensus, low robustness.
  canvas.rect(f.px(m_min), f.py(r_max), f.px(1.0) - f.px(m_min),
              f.py(0.0) - f.py(r_max), "#f4c7c3",
              "fill-opacity=\"0.6\" class=\"anomaly-zone\"");
  for (const auto& row : rows) {
    const double m = row.at("majority_fraction").get<double>();
    const double r = row.at("robustness").get<double>();
    const bool agentic = row.at("condition").get<std::string>() == "agentic";
    canvas.circle(f.px(m), f.py(r), 3.0,
                  agentic ? "#ee6677" : "#4477aa",
                  "fill-opacity=\"0.7\"");
  }
  // Flag markers on top of the flagged points.
  for (const auto& row : analysis.at("anomalies")) {
    const double m = row.at("majority_fraction").get<double>();
    const double r = row.at("robustness").get<double>();
    canvas.circle(f.px(m), f.py(r), 7.0, "none",
                  "stroke=\"#cc0000\" stroke-width=\"2\" class=\"flag\"");
  }
  canvas.text(90, 60, "zero-shot", "start", 11.0);
  canvas.circle(82, 56, 3.0, "#4477aa");
  canvas.text(90, 76, "agentic", "start", 11.0);
  canvas.circle(82, 72, 3.0, "#ee6677");
  draw_axes(canvas, f, "majority fraction M", "robustness R");
  return canvas.finish();
}

inline std::string render_bin_bars(const nlohmann::json& analysis) {
  const auto& rows = analysis.at("per_question");
  if (rows.empty()) throw std::runtime_error("nothing to plot");
  std::map<std::string, std::map<std::string, double>> counts;
  std::map<std::string, double> totals;
  for (const auto& row : rows) {
    const std::string cond = row.at("condition").get<std::string>();
    counts[cond][row.at("bin").get<std::string>()] += 1.0;
    totals[cond] += 1.0;
  }
  const char* bin_names[3] = {"low", "medium", "high"};
  const char* cond_names[2] = {"zero_shot", "agentic"};
  const char* colors[2] = {"#4477aa", "#ee6677"};

  Canvas canvas(720, 480);
  Frame f{70, 50, 680, 420, 0.0, 3.0, 0.0, 1.0};
  canvas.text(360, 28, "Robustness bin shares by condition", "middle",
              16.0);
  for (int b = 0; b < 3; ++b) {
    for (int c = 0; c < 2; ++c) {
      double share = 0.0;
      if (totals.count(cond_names[c]) && totals[cond_names[c]] > 0.0) {
        share = counts[cond_names[c]][bin_names[b]] / totals[cond_names[c]];
      }
      const double slot = f.px(b + 0.15 + 0.35 * c);
      const double w = f.px(0.32) - f.px(0.0);
      const double top = f.py(share);
      canvas.rect(slot, top, w, f.y1 - top, colors[c],
                  "stroke=\"#333333\"");
    }
    canvas.text(f.px(b + 0.5), f.y1 + 16.0, bin_names[b], "middle", 11.0);
  }
  canvas.text(90, 60, "zero-shot", "start", 11.0);
  canvas.rect(78, 52, 9, 9, colors[0]);
  canvas.text(90, 76, "agentic", "start", 11.0);
  canvas.rect(78, 68, 9, 9, colors[1]);
  draw_axes(canvas, f, "robustness bin", "share of questions");
  return canvas.finish();
}

inline std::string render_severity_bars(const nlohmann::json& analysis) {
  if (!analysis.contains("severity") ||
      !analysis.at("severity").value("present", false)) {
    throw std::runtime_error("nothing to plot: no severity data");
  }
  const auto& strata = analysis.at("severity").at("profile").at("strata");
  const nlohmann::json* pooled = nullptr;
  for (const auto& s : strata) {
    if (s.at("stratum").get<std::string>() == "pooled") pooled = &s;
  }
  if (pooled == nullptr) throw std::runtime_error("nothing to plot");
  const auto& props = pooled->at("proportions");
  const char* levels[3] = {"low", "moderate", "high"};
  const char* colors[3] = {"#66aa55", "#eebb44", "#cc4444"};

  Canvas canvas(720, 480);
  Frame f{70, 50, 680, 420, 0.0, 3.0, 0.0, 1.0};
  canvas.text(360, 28, "Severity of incorrect outputs (pooled)", "middle",
              16.0);
  for (int i = 0; i < 3; ++i) {
    const double share = props.at(levels[i]).get<double>();
    const double bx0 = f.px(i + 0.2);
    const double w = f.px(0.6) - f.px(0.0);
    const double top = f.py(share);
    canvas.rect(bx0, top, w, f.y1 - top, colors[i], "stroke=\"#333333\"");
    canvas.text(f.px(i + 0.5), f.y1 + 16.0, levels[i], "middle", 11.0);
  }
  draw_axes(canvas, f, "aggregate severity", "share of incorrect outputs");
  return canvas.finish();
}

}  // namespace svgdetail

// Renders one chart from the serialized analysis document. Kinds:
// delta_histogram, mr_scatter, bin_bars, severity_bars.
inline std::string render_chart(const nlohmann::json& analysis,
                                const std::string& kind) {
  if (kind == "delta_histogram") {
    return svgdetail::render_delta_histogram(analysis, "H");
  }
  if (kind == "mr_scatter") return svgdetail::render_mr_scatter(analysis);
  if (kind == "bin_bars") return svgdetail::render_bin_bars(analysis);
  if (kind == "severity_bars") {
    return svgdetail::render_severity_bars(analysis);
  }
  throw std::runtime_error("unknown chart kind '" + kind + "'");
}

inline const std::vector<std::string>& chart_kinds() {
  static const std::vector<std::string> kinds = {
      "delta_histogram", "mr_scatter", "bin_bars", "severity_bars"};
  return kinds;
}

// ---------------------------------------------------------------------------
// Structural checker
//
// Validates the structural subset of SVG/XML this project emits: optional
// XML declaration and comments, exactly one root element named svg, all
// tags balanced and properly nested, attributes quoted, no stray '<' or
// malformed '&' entities in text.

inline bool svg_structurally_valid(const std::string& content,
                                   std::string* error = nullptr) {
  auto fail = [error](const std::string& msg) {
    if (error) *error = msg;
    return false;
  };
  std::size_t i = 0;
  const std::size_t n = content.size();
  std::vector<std::string> stack;
  bool root_seen = false;
  bool root_closed = false;

  auto skip_ws = [&]() {
    while (i < n && (content[i] == ' ' || content[i] == '\t' ||
                     content[i] == '\n' || content[i] == '\r')) {
      ++i;
    }
  };

  while (i < n) {
    if (content[i] == '<') {
      if (i + 3 < n && content.compare(i, 4, "<!--") == 0) {
        const std::size_t end = content.find("-->", i + 4);
        if (end == std::string::npos) return fail("unterminated comment");
        i = end + 3;
        continue;
      }
      if (i + 1 < n && content[i + 1] == '?') {
        const std::size_t end = content.find("?>", i + 2);
        if (end == std::string::npos) {
          return fail("unterminated processing instruction");
        }
        i = end + 2;
        continue;
      }
      if (i + 1 < n && content[i + 1] == '!') {
        const std::size_t end = content.find('>', i + 2);
        if (end == std::string::npos) return fail("unterminated doctype");
        i = end + 1;
        continue;
      }
      const bool closing = i + 1 < n && content[i + 1] == '/';
      std::size_t j = i + (closing ? 2 : 1);
      std::size_t name_start = j;
      while (j < n && (std::isalnum(static_cast<unsigned char>(content[j])) ||
                       content[j] == ':' || content[j] == '-' ||
                       content[j] == '_')) {
        ++j;
      }
      if (j == name_start) return fail("empty tag name");
      const std::string name = content.substr(name_start, j - name_start);

      // Scan to the tag end, honoring quoted attribute values.
      bool self_closing = false;
      bool ok = false;
      while (j < n) {
        if (content[j] == '"' || content[j] == '\'') {
          const char quote = content[j];
          ++j;
          while (j < n && content[j] != quote) {
            if (content[j] == '<') return fail("'<' inside attribute value");
            ++j;
          }
          if (j >= n) return fail("unterminated attribute value");
          ++j;
          continue;
        }
        if (content[j] == '>') {
          ok = true;
          break;
        }
        if (content[j] == '/' && j + 1 < n && content[j + 1] == '>') {
          self_closing = true;
          ok = true;
          ++j;
          break;
        }
        if (content[j] == '<') return fail("'<' inside tag");
        ++j;
      }
      if (!ok) return fail("unterminated tag '" + name + "'");
      i = j + 1;

      if (closing) {
        if (self_closing) return fail("closing tag cannot self-close");
        if (stack.empty()) return fail("unmatched closing tag " + name);
        if (stack.back() != name) {
          return fail("mismatched closing tag " + name + ", expected " +
                      stack.back());
        }
        stack.pop_back();
        if (stack.empty()) root_closed = true;
        continue;
      }
      if (root_closed) return fail("content after root element");
      if (stack.empty()) {
        if (root_seen) return fail("multiple root elements");
        if (name != "svg") return fail("root element must be svg");
        root_seen = true;
      }
      if (!self_closing) {
        stack.push_back(name);
      } else if (stack.empty()) {
        root_closed = true;
      }
      continue;
    }
    if (content[i] == '&') {
      std::size_t j = content.find(';', i + 1);
      if (j == std::string::npos || j - i > 10) {
        return fail("malformed entity");
      }
      i = j + 1;
      continue;
    }
    if (content[i] == '>') return fail("stray '>' in text");
    if (!stack.empty() || !root_seen) {
      // Text outside any element: only whitespace allowed before/after.
      if (stack.empty()) {
        skip_ws();
        if (i < n && content[i] != '<') {
          return fail("text outside root element");
        }
        continue;
      }
    } else {
      skip_ws();
      if (i < n && content[i] != '<') {
        return fail("text after root element");
      }
      continue;
    }
    ++i;
  }
  if (!stack.empty()) return fail("unclosed element " + stack.back());
  if (!root_seen) return fail("no root element");
  if (!root_closed) return fail("root element never closed");
  return true;
}

}  // namespace panelstat
