// Copyright (c) 2026 The fairbench Authors. All Rights Reserved
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

#include "fairbench/render.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <vector>

namespace fairbench {

namespace {

using nlohmann::json;

constexpr int kCell = 56;
constexpr int kMargin = 110;

std::string Escape(const std::string& s) {
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

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Rounds on the magnitude so v and -v print as mirror images ("0.000" has no
// sign).
std::string Label(double v) {
  if (!std::isfinite(v)) return "n/a";
  const double r = std::round(std::abs(v) * 1000.0);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", r / 1000.0);
  return (r != 0.0 && v < 0 ? "-" : "") + std::string(buf);
}

// Diverging white -> red (positive) / blue (negative).
std::string Color(double v, double scale) {
  if (!std::isfinite(v) || scale <= 0) return "#eeeeee";
  const double t = std::clamp(std::abs(v) / scale, 0.0, 1.0);
  const int fade = static_cast<int>(std::lround(255 * (1.0 - t)));
  char buf[8];
  if (v >= 0) {
    std::snprintf(buf, sizeof buf, "#ff%02x%02x", fade, fade);
  } else {
    std::snprintf(buf, sizeof buf, "#%02x%02xff", fade, fade);
  }
  return buf;
}

double Value(const json& v) { return v.is_number() ? v.get<double>() : NAN; }

void Panel(const std::string& title, const json& gap, int y0, std::string& out) {
  const auto levels = gap["levels"].get<std::vector<std::string>>();
  const json& values = gap["values"];
  double scale = 0.0;
  for (const auto& row : values) {
    for (const auto& v : row) {
      if (v.is_number()) scale = std::max(scale, std::abs(v.get<double>()));
    }
  }
  out += "<g class=\"panel\" transform=\"translate(0," + std::to_string(y0) + ")\">\n";
  out += "<text x=\"10\" y=\"20\" font-size=\"14\">" + Escape(title) + "</text>\n";
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const int pos = kMargin + static_cast<int>(i) * kCell;
    out += "<text class=\"row-label\" x=\"" + std::to_string(kMargin - 6) + "\" y=\"" +
           std::to_string(pos + kCell / 2 + 4) + "\" text-anchor=\"end\" font-size=\"11\">" +
           Escape(levels[i]) + "</text>\n";
    out += "<text class=\"col-label\" x=\"" + std::to_string(pos + kCell / 2) + "\" y=\"" +
           std::to_string(kMargin - 8) + "\" text-anchor=\"middle\" font-size=\"11\">" +
           Escape(levels[i]) + "</text>\n";
  }
  for (std::size_t i = 0; i < levels.size(); ++i) {
    for (std::size_t j = 0; j < levels.size(); ++j) {
      const double v = Value(values[i][j]);
      const int x = kMargin + static_cast<int>(j) * kCell;
      const int y = kMargin + static_cast<int>(i) * kCell;
      out += "<rect class=\"cell\" data-row=\"" + std::to_string(i) + "\" data-col=\"" +
             std::to_string(j) + "\" x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
             "\" width=\"" + std::to_string(kCell) + "\" height=\"" + std::to_string(kCell) +
             "\" fill=\"" + Color(v, scale) + "\" stroke=\"#999999\"/>\n";
      out += "<text class=\"value\" data-row=\"" + std::to_string(i) + "\" data-col=\"" +
             std::to_string(j) + "\" x=\"" + std::to_string(x + kCell / 2) + "\" y=\"" +
             std::to_string(y + kCell / 2 + 4) + "\" text-anchor=\"middle\" font-size=\"11\">" +
             Label(v) + "</text>\n";
    }
  }
  out += "</g>\n";
}

std::string Document(int width, int height, const std::string& body) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
         " " + std::to_string(height) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n" +
         body + "</svg>\n";
}

const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                          "#edc948", "#b07aa1", "#ff9da7", "#9c755f"};

}  // namespace

std::string RenderGapSvg(const json& report, const std::string& attribute) {
  if (!report.contains("models")) return "";
  std::string body;
  int y = 0;
  int width = 0;
  for (const auto& [model, m] : report["models"].items()) {
    if (!m.contains("gaps") || !m["gaps"].contains(attribute)) continue;
    for (const auto& [metric, gap] : m["gaps"][attribute].items()) {
      const int n = static_cast<int>(gap["levels"].size());
      Panel(model + ": " + metric + " gap by " + attribute, gap, y, body);
      y += kMargin + n * kCell + 20;
      width = std::max(width, kMargin + n * kCell + 20);
    }
  }
  if (body.empty()) return "";
  return Document(width, y, body);
}

std::string RenderAnovaSvg(const json& report) {
  struct Bar {
    std::string label;
    std::vector<std::pair<std::string, double>> parts;
  };
  std::vector<Bar> bars;
  std::vector<std::string> terms;
  auto collect = [&](const std::string& model, const json& m) {
    if (!m.contains("anova")) return;
    for (const auto& [cls, fit] : m["anova"].items()) {
      Bar bar{model + " " + cls, {}};
      for (const auto& t : fit["terms"]) {
        const auto term = t["term"].get<std::string>();
        bar.parts.emplace_back(term, Value(t["eta_squared"]));
        if (std::find(terms.begin(), terms.end(), term) == terms.end()) terms.push_back(term);
      }
      bars.push_back(std::move(bar));
    }
  };
  if (report.contains("models")) {
    for (const auto& [model, m] : report["models"].items()) collect(model, m);
  }
  if (report.contains("pooled")) collect("pooled", report["pooled"]);
  if (bars.empty()) return "";

  double top = 0.0;
  for (const auto& b : bars) {
    double sum = 0.0;
    for (const auto& [term, v] : b.parts) sum += std::isfinite(v) ? v : 0.0;
    top = std::max(top, sum);
  }
  if (top <= 0) top = 1.0;
  const int plot_h = 300;
  const int bar_w = 48;
  const int gap = 24;
  const int x0 = 70;
  const int y0 = 40;
  std::string body = "<text x=\"10\" y=\"20\" font-size=\"14\">eta squared by term</text>\n";
  body += "<text x=\"10\" y=\"" + std::to_string(y0 + 4) + "\" font-size=\"10\">" + Num(top) +
          "</text>\n<text x=\"10\" y=\"" + std::to_string(y0 + plot_h) +
          "\" font-size=\"10\">0</text>\n";
  for (std::size_t b = 0; b < bars.size(); ++b) {
    const int x = x0 + static_cast<int>(b) * (bar_w + gap);
    double acc = 0.0;
    for (const auto& [term, v] : bars[b].parts) {
      if (!std::isfinite(v) || v <= 0) continue;
      const std::size_t ti = std::find(terms.begin(), terms.end(), term) - terms.begin();
      const double y_top = y0 + plot_h * (1.0 - (acc + v) / top);
      const double h = plot_h * v / top;
      char buf[256];
      std::snprintf(buf, sizeof buf,
                    "<rect class=\"segment\" data-term=\"%s\" x=\"%d\" y=\"%.2f\" width=\"%d\" "
                    "height=\"%.2f\" fill=\"%s\"/>\n",
                    Escape(term).c_str(), x, y_top, bar_w, h, kPalette[ti % 9]);
      body += buf;
      acc += v;
    }
    body += "<text x=\"" + std::to_string(x + bar_w / 2) + "\" y=\"" +
            std::to_string(y0 + plot_h + 16) + "\" text-anchor=\"middle\" font-size=\"10\">" +
            Escape(bars[b].label) + "</text>\n";
  }
  const int legend_x = x0 + static_cast<int>(bars.size()) * (bar_w + gap) + 20;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const int y = y0 + static_cast<int>(t) * 18;
    body += "<rect x=\"" + std::to_string(legend_x) + "\" y=\"" + std::to_string(y) +
            "\" width=\"12\" height=\"12\" fill=\"" + kPalette[t % 9] + "\"/>\n";
    body += "<text x=\"" + std::to_string(legend_x + 18) + "\" y=\"" + std::to_string(y + 10) +
            "\" font-size=\"11\">" + Escape(terms[t]) + "</text>\n";
  }
  return Document(legend_x + 140, y0 + plot_h + 40, body);
}

std::map<std::string, std::string> RenderReport(const json& report) {
  std::map<std::string, std::string> files;
  std::set<std::string> attributes;
  if (report.contains("models")) {
    for (const auto& [model, m] : report["models"].items()) {
      if (!m.contains("gaps")) continue;
      for (const auto& [attr, g] : m["gaps"].items()) attributes.insert(attr);
    }
  }
  for (const auto& attr : attributes) files["gaps_" + attr + ".svg"] = RenderGapSvg(report, attr);
  if (auto svg = RenderAnovaSvg(report); !svg.empty()) files["anova.svg"] = svg;
  return files;
}

}  // namespace fairbench
