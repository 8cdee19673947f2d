#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nashseek {

// Minimal deterministic SVG line plot: enough for trajectory and payoff
// figures without an external plotting dependency.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void add_series(std::string name, std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size() || x.empty())
      throw std::invalid_argument("svg plot: series needs matching nonempty x/y");
    series_.push_back({std::move(name), std::move(x), std::move(y)});
  }

  // Dashed horizontal reference line.
  void add_reference(double y, std::string label) {
    references_.push_back({y, std::move(label)});
  }

  void write(const std::string& path) const {
    if (series_.empty()) throw std::invalid_argument("svg plot: no series");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("svg plot: cannot open " + path);
    f << render();
    if (!f) throw std::runtime_error("svg plot: write failed: " + path);
  }

  std::string render() const {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series_) {
      for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
      for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
    }
    for (const auto& r : references_) {
      ymin = std::min(ymin, r.y);
      ymax = std::max(ymax, r.y);
    }
    if (xmax == xmin) { xmax += 1.0; xmin -= 1.0; }
    if (ymax == ymin) { ymax += 1.0; ymin -= 1.0; }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const double w = 840, h = 560, ml = 72, mr = 24, mt = 40, mb = 56;
    const double pw = w - ml - mr, ph = h - mt - mb;
    auto X = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto Y = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
       << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"16\">" << title_ << "</text>\n";

    // axes + ticks
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\""
       << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(xmin, xmax)) {
      const double px = X(t);
      os << "<line x1=\"" << px << "\" y1=\"" << mt + ph << "\" x2=\"" << px << "\" y2=\""
         << mt + ph + 5 << "\" stroke=\"black\"/>\n";
      os << "<text x=\"" << px << "\" y=\"" << mt + ph + 20
         << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
         << tick_label(t) << "</text>\n";
    }
    for (double t : ticks(ymin, ymax)) {
      const double py = Y(t);
      os << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\""
         << py << "\" stroke=\"black\"/>\n";
      os << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
         << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">"
         << tick_label(t) << "</text>\n";
    }
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
       << x_label_ << "</text>\n";
    os << "<text x=\"18\" y=\"" << mt + ph / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
          "transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">" << y_label_ << "</text>\n";

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b"};
    for (const auto& r : references_) {
      os << "<line x1=\"" << ml << "\" y1=\"" << Y(r.y) << "\" x2=\"" << ml + pw
         << "\" y2=\"" << Y(r.y)
         << "\" stroke=\"#555555\" stroke-dasharray=\"6 4\"/>\n";
      if (!r.label.empty())
        os << "<text x=\"" << ml + pw - 4 << "\" y=\"" << Y(r.y) - 5
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" "
              "fill=\"#555555\">" << r.label << "</text>\n";
    }

    for (std::size_t i = 0; i < series_.size(); ++i) {
      const auto& s = series_[i];
      // downsample long series with a uniform stride; plots stay deterministic
      const std::size_t stride = std::max<std::size_t>(1, s.x.size() / 2048);
      os << "<polyline fill=\"none\" stroke=\"" << palette[i % 6]
         << "\" stroke-width=\"1.2\" points=\"";
      for (std::size_t k = 0; k < s.x.size(); k += stride)
        os << X(s.x[k]) << ',' << Y(s.y[k]) << ' ';
      if ((s.x.size() - 1) % stride != 0)
        os << X(s.x.back()) << ',' << Y(s.y.back());
      os << "\"/>\n";
      os << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 18 + 16 * static_cast<double>(i)
         << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << palette[i % 6]
         << "\">" << s.name << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
  }

 private:
  struct Series {
    std::string name;
    std::vector<double> x, y;
  };
  struct Reference {
    double y;
    std::string label;
  };

  static std::vector<double> ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    if (raw / mag >= 5.0)
      step = 5.0 * mag;
    else if (raw / mag >= 2.0)
      step = 2.0 * mag;
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
      out.push_back(t);
    return out;
  }

  static std::string tick_label(double v) {
    std::ostringstream os;
    os << (std::abs(v) < 1e-12 ? 0.0 : v);
    return os.str();
  }

  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
  std::vector<Reference> references_;
};

}  // namespace nashseek
