#include "neurokinect/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "neurokinect/errors.hpp"

namespace nk {

namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void take(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double span() const { return hi > lo ? hi - lo : 1.0; }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(5);
  os << v;
  return os.str();
}

void polyline(std::ostringstream& os, const std::vector<double>& xs,
              const std::vector<double>& ys, const std::string& color) {
  os << "<polyline fill=\"none\" stroke=\"" << color
     << "\" stroke-width=\"1.2\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    os << fmt(xs[i]) << ',' << fmt(ys[i]) << ' ';
  }
  os << "\"/>\n";
}

}  // namespace

void write_svg_lines(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series, int width, int height) {
  const double ml = 60, mr = 20, mt = 34, mb = 42;
  Range rx, ry;
  for (const auto& s : series) {
    for (double v : s.x) rx.take(v);
    for (double v : s.y) ry.take(v);
  }
  if (!std::isfinite(rx.lo)) {
    rx = Range{0.0, 1.0};
    ry = Range{0.0, 1.0};
  }
  auto px = [&](double v) { return ml + (v - rx.lo) / rx.span() * (width - ml - mr); };
  auto py = [&](double v) { return height - mb - (v - ry.lo) / ry.span() * (height - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
     << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  // axes
  os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
     << "\" y2=\"" << height - mb << "\" stroke=\"#444\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
     << height - mb << "\" stroke=\"#444\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 10
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
     << x_label << "</text>\n";
  os << "<text x=\"14\" y=\"" << height / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\" "
     << "transform=\"rotate(-90 14 " << height / 2 << ")\">" << y_label << "</text>\n";
  // tick labels at the extremes
  os << "<text x=\"" << ml << "\" y=\"" << height - mb + 14
     << "\" font-family=\"sans-serif\" font-size=\"10\">" << fmt(rx.lo) << "</text>\n";
  os << "<text x=\"" << width - mr << "\" y=\"" << height - mb + 14
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
     << fmt(rx.hi) << "</text>\n";
  os << "<text x=\"" << ml - 4 << "\" y=\"" << height - mb
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
     << fmt(ry.lo) << "</text>\n";
  os << "<text x=\"" << ml - 4 << "\" y=\"" << mt + 4
     << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
     << fmt(ry.hi) << "</text>\n";

  double legend_x = ml + 8;
  for (const auto& s : series) {
    std::vector<double> xs, ys;
    xs.reserve(s.x.size());
    ys.reserve(s.y.size());
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xs.push_back(px(s.x[i]));
      ys.push_back(py(s.y[i]));
    }
    polyline(os, xs, ys, s.color);
    if (!s.label.empty()) {
      os << "<rect x=\"" << legend_x << "\" y=\"" << mt + 2 << "\" width=\"10\" "
         << "height=\"3\" fill=\"" << s.color << "\"/>\n";
      os << "<text x=\"" << legend_x + 14 << "\" y=\"" << mt + 7
         << "\" font-family=\"sans-serif\" font-size=\"10\">" << s.label << "</text>\n";
      legend_x += 14.0 + 7.0 * static_cast<double>(s.label.size()) + 12.0;
    }
  }
  os << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << os.str();
}

void write_svg_trajectories(const std::filesystem::path& path, const std::string& title,
                            const Tensor& measured, const Tensor& predicted,
                            int width, int height) {
  // Isometric projection u = x - z*cos(30), v = y - z*sin(30), each
  // trajectory in its own half.
  auto project = [](const Tensor& kin, std::vector<double>& u, std::vector<double>& v) {
    const int t_len = kin.cols();
    for (int t = 0; t < t_len; ++t) {
      const double x = kin.at(0, t), y = kin.at(1, t), z = kin.at(2, t);
      u.push_back(x - 0.5 * z);
      v.push_back(y - 0.35 * z);
    }
  };
  std::vector<double> mu, mv, pu, pv;
  project(measured, mu, mv);
  project(predicted, pu, pv);

  Range ru, rv;
  for (double v : mu) ru.take(v);
  for (double v : pu) ru.take(v);
  for (double v : mv) rv.take(v);
  for (double v : pv) rv.take(v);

  const double half = width / 2.0;
  const double m = 40;
  auto make_px = [&](double offset) {
    return [&, offset](double v) {
      return offset + m + (v - ru.lo) / ru.span() * (half - 2 * m);
    };
  };
  auto py = [&](double v) {
    return height - m - (v - rv.lo) / rv.span() * (height - 2.0 * m - 20.0);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  os << "<text x=\"" << width / 4 << "\" y=\"36\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"12\">measured</text>\n";
  os << "<text x=\"" << 3 * width / 4 << "\" y=\"36\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"12\">predicted</text>\n";

  {
    auto px = make_px(0.0);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      xs.push_back(px(mu[i]));
      ys.push_back(py(mv[i]));
    }
    polyline(os, xs, ys, "#1f77b4");
  }
  {
    auto px = make_px(half);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < pu.size(); ++i) {
      xs.push_back(px(pu[i]));
      ys.push_back(py(pv[i]));
    }
    polyline(os, xs, ys, "#d62728");
  }
  os << "<line x1=\"" << half << "\" y1=\"28\" x2=\"" << half << "\" y2=\""
     << height - 10 << "\" stroke=\"#ccc\"/>\n";
  os << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << os.str();
}

}  // namespace nk
