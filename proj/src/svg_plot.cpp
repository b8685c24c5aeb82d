#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "peec/error.hpp"
#include "peec/io.hpp"

namespace peec {
namespace {

constexpr std::size_t kMaxPoints = 1500;
constexpr double kMargin = 42.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

struct Series {
  std::vector<double> xs;
  std::vector<double> ys;
  const char* color;
  const char* name;
};

class Panel {
 public:
  Panel(double x0, double y0, double w, double h, std::string title)
      : x0_(x0), y0_(y0), w_(w), h_(h), title_(std::move(title)) {}

  void add(Series s) {
    for (double v : s.xs) xr_.add(v);
    for (double v : s.ys) yr_.add(v);
    series_.push_back(std::move(s));
  }
  void mark_times(std::vector<double> t) { marks_ = std::move(t); }
  void mark_points(std::vector<std::pair<double, double>> p) { points_ = std::move(p); }

  std::string render() {
    xr_.finish();
    yr_.finish();
    std::string s;
    const double left = x0_ + kMargin;
    const double top = y0_ + 24.0;
    const double right = x0_ + w_ - 10.0;
    const double bottom = y0_ + h_ - 28.0;
    auto px = [&](double v) { return left + (v - xr_.lo) / (xr_.hi - xr_.lo) * (right - left); };
    auto py = [&](double v) { return bottom - (v - yr_.lo) / (yr_.hi - yr_.lo) * (bottom - top); };

    s += "<text x=\"" + num(x0_ + w_ / 2) + "\" y=\"" + num(y0_ + 16) +
         "\" text-anchor=\"middle\" font-size=\"13\">" + title_ + "</text>\n";
    s += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(right - left) +
         "\" height=\"" + num(bottom - top) + "\" fill=\"none\" stroke=\"#444\"/>\n";
    s += "<text x=\"" + num(left) + "\" y=\"" + num(bottom + 14) + "\" font-size=\"10\">" +
         label(xr_.lo) + "</text>\n";
    s += "<text x=\"" + num(right) + "\" y=\"" + num(bottom + 14) +
         "\" font-size=\"10\" text-anchor=\"end\">" + label(xr_.hi) + "</text>\n";
    s += "<text x=\"" + num(left - 4) + "\" y=\"" + num(bottom) +
         "\" font-size=\"10\" text-anchor=\"end\">" + label(yr_.lo) + "</text>\n";
    s += "<text x=\"" + num(left - 4) + "\" y=\"" + num(top + 8) +
         "\" font-size=\"10\" text-anchor=\"end\">" + label(yr_.hi) + "</text>\n";

    for (double t : marks_) {
      s += "<line class=\"obs\" x1=\"" + num(px(t)) + "\" y1=\"" + num(top) + "\" x2=\"" +
           num(px(t)) + "\" y2=\"" + num(bottom) +
           "\" stroke=\"#d33\" stroke-dasharray=\"4,3\"/>\n";
    }
    double legend_y = top + 12;
    for (const auto& ser : series_) {
      const std::size_t stride = std::max<std::size_t>(1, ser.xs.size() / kMaxPoints);
      s += "<polyline fill=\"none\" stroke=\"" + std::string(ser.color) +
           "\" stroke-width=\"1.2\" points=\"";
      for (std::size_t i = 0; i < ser.xs.size(); i += stride) {
        s += num(px(ser.xs[i])) + "," + num(py(ser.ys[i])) + " ";
      }
      if (!ser.xs.empty()) s += num(px(ser.xs.back())) + "," + num(py(ser.ys.back()));
      s += "\"/>\n";
      s += "<text x=\"" + num(right - 4) + "\" y=\"" + num(legend_y) + "\" font-size=\"10\" fill=\"" +
           ser.color + "\" text-anchor=\"end\">" + ser.name + "</text>\n";
      legend_y += 12;
    }
    for (const auto& [x, y] : points_) {
      s += "<circle class=\"obs\" cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) +
           "\" r=\"3\" fill=\"#d33\"/>\n";
    }
    return s;
  }

 private:
  double x0_, y0_, w_, h_;
  std::string title_;
  Range xr_, yr_;
  std::vector<Series> series_;
  std::vector<double> marks_;
  std::vector<std::pair<double, double>> points_;
};

}  // namespace

std::string emit_plot_svg(const TrajectoryRecord& traj, const PlotStyle& style) {
  if (traj.size() == 0) throw Error(ErrorCode::UnsupportedLayout, "empty trajectory");
  const auto n = static_cast<int>(traj.x[0].size());
  int i1 = 0;
  int i2 = 2;
  if (style.pos1 && style.pos2) {
    i1 = *style.pos1;
    i2 = *style.pos2;
    if (i1 < 0 || i2 < 0 || i1 >= n || i2 >= n || i1 == i2) {
      throw Error(ErrorCode::UnsupportedLayout, "position indices out of range");
    }
  } else if (n != 4) {
    throw Error(ErrorCode::UnsupportedLayout,
                "state dimension " + std::to_string(n) + " needs explicit position indices");
  }

  Series plane_x{{}, {}, "#1f5fbf", "x"};
  Series plane_xh{{}, {}, "#e08a00", "x hat"};
  Series comp1{{}, {}, "#1f5fbf", "y1"};
  Series comp2{{}, {}, "#2a9d3a", "y2"};
  Series err{{}, {}, "#7b3fb5", "|x - x hat|"};
  Series dist{{}, {}, "#1f5fbf", "|y|"};
  std::vector<double> obs_times;
  std::vector<std::pair<double, double>> obs_points;
  for (std::size_t r = 0; r < traj.size(); ++r) {
    const Vector& x = traj.x[r];
    const Vector& xh = traj.x_hat[r];
    const double t = traj.times[r];
    plane_x.xs.push_back(x(i1));
    plane_x.ys.push_back(x(i2));
    plane_xh.xs.push_back(xh(i1));
    plane_xh.ys.push_back(xh(i2));
    comp1.xs.push_back(t);
    comp1.ys.push_back(x(i1));
    comp2.xs.push_back(t);
    comp2.ys.push_back(x(i2));
    err.xs.push_back(t);
    err.ys.push_back((x - xh).norm());
    dist.xs.push_back(t);
    dist.ys.push_back(std::hypot(x(i1), x(i2)));
    if (traj.obs_flags[r]) {
      obs_times.push_back(t);
      obs_points.emplace_back(x(i1), x(i2));
    }
  }

  const double w = style.panel_width;
  const double h = style.panel_height;
  Panel a(0, 0, w, h, "(a) relative position");
  a.add(std::move(plane_x));
  a.add(std::move(plane_xh));
  a.mark_points(obs_points);
  Panel b(w, 0, w, h, "(b) position components");
  b.add(std::move(comp1));
  b.add(std::move(comp2));
  b.mark_times(obs_times);
  Panel c(0, h, w, h, "(c) estimation error norm");
  c.add(std::move(err));
  c.mark_times(obs_times);
  Panel d(w, h, w, h, "(d) distance");
  d.add(std::move(dist));
  d.mark_times(obs_times);

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(2 * w) +
                    "\" height=\"" + num(2 * h) + "\" viewBox=\"0 0 " + num(2 * w) + " " +
                    num(2 * h) + "\" font-family=\"sans-serif\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += a.render() + b.render() + c.render() + d.render();
  svg += "</svg>\n";
  return svg;
}

}  // namespace peec
