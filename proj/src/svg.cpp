#include "wca/svg.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace wca {

static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

SvgPlot::SvgPlot(double width, double height) : w_(width), h_(height) {}

void SvgPlot::set_bounds(double xmin, double xmax, double ymin, double ymax) {
    xmin_ = xmin;
    xmax_ = xmax;
    ymin_ = ymin;
    ymax_ = ymax;
    if (xmax_ <= xmin_) xmax_ = xmin_ + 1.0;
    if (ymax_ <= ymin_) ymax_ = ymin_ + 1.0;
}

double SvgPlot::px(double x) const {
    double pad = 0.1 * w_;
    return pad + (x - xmin_) / (xmax_ - xmin_) * (w_ - 2 * pad);
}

double SvgPlot::py(double y) const {
    double pad = 0.1 * h_;
    return h_ - pad - (y - ymin_) / (ymax_ - ymin_) * (h_ - 2 * pad);
}

void SvgPlot::polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                       double stroke_width) {
    body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
             num(stroke_width) + "\" points=\"";
    for (const auto& [x, y] : pts) body_ += num(px(x)) + "," + num(py(y)) + " ";
    body_ += "\"/>\n";
}

void SvgPlot::line(double x1, double y1, double x2, double y2, const std::string& color,
                   double stroke_width) {
    body_ += "<line x1=\"" + num(px(x1)) + "\" y1=\"" + num(py(y1)) + "\" x2=\"" + num(px(x2)) +
             "\" y2=\"" + num(py(y2)) + "\" stroke=\"" + color + "\" stroke-width=\"" +
             num(stroke_width) + "\"/>\n";
}

void SvgPlot::circle(double x, double y, double radius_px, const std::string& color) {
    body_ += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"" + num(radius_px) +
             "\" fill=\"" + color + "\"/>\n";
}

void SvgPlot::text(double x, double y, const std::string& s, const std::string& color) {
    body_ += "<text x=\"" + num(px(x)) + "\" y=\"" + num(py(y)) + "\" font-size=\"12\" fill=\"" +
             color + "\">" + s + "</text>\n";
}

void SvgPlot::axes(const std::string& x_label, const std::string& y_label) {
    line(xmin_, ymin_, xmax_, ymin_, "#000", 1.0);
    line(xmin_, ymin_, xmin_, ymax_, "#000", 1.0);
    text(xmax_, ymin_, x_label);
    text(xmin_, ymax_, y_label);
}

std::string SvgPlot::str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w_) + "\" height=\"" +
           num(h_) + "\" viewBox=\"0 0 " + num(w_) + " " + num(h_) + "\">\n" + body_ + "</svg>\n";
}

void SvgPlot::write_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("SvgPlot: cannot open " + path);
    os << str();
}

}  // namespace wca
