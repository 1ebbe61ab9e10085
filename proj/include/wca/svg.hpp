#pragma once

#include <string>
#include <utility>
#include <vector>

namespace wca {

/// Hand-rolled SVG markup, enough for line plots and covariance contours.
/// Data coordinates map into a fixed viewport with 10% padding.
class SvgPlot {
public:
    SvgPlot(double width = 640, double height = 480);

    void set_bounds(double xmin, double xmax, double ymin, double ymax);

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                  double stroke_width = 1.5);
    void line(double x1, double y1, double x2, double y2, const std::string& color,
              double stroke_width = 1.5);
    void circle(double x, double y, double radius_px, const std::string& color);
    void text(double x, double y, const std::string& s, const std::string& color = "#333");
    void axes(const std::string& x_label, const std::string& y_label);

    std::string str() const;
    void write_file(const std::string& path) const;

private:
    double px(double x) const;
    double py(double y) const;

    double w_, h_;
    double xmin_ = 0, xmax_ = 1, ymin_ = 0, ymax_ = 1;
    std::string body_;
};

}  // namespace wca
