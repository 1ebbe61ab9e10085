#include "wca/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace wca {

double std_normal_cdf(double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("std_normal_cdf: t must be finite");
    return 0.5 * std::erfc(-t / M_SQRT2);
}

static double noise_std_along(const Tensor& w, const Tensor& l) {
    // w^T Sigma w = |L^T w|^2
    Tensor ltw = matvec(transpose(l), w);
    double q = dot(ltw, ltw);
    if (q <= 0.0)
        throw std::domain_error("theory: w^T Sigma w must be > 0 (got " + std::to_string(q) + ")");
    return std::sqrt(q);
}

static void check_label(int y) {
    if (y != 1 && y != -1) throw std::invalid_argument("theory: label must be +1 or -1");
}

double clean_misclass_prob(const Tensor& w, double b, const Tensor& l, const Tensor& fx, int y) {
    check_label(y);
    double s = noise_std_along(w, l);
    double m = static_cast<double>(y) * (dot(w, fx) + b);
    return std_normal_cdf(-m / s);
}

double adv_misclass_upper(const Tensor& w, double b, const Tensor& l, const Tensor& fx, int y,
                          double delta) {
    check_label(y);
    if (delta < 0.0) throw std::invalid_argument("adv_misclass_upper: delta must be >= 0");
    double s = noise_std_along(w, l);
    double m = static_cast<double>(y) * (dot(w, fx) + b);
    return std_normal_cdf((-m + delta) / s);
}

double gap_bound(const Tensor& w, const Tensor& l, double delta) {
    if (delta < 0.0) throw std::invalid_argument("gap_bound: delta must be >= 0");
    double s = noise_std_along(w, l);
    return delta / (std::sqrt(2.0 * M_PI) * s);
}

double linear_delta_inf(const Tensor& w, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("linear_delta_inf: epsilon must be >= 0");
    return epsilon * norm1(w);
}

}  // namespace wca
