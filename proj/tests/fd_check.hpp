#pragma once

// Finite-difference oracle for gradient checks. Evaluates the forward pass
// only, so it stays independent of the backward implementation it verifies.

#include <cmath>
#include <functional>
#include <vector>

namespace fdcheck {

inline std::vector<double> central_diff(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> theta,
    double h = 1e-5) {
    std::vector<double> g(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        double orig = theta[i];
        theta[i] = orig + h;
        double fp = f(theta);
        theta[i] = orig - h;
        double fm = f(theta);
        theta[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, rel_err(a[i], b[i]));
    return m;
}

}  // namespace fdcheck
