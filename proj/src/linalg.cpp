#include "wca/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace wca {

bool is_symmetric(const Tensor& a, double tol) {
    if (a.rank() != 2 || a.rows() != a.cols()) return false;
    std::size_t d = a.rows();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j)
            if (std::abs(a.at(i, j) - a.at(j, i)) > tol) return false;
    return true;
}

Tensor cholesky(const Tensor& sigma) {
    if (sigma.rank() != 2 || sigma.rows() != sigma.cols())
        throw std::invalid_argument("cholesky: square matrix required, got " + sigma.shape_str());
    if (!is_symmetric(sigma))
        throw factorization_error("cholesky: matrix not symmetric within 1e-10");

    std::size_t d = sigma.rows();
    Tensor l({d, d});
    for (std::size_t j = 0; j < d; ++j) {
        double s = sigma.at(j, j);
        for (std::size_t k = 0; k < j; ++k) s -= l.at(j, k) * l.at(j, k);
        if (s < -1e-10)
            throw factorization_error("cholesky: negative pivot " + std::to_string(s) +
                                      " at column " + std::to_string(j) + ", matrix not PSD");
        double pivot = s > 0.0 ? std::sqrt(s) : 0.0;
        l.at(j, j) = pivot;
        for (std::size_t i = j + 1; i < d; ++i) {
            if (pivot == 0.0) {
                l.at(i, j) = 0.0;
                continue;
            }
            double t = sigma.at(i, j);
            for (std::size_t k = 0; k < j; ++k) t -= l.at(i, k) * l.at(j, k);
            l.at(i, j) = t / pivot;
        }
    }
    return l;
}

EigResult sym_eig(const Tensor& sigma) {
    if (sigma.rank() != 2 || sigma.rows() != sigma.cols())
        throw std::invalid_argument("sym_eig: square matrix required, got " + sigma.shape_str());
    if (!is_symmetric(sigma))
        throw std::invalid_argument("sym_eig: matrix not symmetric within 1e-10");

    std::size_t d = sigma.rows();
    Tensor a = sigma;
    Tensor v = identity(d);

    auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j) s += a.at(i, j) * a.at(i, j);
        return std::sqrt(2.0 * s);
    };

    double scale = frobenius(a);
    double stop = std::max(1e-300, 1e-14 * std::max(1.0, scale));
    const int max_sweeps = 60;

    for (int sweep = 0; sweep < max_sweeps && off_norm() > stop; ++sweep) {
        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                double apq = a.at(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                double app = a.at(p, p), aqq = a.at(q, q);
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                for (std::size_t k = 0; k < d; ++k) {
                    double akp = a.at(k, p), akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    double apk = a.at(p, k), aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    double vkp = v.at(k, p), vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a.at(i, i) > a.at(j, j); });

    EigResult res{Tensor({d}), Tensor({d, d})};
    for (std::size_t j = 0; j < d; ++j) {
        res.values[j] = a.at(order[j], order[j]);
        for (std::size_t i = 0; i < d; ++i) res.vectors.at(i, j) = v.at(i, order[j]);
    }
    return res;
}

double spectral_norm_sym(const Tensor& a) {
    EigResult e = sym_eig(a);
    double m = 0.0;
    for (std::size_t i = 0; i < e.values.size(); ++i) m = std::max(m, std::abs(e.values[i]));
    return m;
}

}  // namespace wca
