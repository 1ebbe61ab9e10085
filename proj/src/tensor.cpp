#include "wca/tensor.hpp"

#include <cmath>
#include <sstream>

namespace wca {

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

Tensor Tensor::row(std::size_t r) const {
    require_rank2("row");
    std::size_t c = shape_[1];
    std::vector<double> out(c);
    for (std::size_t j = 0; j < c; ++j) out[j] = data_[r * c + j];
    return Tensor::vec(std::move(out));
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << "x";
        os << shape_[i];
    }
    os << "]";
    return os.str();
}

static void check_rank2(const Tensor& t, const char* who) {
    if (t.rank() != 2) throw std::invalid_argument(std::string(who) + ": rank-2 tensor required, got " + t.shape_str());
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_rank2(a, "matmul");
    check_rank2(b, "matmul");
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions differ, " + a.shape_str() + " vs " + b.shape_str());
    std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t l = 0; l < k; ++l) {
            double av = pa[i * k + l];
            if (av == 0.0) continue;
            const double* brow = pb + l * n;
            double* orow = po + i * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    check_rank2(a, "matmul_nt");
    check_rank2(b, "matmul_nt");
    if (a.cols() != b.cols())
        throw std::invalid_argument("matmul_nt: inner dimensions differ, " + a.shape_str() + " vs " + b.shape_str());
    std::size_t m = a.rows(), k = a.cols(), n = b.rows();
    Tensor out({m, n});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = pa + i * k;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = pb + j * k;
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += arow[l] * brow[l];
            po[i * n + j] = s;
        }
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    check_rank2(a, "transpose");
    std::size_t m = a.rows(), n = a.cols();
    Tensor out({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.at(j, i) = a.at(i, j);
    return out;
}

Tensor matvec(const Tensor& a, const Tensor& v) {
    check_rank2(a, "matvec");
    if (v.rank() != 1 || v.size() != a.cols())
        throw std::invalid_argument("matvec: vector size mismatch, " + a.shape_str() + " vs " + v.shape_str());
    std::size_t m = a.rows(), n = a.cols();
    Tensor out({m});
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        const double* arow = a.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) s += arow[j] * v[j];
        out[i] = s;
    }
    return out;
}

static void check_same_shape(const Tensor& a, const Tensor& b, const char* who) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(who) + ": shape mismatch, " + a.shape_str() + " vs " + b.shape_str());
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "hadamard");
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    return out;
}

Tensor scale(const Tensor& a, double c) {
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
    return out;
}

Tensor identity(std::size_t d) {
    Tensor out({d, d});
    for (std::size_t i = 0; i < d; ++i) out.at(i, i) = 1.0;
    return out;
}

double dot(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm1(const Tensor& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i]);
    return s;
}

double norm2(const Tensor& a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Tensor& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i]));
    return s;
}

double frobenius(const Tensor& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * a[i];
    return std::sqrt(s);
}

double frobenius_dist(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "frobenius_dist");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double max_abs(const Tensor& a) { return norm_inf(a); }

}  // namespace wca
