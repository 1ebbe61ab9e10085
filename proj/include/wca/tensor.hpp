#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace wca {

/// Dense row-major array of doubles. Everything in this codebase is rank 1
/// (vectors) or rank 2 (matrices).
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(numel(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (numel(shape_) != data_.size())
            throw std::invalid_argument("Tensor: shape/data size mismatch");
    }

    static Tensor vec(std::vector<double> values) {
        std::size_t n = values.size();
        return Tensor({n}, std::move(values));
    }

    static Tensor mat(std::size_t r, std::size_t c, std::vector<double> values) {
        return Tensor({r, c}, std::move(values));
    }

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

    static Tensor full(std::vector<std::size_t> shape, double v) {
        Tensor t(std::move(shape));
        for (auto& x : t.data_) x = v;
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }

    std::size_t rows() const {
        require_rank2("rows");
        return shape_[0];
    }
    std::size_t cols() const {
        require_rank2("cols");
        return shape_[1];
    }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t r, std::size_t c) {
        require_rank2("at");
        return data_[r * shape_[1] + c];
    }
    double at(std::size_t r, std::size_t c) const {
        require_rank2("at");
        return data_[r * shape_[1] + c];
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const;

    /// One row of a rank-2 tensor as a fresh rank-1 tensor.
    Tensor row(std::size_t r) const;

    std::string shape_str() const;

private:
    static std::size_t numel(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (auto d : s) n *= d;
        return s.empty() ? 0 : n;
    }
    void require_rank2(const char* what) const {
        if (shape_.size() != 2)
            throw std::invalid_argument(std::string("Tensor::") + what + " requires rank 2");
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// Dense kernels. All shape mismatches throw std::invalid_argument.
Tensor matmul(const Tensor& a, const Tensor& b);     // [m x k] * [k x n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // [m x k] * [n x k]^T
Tensor transpose(const Tensor& a);
Tensor matvec(const Tensor& a, const Tensor& v);     // [m x n] * [n]
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor identity(std::size_t d);

double dot(const Tensor& a, const Tensor& b);
double norm1(const Tensor& a);
double norm2(const Tensor& a);
double norm_inf(const Tensor& a);
double frobenius(const Tensor& a);
double frobenius_dist(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& a);

}  // namespace wca
