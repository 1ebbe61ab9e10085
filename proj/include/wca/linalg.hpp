#pragma once

#include <stdexcept>

#include "wca/tensor.hpp"

namespace wca {

struct factorization_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// True when |a_ij - a_ji| <= tol for all i, j.
bool is_symmetric(const Tensor& a, double tol = 1e-10);

/// Lower-triangular L with L * L^T = sigma. sigma must be symmetric
/// (tolerance 1e-10) and positive semi-definite; a pivot below -1e-10 throws
/// factorization_error. Rank-deficient inputs get zero columns.
Tensor cholesky(const Tensor& sigma);

struct EigResult {
    Tensor values;   // [d], sorted descending
    Tensor vectors;  // [d x d], column i pairs with values[i]
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// sigma = V * diag(values) * V^T with V orthonormal.
EigResult sym_eig(const Tensor& sigma);

/// Largest absolute eigenvalue of a symmetric matrix.
double spectral_norm_sym(const Tensor& a);

}  // namespace wca
