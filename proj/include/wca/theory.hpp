#pragma once

#include <vector>

#include "wca/tensor.hpp"

namespace wca {

/// Standard normal CDF, absolute error well under 1e-7.
double std_normal_cdf(double t);

/// P(margin < 0) for the stochastic linear head: Phi(-y (w^T fx + b) / sqrt(w^T Sigma w))
/// with Sigma = L L^T. Throws std::domain_error when the noise variance along
/// w is not positive (deterministic limit is excluded by contract).
double clean_misclass_prob(const Tensor& w, double b, const Tensor& l, const Tensor& fx, int y);

/// Upper bound on the attacked misclassification probability given the
/// deterministic-output bound delta: Phi((-y (w^T fx + b) + delta) / sqrt(w^T Sigma w)).
double adv_misclass_upper(const Tensor& w, double b, const Tensor& l, const Tensor& fx, int y,
                          double delta);

/// Adversarial gap bound: delta / sqrt(2 pi w^T Sigma w).
double gap_bound(const Tensor& w, const Tensor& l, double delta);

/// Exact worst-case output change of a linear model under an l-inf budget:
/// epsilon * |w|_1.
double linear_delta_inf(const Tensor& w, double epsilon);

struct BoundRow {
    double epsilon = 0.0;
    double clean_misclass = 0.0;     // mean over examples
    double adv_upper = 0.0;          // mean over examples
    double gap = 0.0;                // mean over examples
    double certified_floor = 0.0;    // 1 - clean_misclass - gap
    double empirical_clean_acc = 0.0;
    double empirical_attacked_acc = 0.0;
};

struct BoundReport {
    std::vector<BoundRow> rows;
};

}  // namespace wca
