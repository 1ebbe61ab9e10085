#pragma once

#include "wca/model.hpp"
#include "wca/objective.hpp"
#include "wca/tensor.hpp"

namespace wca {

struct ProjectionConfig {
    double gamma = 5.0;  // l2 radius for each classifier row
    double tau = 5.0;    // max allowed singular value of Sigma
};

/// Closed-form projection onto the l2 ball of radius gamma:
/// u / max(1, |u|_2 / gamma).
Tensor project_row_l2(const Tensor& u, double gamma);

/// Eigendecompose a symmetric matrix, clip eigenvalues into [0, tau],
/// reconstruct. Output is symmetric PSD with spectral norm <= tau.
Tensor clip_spectrum(const Tensor& sigma, double tau);

/// Projected subgradient update: plain step on extractor weights and bias,
/// classifier rows projected onto l2 balls, and the noise path refactored as
///   Y = L - lr * grad_L,  Sigma = clip_spectrum(Y^T Y, tau),  L = cholesky(Sigma).
/// A 1e-12 diagonal jitter before the Cholesky keeps rank-deficient clips
/// factorable.
void projected_update(StochasticClassifier& model, const ParamGrads& grads, double lr,
                      const ProjectionConfig& cfg, const TrainMask& mask = {});

}  // namespace wca
