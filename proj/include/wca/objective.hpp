#pragma once

#include <vector>

#include "wca/model.hpp"
#include "wca/tape.hpp"

namespace wca {

enum class LossKind { SoftmaxXent, Hinge };

struct ObjectiveConfig {
    LossKind loss = LossKind::SoftmaxXent;
    double lambda = 1e-4;     // l2 penalty weight, grid default
    bool wca_enabled = true;
    double wca_coeff = 1.0;   // optional weight on the alignment term; 1 matches the objective
    bool penalize_bias = false;
    double ln_floor = 1e-30;  // quadratic forms at or below this are a training fault
};

struct LossParts {
    double classification = 0.0;
    double wca = 0.0;
    double penalty = 0.0;
    double total = 0.0;
};

/// Alignment term: sum_i ln(w_i^T L L^T w_i). Throws std::domain_error when a
/// quadratic form falls to the floor (degenerate noise for that class).
double wca_term(const Tensor& w, const Tensor& l, double ln_floor = 1e-30);

struct LossGraph {
    Tape tape;
    GraphNodes nodes;
    NodeId loss = kNoNode;
    LossParts parts;
};

/// Full training objective over a batch:
///   mean classification loss - wca_coeff * L_WCA + lambda * (|W|_F^2 + |L|_F^2).
/// Labels are class ids for softmax-cross-entropy, or {-1,+1} for hinge on a
/// single-output head. noise_u == nullptr trains the deterministic path.
LossGraph build_loss(const StochasticClassifier& model, const Tensor& x_batch,
                     const std::vector<int>& labels, const ObjectiveConfig& cfg,
                     const Tensor* noise_u);

struct ParamGrads {
    std::vector<Tensor> ext_w, ext_b;
    Tensor W, b, L;
};

/// Reads parameter gradients off a tape after backward().
ParamGrads collect_grads(const Tape& tape, const GraphNodes& nodes);

struct TrainMask {
    bool extractor = true;
    bool head = true;   // W and b
    bool noise = true;  // L
};

/// theta <- theta - lr * grad, then re-masks L. Non-finite gradients abort
/// with diagnostics.
void sgd_step(StochasticClassifier& model, const ParamGrads& grads, double lr,
              const TrainMask& mask = {});

}  // namespace wca
