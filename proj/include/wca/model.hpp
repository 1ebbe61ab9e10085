#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wca/rng.hpp"
#include "wca/tape.hpp"
#include "wca/tensor.hpp"

namespace wca {

/// Feature extractor f(x): an MLP with relu hidden activations and a linear
/// final (bottleneck) layer. An empty layer list is the identity map, which
/// is how the linear-SVM experiments run on PCA features directly.
struct MlpExtractor {
    std::vector<Tensor> weights;  // layer l maps [in] -> [out], stored [out x in]
    std::vector<Tensor> biases;   // [out]

    std::size_t num_layers() const { return weights.size(); }
};

/// Constraint family for the noise factor. Full learns the whole lower
/// triangle; Diagonal pins the off-diagonal to zero (axis-aligned noise, the
/// ablation variant); Spherical learns a single scale (sigma^2 I, the strict
/// isotropic model the linear bound study compares against).
enum class NoiseShape { Full, Diagonal, Spherical };

/// Linear classification head with injected Gaussian noise z ~ N(0, L L^T).
struct NoisyHead {
    Tensor W;  // [C x d], row i is the weight vector of class i
    Tensor b;  // [C]
    Tensor L;  // [d x d] lower-triangular Cholesky factor of the noise covariance
    NoiseShape shape = NoiseShape::Full;

    std::size_t num_classes() const { return W.rows(); }
    std::size_t feature_dim() const { return W.cols(); }
    Tensor covariance() const;  // L * L^T
};

struct StochasticClassifier {
    MlpExtractor extractor;
    NoisyHead head;

    std::size_t num_classes() const { return head.num_classes(); }
    std::size_t feature_dim() const { return head.feature_dim(); }
    std::size_t input_dim() const;
};

struct ForwardMode {
    bool stochastic = false;
    int n_samples = 1;

    static ForwardMode deterministic() { return {false, 1}; }
    static ForwardMode sample(int n = 1);
};

/// Random init. layer_dims runs input -> hidden... -> d (empty tail beyond the
/// input dim means identity extractor with d = input_dim). Requires d >= C.
StochasticClassifier make_model(const std::vector<std::size_t>& layer_dims, std::size_t num_classes,
                                Rng& rng, double l_init = 0.1,
                                NoiseShape shape = NoiseShape::Full);

/// Re-establishes the head invariants: strict upper triangle of L zeroed,
/// plus the off-diagonal for Diagonal heads and the equal-diagonal projection
/// for Spherical ones.
void mask_noise_factor(NoisyHead& head);

Tensor features(const StochasticClassifier& model, const Tensor& x);  // [d]

/// One reparameterized draw z = L * u, u ~ N(0, I).
Tensor sample_noise(const NoisyHead& head, Rng& rng);

/// Logits for one example. Deterministic mode is exactly W f(x) + b; a
/// stochastic mode adds one noise draw per sample and averages the logits.
Tensor forward(const StochasticClassifier& model, const Tensor& x, const ForwardMode& mode, Rng& rng);

/// Binary margin y * h(x), y in {-1, +1}. Contract error on multi-class heads.
double margin(const StochasticClassifier& model, const Tensor& x, int y, const ForwardMode& mode, Rng& rng);

/// Margin of a logit vector: y * h for a single-output head, otherwise
/// logit(y) - max over the other logits.
double logits_margin(const Tensor& logits, int label);

/// Predicted label: argmax class id (first index on ties), or sign for a
/// single-output binary head (h >= 0 maps to +1).
int predict_label(const Tensor& logits);

/// Tape graph of the model over a batch, for gradients.
struct GraphNodes {
    NodeId x = kNoNode;  // [n x D] input leaf
    std::vector<NodeId> ext_w, ext_b;
    NodeId w = kNoNode, b = kNoNode, l = kNoNode;
    NodeId noise_u = kNoNode;  // [n x d] frozen standard-normal draws, kNoNode if deterministic
    NodeId logits = kNoNode;   // [n x C]
};

/// Records the forward pass on the tape. noise_u == nullptr gives the
/// deterministic path; otherwise logits use f(x) + U L^T row-wise.
GraphNodes build_forward(Tape& tape, const StochasticClassifier& model, const Tensor& x_batch,
                         const Tensor* noise_u);

// Checkpoint container: versioned text, bit-exact round trip.
void save_checkpoint(const StochasticClassifier& model, const std::string& path);
StochasticClassifier load_checkpoint(const std::string& path);

}  // namespace wca
