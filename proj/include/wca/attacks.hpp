#pragma once

#include <functional>
#include <vector>

#include "wca/model.hpp"
#include "wca/rng.hpp"
#include "wca/tensor.hpp"

namespace wca {

enum class NormKind { Linf, L2, L0 };

/// Objective the white-box adversary ascends. Margin (the default) keeps a
/// usable gradient even where hinge saturates, and reduces to the same signed
/// direction wherever the hinge is active.
enum class AttackLoss { Margin, Xent, Hinge };

struct AttackConfig {
    double epsilon = 8.0 / 255.0;
    NormKind norm = NormKind::Linf;
    int steps = 10;
    double step_size = 0.0;  // <= 0 means epsilon / 10
    int restarts = 1;
    int eot_samples = 50;
    double box_lo = 0.0, box_hi = 1.0;
    bool targeted = false;    // untargeted by default
    bool random_init = true;  // PGD: uniform init inside the epsilon ball
    AttackLoss loss = AttackLoss::Margin;
};

struct AttackResult {
    Tensor x_adv;
    bool success = false;
    double margin_before = 0.0;
    double margin_after = 0.0;
    long queries = 0;  // stochastic forward (and backward) passes consumed
};

/// Mean over n reparameterized draws of the input gradient of the attack
/// objective. With zero noise this equals the single deterministic gradient.
Tensor eot_gradient(const StochasticClassifier& model, const Tensor& x, int y, int n, Rng& rng,
                    AttackLoss loss = AttackLoss::Margin, bool targeted = false);

AttackResult fgsm(const StochasticClassifier& model, const Tensor& x, int y,
                  const AttackConfig& cfg, Rng& rng);

/// Random restarts, signed (l-inf) or normalized (l2) steps, re-projection to
/// the epsilon ball and box every iteration; worst margin over restarts wins,
/// first occurrence on ties.
AttackResult pgd(const StochasticClassifier& model, const Tensor& x, int y,
                 const AttackConfig& cfg, Rng& rng);

struct CwConfig {
    double kappa = 0.0;      // confidence
    double c0 = 1e-3;        // initial trade-off constant
    int binary_steps = 9;
    int iters = 1000;
    double lr = 5e-4;
    int eot_samples = 50;
    double box_lo = 0.0, box_hi = 1.0;
};

/// l2 minimum-distortion attack: tanh change of variables keeps iterates in
/// the box, gradient descent on |delta|^2 + c * max(margin, -kappa), binary
/// search over c. Returns the smallest-norm success, or the last iterate as
/// best effort.
AttackResult cw(const StochasticClassifier& model, const Tensor& x, int y, const CwConfig& cfg,
                Rng& rng);

/// Black-box attacks only see a query function x -> logits.
using QueryFn = std::function<Tensor(const Tensor&)>;

/// Query closure over a model with its own draw stream; mode defaults to one
/// noise sample per query.
QueryFn make_query(const StochasticClassifier& model, std::uint64_t seed,
                   ForwardMode mode = ForwardMode::sample(1));

struct OnePixelConfig {
    int n_pixels = 1;
    std::size_t population = 50;  // paper runs 400
    int k_max = 200;              // paper runs 1000
    double crossover = 0.7;
    double mutation = 0.5;
    double box_lo = 0.0, box_hi = 1.0;
};

/// Differential evolution over (pixel index, new value) tuples; energy is the
/// queried true-class confidence. Stops at k_max or when
/// sqrt(Var(E)) <= |mean(E)| / 100.
AttackResult one_pixel(const QueryFn& query, const Tensor& x, int y, const OnePixelConfig& cfg,
                       Rng& rng);

struct SquareConfig {
    double epsilon = 8.0 / 255.0;
    int budget = 200;          // query budget
    double p0 = 0.3;           // initial fraction of pixels covered by the square
    std::size_t img_h = 0, img_w = 0;  // 0: infer a square image from the input size
    double box_lo = 0.0, box_hi = 1.0;
};

/// Random-search l-inf attack: propose +/-epsilon constant patches on squares
/// whose side shrinks on a fixed schedule; keep proposals that lower the
/// margin.
AttackResult square_attack(const QueryFn& query, const Tensor& x, int y, const SquareConfig& cfg,
                           Rng& rng);

}  // namespace wca
