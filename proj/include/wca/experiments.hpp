#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wca/attacks.hpp"
#include "wca/constraints.hpp"
#include "wca/data.hpp"
#include "wca/model.hpp"
#include "wca/objective.hpp"
#include "wca/theory.hpp"

namespace wca {

enum class AdvTraining { None, Pure, Mixed };

struct TrainOptions {
    ObjectiveConfig objective;
    bool use_constraint = false;  // projected-subgradient regularizer instead of the penalty
    ProjectionConfig projection;
    bool noise = true;  // false trains the deterministic path (no-defense baseline)
    double lr = 1e-2;
    int epochs = 20;
    std::size_t batch = 128;
    std::uint64_t seed = 1;
    TrainMask mask;
    int log_every = 0;  // steps between log rows; 0 logs once per epoch
    AdvTraining adv = AdvTraining::None;
    AttackConfig adv_attack;  // PGD parameters for adversarial training
};

struct TrainLogRow {
    long step = 0;
    LossParts parts;
    double clean_acc = 0.0;  // deterministic accuracy on the training set
};

struct TrainResult {
    std::vector<TrainLogRow> log;
};

TrainResult train(StochasticClassifier& model, const LabeledDataset& ds, const TrainOptions& opt);

/// Grid search over lr x lambda in {1e-1 ... 1e-4} on a deterministic 90/10
/// split; selects by validation accuracy (ties to the first grid point).
struct GridChoice {
    double lr = 0.0, lambda = 0.0;
    double val_acc = 0.0;
};
GridChoice grid_search(const LabeledDataset& ds, const std::vector<std::size_t>& layer_dims,
                       std::size_t num_classes, const TrainOptions& base, NoiseShape shape);

/// Fraction correct; per-example draw streams derived from (seed, index).
double evaluate_accuracy(const StochasticClassifier& model, const LabeledDataset& ds,
                         const ForwardMode& mode, std::uint64_t seed);

struct AttackOutcome {
    double accuracy = 0.0;      // stochastic single-draw accuracy on attacked inputs
    double success_rate = 0.0;  // fraction of examples the attack flips (deterministic margin)
    double mean_margin_before = 0.0;
    double mean_margin_after = 0.0;
    long queries = 0;
};

/// Runs one attack over the first eval_n examples, in parallel, with
/// per-example seeds; evaluation draws are independent of attack draws.
using PerExampleAttack =
    std::function<AttackResult(const Tensor& x, int y, Rng& rng, std::uint64_t example_seed)>;
AttackOutcome run_attack(const StochasticClassifier& model, const LabeledDataset& ds,
                         std::size_t eval_n, std::uint64_t seed, const PerExampleAttack& attack);
AttackOutcome run_attack(const StochasticClassifier& model, const LabeledDataset& ds,
                         std::size_t eval_n, std::uint64_t seed, const PerExampleAttack& attack,
                         const ForwardMode& eval_mode);

struct DetailedAttack {
    std::vector<AttackResult> results;  // per example
    std::vector<char> correct;          // post-attack stochastic evaluation
    AttackOutcome summary;
};

DetailedAttack run_attack_detailed(const StochasticClassifier& model, const LabeledDataset& ds,
                                   std::size_t eval_n, std::uint64_t seed,
                                   const PerExampleAttack& attack, const ForwardMode& eval_mode);

AttackOutcome run_fgsm(const StochasticClassifier& model, const LabeledDataset& ds,
                       std::size_t eval_n, std::uint64_t seed, const AttackConfig& cfg);
AttackOutcome run_pgd(const StochasticClassifier& model, const LabeledDataset& ds,
                      std::size_t eval_n, std::uint64_t seed, const AttackConfig& cfg);

// ---------------------------------------------------------------------------
// Linear-model bound study: PCA features -> hinge+WCA linear head -> epsilon
// sweep of the theory quantities against empirical PGD accuracy.

struct BoundStudyOptions {
    std::vector<double> eps = {0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
    int pgd_steps = 40;
    int pgd_restarts = 5;
    int eot_samples = 50;
    std::size_t eval_n = 1000;
    double box_lo = 0.0, box_hi = 1.0;  // box in feature space (PCA features are unbounded)
    bool feature_box = false;           // when false, attacks run unboxed in feature space
    TrainOptions train;
};

struct BoundStudyResult {
    BoundReport report;
    StochasticClassifier model;
    double w_sigma_w = 0.0;
};

BoundStudyResult bound_study(const LabeledDataset& train_ds, const LabeledDataset& test_ds,
                             NoiseShape shape, const BoundStudyOptions& opt);

// ---------------------------------------------------------------------------
// Gradient-obfuscation checklist (five refutation tests).

struct ChecklistOptions {
    double epsilon = 0.1;
    std::vector<double> eps_grid = {0.02, 0.05, 0.1, 0.2, 0.4};
    int pgd_steps = 25;  // k * (eps/10) must cover the ball from random init
    int eot_samples = 50;
    std::size_t eval_n = 200;
    int random_samples = 1000;
    double box_lo = 0.0, box_hi = 1.0;
    double extra_break_threshold = 0.10;  // criterion 4: tolerated extra break rate
    std::uint64_t seed = 1;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<CriterionResult> obfuscation_checklist(const StochasticClassifier& model,
                                                   const LabeledDataset& test_ds,
                                                   const ChecklistOptions& opt);

// ---------------------------------------------------------------------------
// Covariance contours for d = 2 bottlenecks.

struct ContourData {
    Tensor sigma;  // 2x2
    Tensor eigenvalues;
    Tensor eigenvectors;
    std::vector<std::pair<double, double>> ellipse_1sigma, ellipse_2sigma;
    std::vector<std::pair<double, double>> weight_rays;  // one (wx, wy) per class
    double alignment = 0.0;
    bool alignment_defined = true;  // false when Sigma is rotationally symmetric
};

ContourData covariance_contours(const StochasticClassifier& model);

/// max_i cos^2 of the angle between w_i and the top eigenvector of L L^T.
double alignment_score(const Tensor& w, const Tensor& l);

// ---------------------------------------------------------------------------
// Control-experiment table (ablations at desk scale).

struct AblationRow {
    std::string name;
    double clean = 0.0, fgsm = 0.0, pgd = 0.0;
};

struct AblationOptions {
    double epsilon = 0.1;
    int eot_samples = 50;
    std::size_t eval_n = 300;
    double box_lo = 0.0, box_hi = 1.0;
    TrainOptions train;  // shared base (lr, epochs, batch, objective)
    std::uint64_t seed = 1;
};

std::vector<AblationRow> run_ablation(const LabeledDataset& train_ds, const LabeledDataset& test_ds,
                                      const std::vector<std::size_t>& layer_dims,
                                      std::size_t num_classes, const AblationOptions& opt);

/// Two-class blobs inside the unit box, linearly separable, off-axis optimal
/// direction. The standard substrate for ablation/contour studies.
LabeledDataset make_unit_blobs(Rng& rng, std::size_t n_per_class, double spread = 0.05);

/// Blobs for the linear bound study: [0, 6] box, class means on the main
/// diagonal, within-class covariance elongated along the anti-diagonal so the
/// oblique direction is the only one that separates.
LabeledDataset make_bound_blobs(Rng& rng, std::size_t n_per_class);

}  // namespace wca
