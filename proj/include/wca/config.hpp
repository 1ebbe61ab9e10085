#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wca/data.hpp"

namespace wca {

struct DatasetSpec {
    std::string kind = "blobs";  // blobs | synth01 | mnist01 | mnist
    std::size_t n_train_per_class = 400;
    std::size_t n_test_per_class = 200;
    std::size_t pca = 0;   // 0 = off
    double pca_norm = 0.0;  // > 0: rescale PCA features to this mean l2 norm
    std::string data_dir;  // IDX root for mnist kinds; WCA_DATA_DIR fallback
    double blob_spread = 0.06;
    bool export_features = false;  // train cmd also dumps processed features as CSV
};

struct ModelSpec {
    std::vector<std::size_t> hidden;  // hidden widths; empty + feature_dim 0 = identity extractor
    std::size_t feature_dim = 0;
    std::string noise = "full";  // full | diagonal | spherical
    double l_init = 0.1;
};

struct ObjectiveSpec {
    std::string loss = "auto";  // auto | hinge | xent
    double lambda = 1e-4;
    bool wca = true;
    double wca_coeff = 1.0;
    std::string regularizer = "penalty";  // penalty | constraint
    double gamma = 5.0, tau = 5.0;
};

struct TrainingSpec {
    double lr = 1e-2;
    int epochs = 30;
    std::size_t batch = 128;
    bool grid = false;  // lr x lambda sweep over {1e-1 ... 1e-4} with validation selection
    int log_every = 0;
};

struct AttackSpec {
    std::string kind = "pgd";  // fgsm | pgd | cw | one_pixel | square
    double epsilon = 0.1;
    std::string norm = "inf";  // inf | 2
    int steps = 10;
    double step_size = 0.0;
    int restarts = 1;
    int eot_samples = 50;
    // C&W
    double kappa = 0.0;
    double c0 = 1e-3;
    int binary_steps = 9;
    int iters = 1000;
    double lr = 5e-4;
    // one-pixel
    int n_pixels = 1;
    std::size_t population = 50;
    int k_max = 200;
    double crossover = 0.7;
    double mutation = 0.5;
    // square
    int budget = 200;
    double p0 = 0.3;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    ModelSpec model;
    ObjectiveSpec objective;
    TrainingSpec training;
    std::vector<AttackSpec> attacks;
    std::size_t eval_n = 500;
    bool eps_sweep = false;  // attack subcommand: epsilon = 2^n / 255, n in 0..7
    std::string out_dir = "out";
    std::uint64_t seed = 1;
};

/// Parses a JSON config document. Unknown keys anywhere are an error.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

/// Canonical serialization (sorted keys) used for the CSV header hash.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

struct DatasetBundle {
    LabeledDataset train, test;
    double box_lo = 0.0, box_hi = 1.0;  // effective attack box; wide open after PCA
    bool binary = false;                // labels in {-1, +1}
    std::size_t num_classes = 2;        // 1 for a binary hinge head
};

/// Materializes the configured dataset pair. MNIST kinds read IDX files from
/// data_dir (or $WCA_DATA_DIR); generators derive from the seed.
DatasetBundle build_datasets(const DatasetSpec& spec, std::uint64_t seed);

}  // namespace wca
