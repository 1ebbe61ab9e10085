#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "wca/linalg.hpp"
#include "wca/rng.hpp"
#include "wca/tensor.hpp"

namespace wca {

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LabeledDataset {
    Tensor features;          // [n x d]
    std::vector<int> labels;  // class ids, or {-1,+1} after filter_binary
    std::string name;
    std::vector<std::string> preprocessing;  // applied steps, oldest first

    std::size_t size() const { return features.rank() == 2 ? features.rows() : 0; }
    std::size_t dim() const { return features.rank() == 2 ? features.cols() : 0; }
    Tensor example(std::size_t i) const { return features.row(i); }

    std::string provenance() const;  // "name|step1|step2|..."
};

struct IdxImages {
    std::size_t count = 0, rows = 0, cols = 0;
    std::vector<double> pixels;  // row-major per image, scaled to [0,1]
};

/// Big-endian IDX image file (magic 0x00000803), pixel bytes scaled so
/// 0 -> 0.0 and 255 -> 1.0.
IdxImages load_idx_images(const std::string& path);

/// Big-endian IDX label file (magic 0x00000801).
std::vector<int> load_idx_labels(const std::string& path);

/// Pairs an image file with a label file. Count mismatch is an error.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

// Fixture/synthetic-data writers in the same format the loader reads.
void write_idx_images(const std::string& path, std::size_t rows, std::size_t cols,
                      const std::vector<double>& pixels);
void write_idx_labels(const std::string& path, const std::vector<int>& labels);

struct PcaModel {
    Tensor mean;        // [D]
    Tensor components;  // [D x k], orthonormal columns, deterministic sign
    std::size_t k = 0;
};

/// Top-k eigenvectors of the centered covariance (normalized by n), via
/// sym_eig. Component sign fixed by making the largest-magnitude entry
/// positive.
PcaModel pca_fit(const Tensor& x, std::size_t k);
Tensor pca_transform(const PcaModel& model, const Tensor& x);  // [n x k]

/// Keep two classes, mapping class_a -> +1 and class_b -> -1.
LabeledDataset filter_binary(const LabeledDataset& ds, int class_a, int class_b);

/// Gaussian class-conditional blobs. means is [C x dim]; covariances has one
/// [dim x dim] PSD matrix per class.
LabeledDataset make_blobs(Rng& rng, std::size_t n_per_class, const Tensor& means,
                          const std::vector<Tensor>& covariances);

/// Two-class 8x8 synthetic digits (filled disc vs vertical bar, plus pixel
/// noise), written through the same pixel conventions as IDX data. Labels are
/// 0 and 1 so filter_binary applies as with real digit data.
LabeledDataset make_synth_digits(Rng& rng, std::size_t n_per_class);

/// Deterministic 90/10-style split by index: every 10th example (offset 9)
/// goes to validation.
void split_train_validation(const LabeledDataset& ds, LabeledDataset& train, LabeledDataset& val);

/// Processed features as CSV (label column first), with the provenance chain
/// in a comment.
std::string features_csv(const LabeledDataset& ds);

/// Single scalar rescale so the mean per-example l2 norm of `fit` equals
/// `target`; the same factor is applied to `apply`. Normalizes PCA feature
/// scales across datasets. Returns the factor.
double scale_to_mean_norm(LabeledDataset& fit, LabeledDataset& apply, double target);

}  // namespace wca
