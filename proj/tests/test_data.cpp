#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "wca/data.hpp"
#include "wca/linalg.hpp"

using namespace wca;

namespace {

const char* kImg = "/tmp/wca_test_images.idx";
const char* kLbl = "/tmp/wca_test_labels.idx";

void write_raw(const char* path, const std::vector<unsigned char>& bytes) {
    std::ofstream os(path, std::ios::binary);
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("idx fixture round trip") {
    // Two 2x2 images with known bytes: 0 -> 0.0 and 255 -> 1.0 exactly.
    std::vector<double> pixels{0.0, 1.0, 0.5, 0.25, 1.0, 0.0, 0.75, 0.1};
    write_idx_images(kImg, 2, 2, pixels);
    write_idx_labels(kLbl, {3, 7});

    LabeledDataset ds = load_idx(kImg, kLbl);
    CHECK(ds.size() == 2);
    CHECK(ds.dim() == 4);
    CHECK(ds.labels[0] == 3);
    CHECK(ds.labels[1] == 7);
    CHECK(ds.features.at(0, 0) == 0.0);
    CHECK(ds.features.at(0, 1) == 1.0);
    CHECK(ds.features.at(1, 0) == 1.0);
    // Quantization through bytes: within half a pixel level.
    CHECK(std::abs(ds.features.at(0, 2) - 0.5) <= 0.5 / 255.0 + 1e-12);

    std::remove(kImg);
    std::remove(kLbl);
}

TEST_CASE("idx error paths") {
    // Wrong magic: the message names the offending value.
    write_raw(kImg, {0x00, 0x00, 0x08, 0x02, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1, 0x7f});
    try {
        load_idx_images(kImg);
        CHECK(false);
    } catch (const parse_error& e) {
        CHECK(std::string(e.what()).find("0x00000802") != std::string::npos);
    }

    // Truncated pixel payload.
    write_raw(kImg, {0x00, 0x00, 0x08, 0x03, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2, 0x01, 0x02});
    CHECK_THROWS_AS(load_idx_images(kImg), parse_error);

    // Image/label count mismatch.
    write_idx_images(kImg, 2, 2, std::vector<double>(8, 0.5));
    write_idx_labels(kLbl, {1, 2, 3});
    CHECK_THROWS_AS(load_idx(kImg, kLbl), parse_error);

    std::remove(kImg);
    std::remove(kLbl);
}

TEST_CASE("pca on degenerate and isometric cases") {
    // Points on a line in 2d: one component captures everything.
    Tensor x({20, 2});
    for (std::size_t i = 0; i < 20; ++i) {
        double t = static_cast<double>(i) - 9.5;
        x.at(i, 0) = 2.0 * t;
        x.at(i, 1) = -1.0 * t;
    }
    PcaModel p1 = pca_fit(x, 1);
    Tensor z = pca_transform(p1, x);
    // Reconstruction from one component is exact on a line.
    double err = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
        double rx = p1.mean[0] + z.at(i, 0) * p1.components.at(0, 0);
        double ry = p1.mean[1] + z.at(i, 0) * p1.components.at(1, 0);
        err += (rx - x.at(i, 0)) * (rx - x.at(i, 0)) + (ry - x.at(i, 1)) * (ry - x.at(i, 1));
    }
    CHECK(err <= 1e-16);

    // k = D: pairwise distances preserved.
    Rng rng(2);
    Tensor full({15, 4});
    for (std::size_t i = 0; i < full.size(); ++i) full[i] = rng.gaussian();
    PcaModel pd = pca_fit(full, 4);
    Tensor zd = pca_transform(pd, full);
    for (std::size_t i = 0; i < 15; ++i)
        for (std::size_t j = i + 1; j < 15; ++j) {
            double d1 = norm2(sub(full.row(i), full.row(j)));
            double d2 = norm2(sub(zd.row(i), zd.row(j)));
            CHECK(std::abs(d1 - d2) <= 1e-8);
        }
}

TEST_CASE("pca reconstruction error equals the discarded spectrum") {
    Rng rng(3);
    const std::size_t n = 40, dim = 8, k = 3;
    Tensor x({n, dim});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.gaussian();

    PcaModel p = pca_fit(x, k);
    Tensor z = pca_transform(p, x);

    // Oracle: eigenvalues of the centered covariance ( 1/n normalization).
    Tensor mean({dim});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j) mean[j] += x.at(i, j) / n;
    Tensor cov({dim, dim});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = 0; b < dim; ++b)
                cov.at(a, b) += (x.at(i, a) - mean[a]) * (x.at(i, b) - mean[b]) / n;
    EigResult e = sym_eig(cov);
    double discarded = 0.0;
    for (std::size_t j = k; j < dim; ++j) discarded += e.values[j];

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < dim; ++a) {
            double rec = p.mean[a];
            for (std::size_t c = 0; c < k; ++c) rec += z.at(i, c) * p.components.at(a, c);
            err += (x.at(i, a) - rec) * (x.at(i, a) - rec);
        }
    }
    CHECK(std::abs(err - discarded * n) <= 1e-6);
}

TEST_CASE("pca components are orthonormal with deterministic sign") {
    Rng rng(5);
    Tensor x({30, 5});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.gaussian();
    PcaModel p = pca_fit(x, 3);
    Tensor vtv = matmul(transpose(p.components), p.components);
    CHECK(frobenius_dist(vtv, identity(3)) <= 1e-8);

    for (std::size_t c = 0; c < 3; ++c) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < 5; ++i)
            if (std::abs(p.components.at(i, c)) > std::abs(p.components.at(arg, c))) arg = i;
        CHECK(p.components.at(arg, c) > 0.0);
    }
}

TEST_CASE("filter_binary keeps two classes with the documented mapping") {
    LabeledDataset ds;
    ds.features = Tensor({6, 1}, {0, 1, 2, 3, 4, 5});
    ds.labels = {0, 1, 2, 0, 1, 2};
    LabeledDataset bin = filter_binary(ds, 0, 1);
    CHECK(bin.size() == 4);
    CHECK(bin.labels[0] == 1);   // class 0 -> +1
    CHECK(bin.labels[1] == -1);  // class 1 -> -1
    for (int l : bin.labels) CHECK((l == 1 || l == -1));

    CHECK_THROWS_AS(filter_binary(ds, 0, 9), std::invalid_argument);
}

TEST_CASE("filter_binary on real MNIST when files are available") {
    const char* root = std::getenv("WCA_DATA_DIR");
    if (root == nullptr) return;  // user supplies files; skip otherwise
    std::string imgs = std::string(root) + "/train-images-idx3-ubyte";
    std::ifstream probe(imgs);
    if (!probe) return;
    LabeledDataset full = load_idx(imgs, std::string(root) + "/train-labels-idx1-ubyte");
    LabeledDataset bin = filter_binary(full, 0, 1);
    CHECK(bin.size() == 12665);
}

TEST_CASE("make_blobs shapes and determinism") {
    Tensor means = Tensor::mat(2, 2, {0, 0, 3, 3});
    std::vector<Tensor> covs{identity(2), identity(2)};

    Rng r1(7), r2(7);
    LabeledDataset a = make_blobs(r1, 50, means, covs);
    LabeledDataset b = make_blobs(r2, 50, means, covs);
    CHECK(frobenius_dist(a.features, b.features) == 0.0);
    CHECK(a.labels == b.labels);
    CHECK(a.size() == 100);

    CHECK_THROWS_AS(make_blobs(r1, 10, means, {Tensor::mat(2, 2, {1, 2, 2, 1}), identity(2)}),
                    factorization_error);
}

TEST_CASE("identical means are indistinguishable; the label split is even") {
    Tensor means = Tensor::mat(2, 2, {1, 1, 1, 1});
    std::vector<Tensor> covs{identity(2), identity(2)};
    Rng rng(11);
    LabeledDataset ds = make_blobs(rng, 200, means, covs);
    // Any fixed linear rule scores ~0.5: check the best axis-aligned threshold
    // over a small grid stays near chance.
    double best = 0.0;
    for (double thr = -2.0; thr <= 2.0; thr += 0.25) {
        for (int axis = 0; axis < 2; ++axis) {
            std::size_t hits = 0;
            for (std::size_t i = 0; i < ds.size(); ++i) {
                int pred = ds.features.at(i, axis) > 1.0 + thr ? 0 : 1;
                if (pred == ds.labels[i]) hits++;
            }
            double acc = static_cast<double>(hits) / static_cast<double>(ds.size());
            best = std::max({best, acc, 1.0 - acc});
        }
    }
    CHECK(best <= 0.60);
}

TEST_CASE("synthetic digits are binary-ready and deterministic") {
    Rng r1(13), r2(13);
    LabeledDataset a = make_synth_digits(r1, 30);
    LabeledDataset b = make_synth_digits(r2, 30);
    CHECK(frobenius_dist(a.features, b.features) == 0.0);
    CHECK(a.dim() == 256);
    for (std::size_t i = 0; i < a.features.size(); ++i) {
        CHECK(a.features[i] >= 0.0);
        CHECK(a.features[i] <= 1.0);
    }
    LabeledDataset bin = filter_binary(a, 0, 1);
    CHECK(bin.size() == 60);
}

TEST_CASE("deterministic train/validation split") {
    LabeledDataset ds;
    ds.features = Tensor({20, 1});
    for (std::size_t i = 0; i < 20; ++i) {
        ds.features.at(i, 0) = static_cast<double>(i);
        ds.labels.push_back(static_cast<int>(i % 2));
    }
    LabeledDataset tr, val;
    split_train_validation(ds, tr, val);
    CHECK(tr.size() == 18);
    CHECK(val.size() == 2);
    CHECK(val.features.at(0, 0) == 9.0);
    CHECK(val.features.at(1, 0) == 19.0);
}

TEST_CASE("provenance chain records preprocessing") {
    Rng rng(1);
    LabeledDataset ds = make_synth_digits(rng, 5);
    LabeledDataset bin = filter_binary(ds, 0, 1);
    std::string prov = bin.provenance();
    CHECK(prov.find("synth_digits") != std::string::npos);
    CHECK(prov.find("binary(0->+1,1->-1)") != std::string::npos);

    std::string csv = features_csv(bin);
    CHECK(csv.find("# dataset=" + prov) == 0);
    CHECK(csv.find("label,f0,f1") != std::string::npos);
    CHECK(csv.find('\r') == std::string::npos);
}
