#include "wca/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace wca {

std::string LabeledDataset::provenance() const {
    std::string out = name;
    for (const auto& s : preprocessing) out += "|" + s;
    return out;
}

static std::uint32_t read_be32(std::ifstream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw parse_error("idx: truncated file " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

static std::string hex32(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", v);
    return buf;
}

IdxImages load_idx_images(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw parse_error("idx: cannot open " + path);
    std::uint32_t magic = read_be32(is, path);
    if (magic != 0x00000803u)
        throw parse_error("idx: bad image magic " + hex32(magic) + " in " + path +
                          " (expected 0x00000803)");
    IdxImages out;
    out.count = read_be32(is, path);
    out.rows = read_be32(is, path);
    out.cols = read_be32(is, path);
    std::size_t n = out.count * out.rows * out.cols;
    std::vector<unsigned char> raw(n);
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n)))
        throw parse_error("idx: truncated pixel data in " + path);
    out.pixels.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.pixels[i] = raw[i] / 255.0;
    return out;
}

std::vector<int> load_idx_labels(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw parse_error("idx: cannot open " + path);
    std::uint32_t magic = read_be32(is, path);
    if (magic != 0x00000801u)
        throw parse_error("idx: bad label magic " + hex32(magic) + " in " + path +
                          " (expected 0x00000801)");
    std::uint32_t count = read_be32(is, path);
    std::vector<unsigned char> raw(count);
    if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count)))
        throw parse_error("idx: truncated label data in " + path);
    return std::vector<int>(raw.begin(), raw.end());
}

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    IdxImages img = load_idx_images(images_path);
    std::vector<int> labels = load_idx_labels(labels_path);
    if (labels.size() != img.count)
        throw parse_error("idx: image/label count mismatch (" + std::to_string(img.count) +
                          " images vs " + std::to_string(labels.size()) + " labels)");
    LabeledDataset ds;
    ds.features = Tensor({img.count, img.rows * img.cols}, std::move(img.pixels));
    ds.labels = std::move(labels);
    ds.name = images_path;
    ds.preprocessing.push_back("idx[0,1]");
    return ds;
}

static void write_be32(std::ofstream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<char*>(b), 4);
}

void write_idx_images(const std::string& path, std::size_t rows, std::size_t cols,
                      const std::vector<double>& pixels) {
    if (pixels.size() % (rows * cols) != 0)
        throw std::invalid_argument("write_idx_images: pixel count not a multiple of rows*cols");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_idx_images: cannot open " + path);
    write_be32(os, 0x00000803u);
    write_be32(os, static_cast<std::uint32_t>(pixels.size() / (rows * cols)));
    write_be32(os, static_cast<std::uint32_t>(rows));
    write_be32(os, static_cast<std::uint32_t>(cols));
    for (double p : pixels) {
        double c = std::clamp(p, 0.0, 1.0);
        auto byte = static_cast<unsigned char>(std::lround(c * 255.0));
        os.write(reinterpret_cast<char*>(&byte), 1);
    }
}

void write_idx_labels(const std::string& path, const std::vector<int>& labels) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_idx_labels: cannot open " + path);
    write_be32(os, 0x00000801u);
    write_be32(os, static_cast<std::uint32_t>(labels.size()));
    for (int l : labels) {
        auto byte = static_cast<unsigned char>(l);
        os.write(reinterpret_cast<char*>(&byte), 1);
    }
}

PcaModel pca_fit(const Tensor& x, std::size_t k) {
    if (x.rank() != 2) throw std::invalid_argument("pca_fit: [n x D] matrix required");
    std::size_t n = x.rows(), dim = x.cols();
    if (k == 0 || k > std::min(n, dim))
        throw std::invalid_argument("pca_fit: k must be in [1, min(n, D)]");

    PcaModel m;
    m.k = k;
    m.mean = Tensor({dim});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j) m.mean[j] += x.at(i, j);
    for (std::size_t j = 0; j < dim; ++j) m.mean[j] /= static_cast<double>(n);

    Tensor cov({dim, dim});
    std::vector<double> row(dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) row[j] = x.at(i, j) - m.mean[j];
        for (std::size_t a = 0; a < dim; ++a) {
            if (row[a] == 0.0) continue;
            double* c = cov.data() + a * dim;
            for (std::size_t b2 = 0; b2 < dim; ++b2) c[b2] += row[a] * row[b2];
        }
    }
    for (std::size_t i = 0; i < cov.size(); ++i) cov[i] /= static_cast<double>(n);

    EigResult e = sym_eig(cov);
    m.components = Tensor({dim, k});
    for (std::size_t c = 0; c < k; ++c) {
        // Deterministic sign: largest-magnitude entry positive.
        std::size_t arg = 0;
        for (std::size_t i = 1; i < dim; ++i)
            if (std::abs(e.vectors.at(i, c)) > std::abs(e.vectors.at(arg, c))) arg = i;
        double sgn = e.vectors.at(arg, c) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < dim; ++i) m.components.at(i, c) = sgn * e.vectors.at(i, c);
    }
    return m;
}

Tensor pca_transform(const PcaModel& model, const Tensor& x) {
    if (x.rank() != 2 || x.cols() != model.mean.size())
        throw std::invalid_argument("pca_transform: dimension mismatch");
    std::size_t n = x.rows(), dim = x.cols(), k = model.k;
    Tensor out({n, k});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < dim; ++j)
                s += (x.at(i, j) - model.mean[j]) * model.components.at(j, c);
            out.at(i, c) = s;
        }
    return out;
}

LabeledDataset filter_binary(const LabeledDataset& ds, int class_a, int class_b) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.labels[i] == class_a || ds.labels[i] == class_b) keep.push_back(i);

    std::size_t na = 0, nb = 0;
    for (auto i : keep) (ds.labels[i] == class_a ? na : nb)++;
    if (na == 0) throw std::invalid_argument("filter_binary: class " + std::to_string(class_a) + " empty");
    if (nb == 0) throw std::invalid_argument("filter_binary: class " + std::to_string(class_b) + " empty");

    LabeledDataset out;
    std::size_t dim = ds.dim();
    out.features = Tensor({keep.size(), dim});
    out.labels.reserve(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        for (std::size_t j = 0; j < dim; ++j) out.features.at(r, j) = ds.features.at(keep[r], j);
        out.labels.push_back(ds.labels[keep[r]] == class_a ? 1 : -1);
    }
    out.name = ds.name;
    out.preprocessing = ds.preprocessing;
    out.preprocessing.push_back("binary(" + std::to_string(class_a) + "->+1," +
                                std::to_string(class_b) + "->-1)");
    return out;
}

LabeledDataset make_blobs(Rng& rng, std::size_t n_per_class, const Tensor& means,
                          const std::vector<Tensor>& covariances) {
    if (means.rank() != 2) throw std::invalid_argument("make_blobs: means must be [C x dim]");
    std::size_t c = means.rows(), dim = means.cols();
    if (covariances.size() != c)
        throw std::invalid_argument("make_blobs: one covariance per class required");

    std::vector<Tensor> chol;
    chol.reserve(c);
    for (const auto& cov : covariances) {
        if (cov.rank() != 2 || cov.rows() != dim || cov.cols() != dim)
            throw std::invalid_argument("make_blobs: covariance dims inconsistent with means");
        chol.push_back(cholesky(cov));  // throws on non-PSD
    }

    LabeledDataset ds;
    ds.features = Tensor({c * n_per_class, dim});
    ds.labels.reserve(c * n_per_class);
    std::size_t r = 0;
    for (std::size_t cls = 0; cls < c; ++cls) {
        for (std::size_t i = 0; i < n_per_class; ++i, ++r) {
            Tensor z = matvec(chol[cls], gaussian(rng, dim));
            for (std::size_t j = 0; j < dim; ++j) ds.features.at(r, j) = means.at(cls, j) + z[j];
            ds.labels.push_back(static_cast<int>(cls));
        }
    }
    ds.name = "blobs";
    ds.preprocessing.push_back("gaussian_blobs(c=" + std::to_string(c) +
                               ",n=" + std::to_string(n_per_class) + ")");
    return ds;
}

LabeledDataset make_synth_digits(Rng& rng, std::size_t n_per_class) {
    // 16x16 keeps the per-image norm near what real digit data gives after
    // PCA, which the linear hinge models are calibrated for.
    const std::size_t side = 16, dim = side * side;
    LabeledDataset ds;
    ds.features = Tensor({2 * n_per_class, dim});
    ds.labels.reserve(2 * n_per_class);

    auto put = [&](std::size_t row, std::size_t r, std::size_t c, double v) {
        ds.features.at(row, r * side + c) = std::clamp(v, 0.0, 1.0);
    };

    std::size_t row = 0;
    for (int cls = 0; cls <= 1; ++cls) {
        for (std::size_t i = 0; i < n_per_class; ++i, ++row) {
            // Translation, gain and exposure jitter: no single pixel separates
            // the classes, and the structured nuisance variance dominates the
            // pixel-noise floor, pinning the discriminative direction obliquely
            // in the principal axes.
            double cx = 7.5 + rng.uniform(-1.2, 1.2);
            double cy = 7.5 + rng.uniform(-1.2, 1.2);
            double thick = rng.uniform(1.4, 2.0);
            double gain = rng.uniform(0.6, 1.0);
            double glow = rng.uniform(-0.22, 0.22);
            for (std::size_t r = 0; r < side; ++r) {
                for (std::size_t c = 0; c < side; ++c) {
                    double v;
                    if (cls == 0) {
                        // Ring ("0"): bright near radius ~4.3 from the centre.
                        double dr = std::hypot(r - cy, c - cx);
                        v = std::exp(-(dr - 4.3) * (dr - 4.3) / (2.0 * 0.9 * 0.9));
                    } else {
                        // Bar ("1"): bright vertical stripe near the centre column.
                        double dc = std::abs(static_cast<double>(c) - cx);
                        v = std::exp(-dc * dc / (2.0 * thick * thick));
                    }
                    v = gain * v + glow + 0.05 * rng.gaussian();
                    put(row, r, c, v);
                }
            }
            ds.labels.push_back(cls);
        }
    }
    ds.name = "synth_digits";
    ds.preprocessing.push_back("synth_digits(16x16,n=" + std::to_string(n_per_class) + ")");
    return ds;
}

std::string features_csv(const LabeledDataset& ds) {
    std::string out = "# dataset=" + ds.provenance() + "\n";
    out += "label";
    for (std::size_t j = 0; j < ds.dim(); ++j) out += ",f" + std::to_string(j);
    out += "\n";
    char buf[40];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out += std::to_string(ds.labels[i]);
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.features.at(i, j));
            out += ",";
            out += buf;
        }
        out += "\n";
    }
    return out;
}

double scale_to_mean_norm(LabeledDataset& fit, LabeledDataset& apply, double target) {
    if (target <= 0.0) throw std::invalid_argument("scale_to_mean_norm: target must be > 0");
    double mean = 0.0;
    for (std::size_t i = 0; i < fit.size(); ++i) mean += norm2(fit.example(i));
    mean /= static_cast<double>(fit.size());
    if (mean <= 0.0) throw std::invalid_argument("scale_to_mean_norm: degenerate features");
    double factor = target / mean;
    for (std::size_t i = 0; i < fit.features.size(); ++i) fit.features[i] *= factor;
    for (std::size_t i = 0; i < apply.features.size(); ++i) apply.features[i] *= factor;
    std::string tag = "norm(mean_l2=" + std::to_string(target) + ")";
    fit.preprocessing.push_back(tag);
    apply.preprocessing.push_back(tag);
    return factor;
}

void split_train_validation(const LabeledDataset& ds, LabeledDataset& train, LabeledDataset& val) {
    std::vector<std::size_t> tr, va;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (i % 10 == 9)
            va.push_back(i);
        else
            tr.push_back(i);
    }
    auto take = [&](const std::vector<std::size_t>& idx, const char* tag) {
        LabeledDataset out;
        out.features = Tensor({idx.size(), ds.dim()});
        for (std::size_t r = 0; r < idx.size(); ++r) {
            for (std::size_t j = 0; j < ds.dim(); ++j) out.features.at(r, j) = ds.features.at(idx[r], j);
            out.labels.push_back(ds.labels[idx[r]]);
        }
        out.name = ds.name;
        out.preprocessing = ds.preprocessing;
        out.preprocessing.push_back(tag);
        return out;
    };
    train = take(tr, "split90");
    val = take(va, "split10");
}

}  // namespace wca
