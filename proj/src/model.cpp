#include "wca/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wca {

Tensor NoisyHead::covariance() const { return matmul_nt(L, L); }

std::size_t StochasticClassifier::input_dim() const {
    if (extractor.num_layers() == 0) return head.feature_dim();
    return extractor.weights.front().cols();
}

ForwardMode ForwardMode::sample(int n) {
    if (n < 1) throw std::invalid_argument("ForwardMode: n_samples must be >= 1");
    return {true, n};
}

StochasticClassifier make_model(const std::vector<std::size_t>& layer_dims, std::size_t num_classes,
                                Rng& rng, double l_init, NoiseShape shape) {
    if (layer_dims.empty()) throw std::invalid_argument("make_model: need at least the input dim");
    std::size_t d = layer_dims.back();
    if (d < num_classes)
        throw std::invalid_argument("make_model: bottleneck dim must be >= number of classes");

    StochasticClassifier m;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        std::size_t in = layer_dims[l], out = layer_dims[l + 1];
        Tensor w({out, in});
        // He-style scale keeps relu activations in range at init.
        double s = std::sqrt(2.0 / static_cast<double>(in));
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = s * rng.gaussian();
        m.extractor.weights.push_back(std::move(w));
        m.extractor.biases.push_back(Tensor({out}));
    }

    Tensor w({num_classes, d});
    double s = std::sqrt(1.0 / static_cast<double>(d));
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = s * rng.gaussian();
    m.head.W = std::move(w);
    m.head.b = Tensor({num_classes});
    m.head.L = scale(identity(d), l_init);
    m.head.shape = shape;
    return m;
}

void mask_noise_factor(NoisyHead& head) {
    std::size_t d = head.L.rows();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            if (j > i) head.L.at(i, j) = 0.0;
            if (head.shape != NoiseShape::Full && j != i) head.L.at(i, j) = 0.0;
        }
    if (head.shape == NoiseShape::Spherical) {
        double mean = 0.0;
        for (std::size_t i = 0; i < d; ++i) mean += head.L.at(i, i);
        mean /= static_cast<double>(d);
        for (std::size_t i = 0; i < d; ++i) head.L.at(i, i) = mean;
    }
}

Tensor features(const StochasticClassifier& model, const Tensor& x) {
    if (x.rank() != 1)
        throw std::invalid_argument("features: rank-1 input required, got " + x.shape_str());
    Tensor h = x;
    std::size_t n = model.extractor.num_layers();
    for (std::size_t l = 0; l < n; ++l) {
        h = add(matvec(model.extractor.weights[l], h), model.extractor.biases[l]);
        if (l + 1 < n)
            for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::max(0.0, h[i]);
    }
    if (h.size() != model.feature_dim())
        throw std::invalid_argument("features: extractor output dim does not match head");
    return h;
}

Tensor sample_noise(const NoisyHead& head, Rng& rng) {
    Tensor u = gaussian(rng, head.feature_dim());
    return matvec(head.L, u);
}

Tensor forward(const StochasticClassifier& model, const Tensor& x, const ForwardMode& mode, Rng& rng) {
    Tensor f = features(model, x);
    if (!mode.stochastic) {
        return add(matvec(model.head.W, f), model.head.b);
    }
    Tensor acc({model.num_classes()});
    for (int s = 0; s < mode.n_samples; ++s) {
        Tensor noisy = add(f, sample_noise(model.head, rng));
        acc = add(acc, add(matvec(model.head.W, noisy), model.head.b));
    }
    return scale(acc, 1.0 / static_cast<double>(mode.n_samples));
}

double margin(const StochasticClassifier& model, const Tensor& x, int y, const ForwardMode& mode, Rng& rng) {
    if (model.num_classes() != 1)
        throw std::invalid_argument("margin: binary head required (single output)");
    if (y != 1 && y != -1) throw std::invalid_argument("margin: label must be +1 or -1");
    Tensor logits = forward(model, x, mode, rng);
    return static_cast<double>(y) * logits[0];
}

double logits_margin(const Tensor& logits, int label) {
    if (logits.size() == 1) {
        if (label != 1 && label != -1)
            throw std::invalid_argument("logits_margin: binary label must be +1 or -1");
        return static_cast<double>(label) * logits[0];
    }
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
        throw std::invalid_argument("logits_margin: label out of range");
    auto y = static_cast<std::size_t>(label);
    double best = -1e308;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        if (j == y) continue;
        best = std::max(best, logits[j]);
    }
    return logits[y] - best;
}

int predict_label(const Tensor& logits) {
    if (logits.size() == 1) return logits[0] >= 0.0 ? 1 : -1;
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.size(); ++j)
        if (logits[j] > logits[best]) best = j;
    return static_cast<int>(best);
}

GraphNodes build_forward(Tape& tape, const StochasticClassifier& model, const Tensor& x_batch,
                         const Tensor* noise_u) {
    if (x_batch.rank() != 2)
        throw std::invalid_argument("build_forward: batch must be [n x D], got " + x_batch.shape_str());

    GraphNodes g;
    g.x = tape.leaf(x_batch);
    NodeId h = g.x;
    std::size_t n_layers = model.extractor.num_layers();
    for (std::size_t l = 0; l < n_layers; ++l) {
        g.ext_w.push_back(tape.leaf(model.extractor.weights[l]));
        g.ext_b.push_back(tape.leaf(model.extractor.biases[l]));
        h = tape.add_bias(tape.matmul_nt(h, g.ext_w.back()), g.ext_b.back());
        if (l + 1 < n_layers) h = tape.relu(h);
    }

    g.w = tape.leaf(model.head.W);
    g.b = tape.leaf(model.head.b);
    g.l = tape.leaf(model.head.L);

    if (noise_u != nullptr) {
        if (noise_u->rank() != 2 || noise_u->rows() != x_batch.rows() ||
            noise_u->cols() != model.feature_dim())
            throw std::invalid_argument("build_forward: noise draws must be [n x d]");
        g.noise_u = tape.leaf(*noise_u);
        h = tape.add(h, tape.matmul_nt(g.noise_u, g.l));
    }

    g.logits = tape.add_bias(tape.matmul_nt(h, g.w), g.b);
    return g;
}

// ---------------------------------------------------------------------------
// Checkpoint container. Line-oriented text, doubles as %.17g (exact IEEE
// round trip), LF endings. Version tag first.

static void write_tensor(std::ostream& os, const char* name, const Tensor& t) {
    os << "tensor " << name << " " << t.rank();
    for (auto d : t.shape()) os << " " << d;
    os << "\n";
    char buf[40];
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", t[i]);
        os << buf << (i + 1 == t.size() ? "" : " ");
    }
    os << "\n";
}

static Tensor read_tensor(std::istream& is, const std::string& expect_name) {
    std::string tag, name;
    std::size_t rank;
    if (!(is >> tag >> name >> rank) || tag != "tensor" || name != expect_name)
        throw std::runtime_error("checkpoint: expected tensor '" + expect_name + "'");
    std::vector<std::size_t> shape(rank);
    std::size_t n = 1;
    for (auto& d : shape) {
        if (!(is >> d)) throw std::runtime_error("checkpoint: truncated shape");
        n *= d;
    }
    std::vector<double> data(n);
    std::string tok;
    for (auto& v : data) {
        if (!(is >> tok)) throw std::runtime_error("checkpoint: truncated tensor data");
        v = std::strtod(tok.c_str(), nullptr);
    }
    return Tensor(std::move(shape), std::move(data));
}

void save_checkpoint(const StochasticClassifier& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);  // binary: keep LF on every platform
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    os << "wca_checkpoint 1\n";
    os << "classes " << model.num_classes() << "\n";
    os << "feature_dim " << model.feature_dim() << "\n";
    os << "isotropic " << static_cast<int>(model.head.shape) << "\n";
    os << "layers " << model.extractor.num_layers() << "\n";
    for (std::size_t l = 0; l < model.extractor.num_layers(); ++l) {
        write_tensor(os, ("ext_w" + std::to_string(l)).c_str(), model.extractor.weights[l]);
        write_tensor(os, ("ext_b" + std::to_string(l)).c_str(), model.extractor.biases[l]);
    }
    write_tensor(os, "W", model.head.W);
    write_tensor(os, "b", model.head.b);
    write_tensor(os, "L", model.head.L);
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

StochasticClassifier load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    std::string tag;
    int version;
    if (!(is >> tag >> version) || tag != "wca_checkpoint")
        throw std::runtime_error("load_checkpoint: not a checkpoint file: " + path);
    if (version != 1)
        throw std::runtime_error("load_checkpoint: unsupported version " + std::to_string(version));

    auto read_kv = [&](const char* key) -> std::size_t {
        std::string k;
        std::size_t v;
        if (!(is >> k >> v) || k != key)
            throw std::runtime_error(std::string("load_checkpoint: expected '") + key + "'");
        return v;
    };
    std::size_t classes = read_kv("classes");
    std::size_t d = read_kv("feature_dim");
    std::size_t iso = read_kv("isotropic");
    std::size_t layers = read_kv("layers");

    StochasticClassifier m;
    for (std::size_t l = 0; l < layers; ++l) {
        m.extractor.weights.push_back(read_tensor(is, "ext_w" + std::to_string(l)));
        m.extractor.biases.push_back(read_tensor(is, "ext_b" + std::to_string(l)));
    }
    m.head.W = read_tensor(is, "W");
    m.head.b = read_tensor(is, "b");
    m.head.L = read_tensor(is, "L");
    if (iso > 2) throw std::runtime_error("load_checkpoint: unknown noise shape");
    m.head.shape = static_cast<NoiseShape>(iso);

    if (m.head.W.rows() != classes || m.head.W.cols() != d)
        throw std::runtime_error("load_checkpoint: header/tensor shape mismatch");
    return m;
}

}  // namespace wca
