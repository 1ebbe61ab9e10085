#include "wca/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wca/linalg.hpp"

namespace wca {

Tensor project_row_l2(const Tensor& u, double gamma) {
    if (gamma <= 0.0) throw std::invalid_argument("project_row_l2: gamma must be > 0");
    double n = norm2(u);
    double f = std::max(1.0, n / gamma);
    return scale(u, 1.0 / f);
}

Tensor clip_spectrum(const Tensor& sigma, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("clip_spectrum: tau must be > 0");
    EigResult e = sym_eig(sigma);
    std::size_t d = e.values.size();
    Tensor out({d, d});
    for (std::size_t k = 0; k < d; ++k) {
        double lam = std::clamp(e.values[k], 0.0, tau);
        if (lam == 0.0) continue;
        for (std::size_t i = 0; i < d; ++i) {
            double vik = e.vectors.at(i, k);
            if (vik == 0.0) continue;
            for (std::size_t j = 0; j < d; ++j)
                out.at(i, j) += lam * vik * e.vectors.at(j, k);
        }
    }
    // Exact symmetry despite accumulation order.
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            double m = 0.5 * (out.at(i, j) + out.at(j, i));
            out.at(i, j) = m;
            out.at(j, i) = m;
        }
    return out;
}

void projected_update(StochasticClassifier& model, const ParamGrads& grads, double lr,
                      const ProjectionConfig& cfg, const TrainMask& mask) {
    if (lr <= 0.0) throw std::invalid_argument("projected_update: lr must be > 0");
    if (grads.ext_w.size() != model.extractor.num_layers() ||
        grads.ext_b.size() != model.extractor.num_layers())
        throw std::invalid_argument("projected_update: gradient layout does not match the model");

    if (mask.extractor) {
        for (std::size_t l = 0; l < model.extractor.num_layers(); ++l) {
            if (!grads.ext_w[l].all_finite() || !grads.ext_b[l].all_finite())
                throw std::runtime_error("projected_update: non-finite extractor gradient");
            for (std::size_t i = 0; i < model.extractor.weights[l].size(); ++i)
                model.extractor.weights[l][i] -= lr * grads.ext_w[l][i];
            for (std::size_t i = 0; i < model.extractor.biases[l].size(); ++i)
                model.extractor.biases[l][i] -= lr * grads.ext_b[l][i];
        }
    }

    if (mask.head) {
        if (!grads.W.all_finite() || !grads.b.all_finite())
            throw std::runtime_error("projected_update: non-finite head gradient");
        std::size_t c = model.head.W.rows(), d = model.head.W.cols();
        for (std::size_t i = 0; i < c; ++i) {
            Tensor u({d});
            for (std::size_t j = 0; j < d; ++j)
                u[j] = model.head.W.at(i, j) - lr * grads.W.at(i, j);
            Tensor p = project_row_l2(u, cfg.gamma);
            for (std::size_t j = 0; j < d; ++j) model.head.W.at(i, j) = p[j];
        }
        for (std::size_t i = 0; i < model.head.b.size(); ++i)
            model.head.b[i] -= lr * grads.b[i];
    }

    if (mask.noise) {
        if (!grads.L.all_finite())
            throw std::runtime_error("projected_update: non-finite noise gradient");
        Tensor y = model.head.L;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] -= lr * grads.L[i];
        // Keep the candidate in the same masked family before forming Sigma.
        {
            NoisyHead tmp = model.head;
            tmp.L = y;
            mask_noise_factor(tmp);
            y = tmp.L;
        }

        Tensor sigma = clip_spectrum(matmul(transpose(y), y), cfg.tau);
        std::size_t d = sigma.rows();
        for (std::size_t i = 0; i < d; ++i) sigma.at(i, i) += 1e-12;
        model.head.L = cholesky(sigma);
    }

    mask_noise_factor(model.head);
}

}  // namespace wca
