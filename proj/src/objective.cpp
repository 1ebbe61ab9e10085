#include "wca/objective.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wca {

double wca_term(const Tensor& w, const Tensor& l, double ln_floor) {
    Tensor a = matmul(w, l);  // [C x d], row i = w_i^T L
    double out = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double q = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) q += a.at(i, j) * a.at(i, j);
        if (q <= ln_floor)
            throw std::domain_error("wca_term: w_i^T Sigma w_i = " + std::to_string(q) +
                                    " at or below floor for class " + std::to_string(i));
        out += std::log(q);
    }
    return out;
}

LossGraph build_loss(const StochasticClassifier& model, const Tensor& x_batch,
                     const std::vector<int>& labels, const ObjectiveConfig& cfg,
                     const Tensor* noise_u) {
    if (x_batch.rank() != 2 || x_batch.rows() == 0)
        throw std::invalid_argument("build_loss: nonempty [n x D] batch required");
    if (labels.size() != x_batch.rows())
        throw std::invalid_argument("build_loss: label count mismatch");
    if (cfg.lambda < 0.0) throw std::invalid_argument("build_loss: lambda must be >= 0");
    if (cfg.loss == LossKind::SoftmaxXent && model.num_classes() < 2)
        throw std::invalid_argument("build_loss: softmax-cross-entropy needs >= 2 classes");

    LossGraph g;
    g.nodes = build_forward(g.tape, model, x_batch, noise_u);

    NodeId cls;
    if (cfg.loss == LossKind::SoftmaxXent) {
        cls = g.tape.mean(g.tape.softmax_xent(g.nodes.logits, labels));
    } else {
        cls = g.tape.mean(g.tape.hinge(g.tape.margin(g.nodes.logits, labels)));
    }
    g.parts.classification = g.tape.value(cls)[0];

    NodeId total = cls;

    if (cfg.wca_enabled) {
        NodeId a = g.tape.matmul(g.nodes.w, g.nodes.l);
        NodeId quad = g.tape.sum_rows(g.tape.mul(a, a));  // [C], entry i = w_i^T Sigma w_i
        const Tensor& qv = g.tape.value(quad);
        for (std::size_t i = 0; i < qv.size(); ++i)
            if (qv[i] <= cfg.ln_floor)
                throw std::domain_error("build_loss: w_i^T Sigma w_i at or below floor for class " +
                                        std::to_string(i));
        NodeId lwca = g.tape.sum(g.tape.log(quad));
        g.parts.wca = g.tape.value(lwca)[0];
        total = g.tape.add(total, g.tape.scale(lwca, -cfg.wca_coeff));
    }

    if (cfg.lambda > 0.0) {
        NodeId pen = g.tape.add(g.tape.sum(g.tape.mul(g.nodes.w, g.nodes.w)),
                                g.tape.sum(g.tape.mul(g.nodes.l, g.nodes.l)));
        if (cfg.penalize_bias)
            pen = g.tape.add(pen, g.tape.sum(g.tape.mul(g.nodes.b, g.nodes.b)));
        g.parts.penalty = g.tape.value(pen)[0];
        total = g.tape.add(total, g.tape.scale(pen, cfg.lambda));
    }

    g.loss = total;
    g.parts.total = g.tape.value(total)[0];
    return g;
}

ParamGrads collect_grads(const Tape& tape, const GraphNodes& nodes) {
    ParamGrads g;
    for (NodeId id : nodes.ext_w) g.ext_w.push_back(tape.grad(id));
    for (NodeId id : nodes.ext_b) g.ext_b.push_back(tape.grad(id));
    g.W = tape.grad(nodes.w);
    g.b = tape.grad(nodes.b);
    g.L = tape.grad(nodes.l);
    return g;
}

static void step_tensor(Tensor& param, const Tensor& grad, double lr, const char* name) {
    if (!grad.all_finite())
        throw std::runtime_error(std::string("sgd_step: non-finite gradient in ") + name +
                                 ", aborting (lr=" + std::to_string(lr) + ")");
    for (std::size_t i = 0; i < param.size(); ++i) param[i] -= lr * grad[i];
}

void sgd_step(StochasticClassifier& model, const ParamGrads& grads, double lr, const TrainMask& mask) {
    if (lr <= 0.0) throw std::invalid_argument("sgd_step: lr must be > 0");
    if (grads.ext_w.size() != model.extractor.num_layers() ||
        grads.ext_b.size() != model.extractor.num_layers())
        throw std::invalid_argument("sgd_step: gradient layout does not match the model");
    if (mask.extractor) {
        for (std::size_t l = 0; l < model.extractor.num_layers(); ++l) {
            step_tensor(model.extractor.weights[l], grads.ext_w[l], lr, "extractor weights");
            step_tensor(model.extractor.biases[l], grads.ext_b[l], lr, "extractor biases");
        }
    }
    if (mask.head) {
        step_tensor(model.head.W, grads.W, lr, "W");
        step_tensor(model.head.b, grads.b, lr, "b");
    }
    if (mask.noise) {
        step_tensor(model.head.L, grads.L, lr, "L");
    }
    mask_noise_factor(model.head);
}

}  // namespace wca
