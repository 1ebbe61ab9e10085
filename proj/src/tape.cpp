#include "wca/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wca {

NodeId Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

NodeId Tape::leaf(Tensor value) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    Node n;
    n.op = Op::Matmul;
    n.a = a;
    n.b = b;
    n.value = wca::matmul(val(a), val(b));
    return push(std::move(n));
}

NodeId Tape::matmul_nt(NodeId a, NodeId b) {
    Node n;
    n.op = Op::MatmulNT;
    n.a = a;
    n.b = b;
    n.value = wca::matmul_nt(val(a), val(b));
    return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
    Node n;
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.value = wca::add(val(a), val(b));
    return push(std::move(n));
}

NodeId Tape::add_bias(NodeId m, NodeId bias) {
    const Tensor& mv = val(m);
    const Tensor& bv = val(bias);
    if (mv.rank() != 2 || bv.rank() != 1 || bv.size() != mv.cols())
        throw std::invalid_argument("add_bias: need [m x n] + [n], got " + mv.shape_str() + " and " + bv.shape_str());
    Node n;
    n.op = Op::AddBias;
    n.a = m;
    n.b = bias;
    n.value = mv;
    for (std::size_t i = 0; i < mv.rows(); ++i)
        for (std::size_t j = 0; j < mv.cols(); ++j) n.value.at(i, j) += bv[j];
    return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
    Node n;
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    n.value = hadamard(val(a), val(b));
    return push(std::move(n));
}

NodeId Tape::relu(NodeId a) {
    Node n;
    n.op = Op::Relu;
    n.a = a;
    n.value = val(a);
    for (std::size_t i = 0; i < n.value.size(); ++i)
        if (n.value[i] < 0.0) n.value[i] = 0.0;
    return push(std::move(n));
}

NodeId Tape::log(NodeId a) {
    const Tensor& av = val(a);
    Node n;
    n.op = Op::Log;
    n.a = a;
    n.value = av;
    for (std::size_t i = 0; i < av.size(); ++i) {
        if (av[i] <= 0.0)
            throw std::domain_error("log: non-positive input " + std::to_string(av[i]));
        n.value[i] = std::log(av[i]);
    }
    return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double c) {
    Node n;
    n.op = Op::Scale;
    n.a = a;
    n.c = c;
    n.value = wca::scale(val(a), c);
    return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
    Node n;
    n.op = Op::Sum;
    n.a = a;
    double s = 0.0;
    for (std::size_t i = 0; i < val(a).size(); ++i) s += val(a)[i];
    n.value = Tensor::vec({s});
    return push(std::move(n));
}

NodeId Tape::sum_rows(NodeId a) {
    const Tensor& av = val(a);
    if (av.rank() != 2) throw std::invalid_argument("sum_rows: rank-2 tensor required");
    Node n;
    n.op = Op::SumRows;
    n.a = a;
    n.value = Tensor({av.rows()});
    for (std::size_t i = 0; i < av.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < av.cols(); ++j) s += av.at(i, j);
        n.value[i] = s;
    }
    return push(std::move(n));
}

NodeId Tape::mean(NodeId a) {
    const Tensor& av = val(a);
    if (av.size() == 0) throw std::invalid_argument("mean: empty tensor");
    Node n;
    n.op = Op::Mean;
    n.a = a;
    double s = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) s += av[i];
    n.value = Tensor::vec({s / static_cast<double>(av.size())});
    return push(std::move(n));
}

NodeId Tape::hinge(NodeId margins) {
    const Tensor& mv = val(margins);
    Node n;
    n.op = Op::Hinge;
    n.a = margins;
    n.value = mv;
    for (std::size_t i = 0; i < mv.size(); ++i) n.value[i] = std::max(0.0, 1.0 - mv[i]);
    return push(std::move(n));
}

NodeId Tape::softmax_xent(NodeId logits, std::vector<int> labels) {
    const Tensor& z = val(logits);
    if (z.rank() != 2) throw std::invalid_argument("softmax_xent: rank-2 logits required");
    std::size_t nrows = z.rows(), c = z.cols();
    if (labels.size() != nrows) throw std::invalid_argument("softmax_xent: label count mismatch");
    Node n;
    n.op = Op::SoftmaxXent;
    n.a = logits;
    n.labels = std::move(labels);
    n.value = Tensor({nrows});
    n.saved = Tensor({nrows, c});
    for (std::size_t i = 0; i < nrows; ++i) {
        int y = n.labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= c)
            throw std::invalid_argument("softmax_xent: label out of range");
        double mx = z.at(i, 0);
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, z.at(i, j));
        double denom = 0.0;
        for (std::size_t j = 0; j < c; ++j) denom += std::exp(z.at(i, j) - mx);
        for (std::size_t j = 0; j < c; ++j) n.saved.at(i, j) = std::exp(z.at(i, j) - mx) / denom;
        n.value[i] = std::log(denom) + mx - z.at(i, static_cast<std::size_t>(y));
    }
    return push(std::move(n));
}

NodeId Tape::margin(NodeId logits, std::vector<int> labels) {
    const Tensor& z = val(logits);
    if (z.rank() != 2) throw std::invalid_argument("margin: rank-2 logits required");
    std::size_t nrows = z.rows(), c = z.cols();
    if (labels.size() != nrows) throw std::invalid_argument("margin: label count mismatch");
    Node n;
    n.op = Op::Margin;
    n.a = logits;
    n.labels = std::move(labels);
    n.value = Tensor({nrows});
    n.saved = Tensor({nrows});
    for (std::size_t i = 0; i < nrows; ++i) {
        int y = n.labels[i];
        if (c == 1) {
            if (y != 1 && y != -1)
                throw std::invalid_argument("margin: binary head takes labels in {-1, +1}");
            n.value[i] = static_cast<double>(y) * z.at(i, 0);
            continue;
        }
        if (y < 0 || static_cast<std::size_t>(y) >= c)
            throw std::invalid_argument("margin: label out of range");
        // Runner-up: best logit over the other classes, first index on ties.
        std::size_t best = (y == 0) ? 1 : 0;
        for (std::size_t j = 0; j < c; ++j) {
            if (j == static_cast<std::size_t>(y)) continue;
            if (z.at(i, j) > z.at(i, best)) best = j;
        }
        n.saved[i] = static_cast<double>(best);
        n.value[i] = z.at(i, static_cast<std::size_t>(y)) - z.at(i, best);
    }
    return push(std::move(n));
}

NodeId Tape::quad_form(NodeId w, NodeId sigma) {
    const Tensor& wv = val(w);
    const Tensor& sv = val(sigma);
    if (wv.rank() != 1 || sv.rank() != 2 || sv.rows() != sv.cols() || sv.rows() != wv.size())
        throw std::invalid_argument("quad_form: need [d] and [d x d], got " + wv.shape_str() + " and " + sv.shape_str());
    Node n;
    n.op = Op::QuadForm;
    n.a = w;
    n.b = sigma;
    double s = 0.0;
    std::size_t d = wv.size();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) s += wv[i] * sv.at(i, j) * wv[j];
    n.value = Tensor::vec({s});
    return push(std::move(n));
}

void Tape::backward(NodeId loss) {
    if (loss >= nodes_.size()) throw std::invalid_argument("backward: bad node id");
    if (nodes_[loss].value.size() != 1)
        throw std::invalid_argument("backward: loss node must be scalar, got " +
                                    nodes_[loss].value.shape_str());

    for (auto& n : nodes_) n.grad = Tensor(n.value.shape());
    nodes_[loss].grad[0] = 1.0;

    for (std::size_t idx = loss + 1; idx-- > 0;) {
        Node& n = nodes_[idx];
        const Tensor& g = n.grad;
        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::Matmul: {
                // ga += g * b^T ; gb += a^T * g
                const Tensor& av = val(n.a);
                const Tensor& bv = val(n.b);
                Tensor ga = wca::matmul_nt(g, bv);
                Tensor gb = wca::matmul(wca::transpose(av), g);
                nodes_[n.a].grad = wca::add(nodes_[n.a].grad, ga);
                nodes_[n.b].grad = wca::add(nodes_[n.b].grad, gb);
                break;
            }
            case Op::MatmulNT: {
                // value = a * b^T : ga += g * b ; gb += g^T * a
                const Tensor& av = val(n.a);
                const Tensor& bv = val(n.b);
                Tensor ga = wca::matmul(g, bv);
                Tensor gb = wca::matmul(wca::transpose(g), av);
                nodes_[n.a].grad = wca::add(nodes_[n.a].grad, ga);
                nodes_[n.b].grad = wca::add(nodes_[n.b].grad, gb);
                break;
            }
            case Op::Add: {
                nodes_[n.a].grad = wca::add(nodes_[n.a].grad, g);
                nodes_[n.b].grad = wca::add(nodes_[n.b].grad, g);
                break;
            }
            case Op::AddBias: {
                nodes_[n.a].grad = wca::add(nodes_[n.a].grad, g);
                Tensor& gb = nodes_[n.b].grad;
                for (std::size_t i = 0; i < g.rows(); ++i)
                    for (std::size_t j = 0; j < g.cols(); ++j) gb[j] += g.at(i, j);
                break;
            }
            case Op::Mul: {
                nodes_[n.a].grad = wca::add(nodes_[n.a].grad, hadamard(g, val(n.b)));
                nodes_[n.b].grad = wca::add(nodes_[n.b].grad, hadamard(g, val(n.a)));
                break;
            }
            case Op::Relu: {
                const Tensor& av = val(n.a);
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < av.size(); ++i)
                    if (av[i] > 0.0) ga[i] += g[i];
                break;
            }
            case Op::Log: {
                const Tensor& av = val(n.a);
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < av.size(); ++i) ga[i] += g[i] / av[i];
                break;
            }
            case Op::Scale: {
                nodes_[n.a].grad = wca::add(nodes_[n.a].grad, wca::scale(g, n.c));
                break;
            }
            case Op::Sum: {
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
                break;
            }
            case Op::SumRows: {
                Tensor& ga = nodes_[n.a].grad;
                const Tensor& av = val(n.a);
                for (std::size_t i = 0; i < av.rows(); ++i)
                    for (std::size_t j = 0; j < av.cols(); ++j) ga.at(i, j) += g[i];
                break;
            }
            case Op::Mean: {
                Tensor& ga = nodes_[n.a].grad;
                double w = g[0] / static_cast<double>(ga.size());
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += w;
                break;
            }
            case Op::Hinge: {
                const Tensor& av = val(n.a);
                Tensor& ga = nodes_[n.a].grad;
                for (std::size_t i = 0; i < av.size(); ++i)
                    if (av[i] < 1.0) ga[i] -= g[i];
                break;
            }
            case Op::SoftmaxXent: {
                Tensor& ga = nodes_[n.a].grad;
                std::size_t c = ga.cols();
                for (std::size_t i = 0; i < ga.rows(); ++i) {
                    auto y = static_cast<std::size_t>(n.labels[i]);
                    for (std::size_t j = 0; j < c; ++j) {
                        double p = n.saved.at(i, j);
                        ga.at(i, j) += g[i] * (p - (j == y ? 1.0 : 0.0));
                    }
                }
                break;
            }
            case Op::Margin: {
                Tensor& ga = nodes_[n.a].grad;
                std::size_t c = ga.cols();
                for (std::size_t i = 0; i < ga.rows(); ++i) {
                    if (c == 1) {
                        ga.at(i, 0) += g[i] * static_cast<double>(n.labels[i]);
                    } else {
                        auto y = static_cast<std::size_t>(n.labels[i]);
                        auto other = static_cast<std::size_t>(n.saved[i]);
                        ga.at(i, y) += g[i];
                        ga.at(i, other) -= g[i];
                    }
                }
                break;
            }
            case Op::QuadForm: {
                const Tensor& wv = val(n.a);
                const Tensor& sv = val(n.b);
                Tensor& gw = nodes_[n.a].grad;
                Tensor& gs = nodes_[n.b].grad;
                std::size_t d = wv.size();
                for (std::size_t i = 0; i < d; ++i) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < d; ++j)
                        s += (sv.at(i, j) + sv.at(j, i)) * wv[j];
                    gw[i] += g[0] * s;
                }
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < d; ++j) gs.at(i, j) += g[0] * wv[i] * wv[j];
                break;
            }
        }
    }
}

}  // namespace wca
