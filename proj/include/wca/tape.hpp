#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "wca/tensor.hpp"

namespace wca {

using NodeId = std::size_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Reverse-mode autodiff over a fixed primitive set. Values are computed
/// eagerly at record time; backward() walks the tape in reverse creation
/// order, which is a reverse topological order by construction.
class Tape {
public:
    enum class Op {
        Leaf,
        Matmul,     // [m x k] * [k x n]
        MatmulNT,   // [m x k] * [n x k]^T
        Add,        // same shape
        AddBias,    // [m x n] + [n], broadcast over rows
        Mul,        // elementwise
        Relu,       // subgradient 0 at the kink
        Log,
        Scale,      // value * c
        Sum,        // all elements -> scalar
        SumRows,    // [m x n] -> [m]
        Mean,       // all elements -> scalar
        Hinge,      // elementwise max(0, 1 - m)
        SoftmaxXent,  // [n x C], labels -> [n] per-example loss
        Margin,     // [n x C], labels -> [n]; C == 1 takes labels in {-1, +1}
        QuadForm,   // w^T S w -> scalar
    };

    NodeId leaf(Tensor value);

    NodeId matmul(NodeId a, NodeId b);
    NodeId matmul_nt(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);
    NodeId add_bias(NodeId m, NodeId bias);
    NodeId mul(NodeId a, NodeId b);
    NodeId relu(NodeId a);
    NodeId log(NodeId a);
    NodeId scale(NodeId a, double c);
    NodeId sum(NodeId a);
    NodeId sum_rows(NodeId a);
    NodeId mean(NodeId a);
    NodeId hinge(NodeId margins);
    NodeId softmax_xent(NodeId logits, std::vector<int> labels);
    NodeId margin(NodeId logits, std::vector<int> labels);
    NodeId quad_form(NodeId w, NodeId sigma);

    /// Accumulates gradients of a scalar loss into every node. Throws if the
    /// loss node is not scalar.
    void backward(NodeId loss);

    const Tensor& value(NodeId id) const { return nodes_[id].value; }
    const Tensor& grad(NodeId id) const { return nodes_[id].grad; }
    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Op op;
        NodeId a = kNoNode;
        NodeId b = kNoNode;
        double c = 0.0;
        std::vector<int> labels;
        Tensor value;
        Tensor saved;  // op-specific forward state (softmax probs, runner-up index)
        Tensor grad;
    };

    NodeId push(Node n);
    const Tensor& val(NodeId id) const { return nodes_[id].value; }

    std::vector<Node> nodes_;
};

}  // namespace wca
