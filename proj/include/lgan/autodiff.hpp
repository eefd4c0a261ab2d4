#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lgan/matrix.hpp"

namespace lgan {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
struct Tensor {
    int id = -1;
    Tape* tape = nullptr;

    const Matrix& value() const;
    const Matrix& grad() const;
    int rows() const { return value().rows; }
    int cols() const { return value().cols; }
};

/// Reverse-mode gradient tape over dense 2-D tensors. Nodes are appended in
/// topological order; backward() walks them in reverse. Single-threaded.
class Tape {
public:
    Tensor input(Matrix value);                 // leaf that receives gradient
    Tensor constant(Matrix value);              // leaf excluded from gradients

    Tensor matmul(Tensor a, Tensor b);
    Tensor add(Tensor a, Tensor b);             // same shape
    Tensor add_rowvec(Tensor a, Tensor bias);   // bias is 1 x cols
    Tensor relu(Tensor a);
    Tensor scalar_mul(Tensor a, double s);
    Tensor concat_cols(const std::vector<Tensor>& parts);
    Tensor row_select(Tensor a, std::vector<int> rows);
    Tensor segment_sum(Tensor a, std::vector<int> segment_ids, int num_segments);
    Tensor row_scale(Tensor a, Tensor scale);   // scale is rows x 1, scales each row
    Tensor hadamard_const(Tensor a, Matrix mask);
    Tensor sum_all(Tensor a);                   // 1x1
    Tensor softmax_cross_entropy(Tensor logits, std::vector<int> labels);  // mean, 1x1

    /// Populates grads of every input reachable from the scalar loss.
    void backward(Tensor loss);

    const Matrix& value(Tensor t) const { return nodes_[t.id].value; }
    const Matrix& grad(Tensor t) const { return nodes_[t.id].grad; }
    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        std::vector<int> parents;
        std::function<void(Tape&, int)> backward_fn;  // (tape, own id)
    };

    int push(Matrix value, std::vector<int> parents, std::function<void(Tape&, int)> fn);
    Matrix& grad_ref(int id) { return nodes_[id].grad; }
    void accumulate(int id, int r, int c, double v) { nodes_[id].grad.at(r, c) += v; }

    std::vector<Node> nodes_;
    friend struct Tensor;
};

/// Named parameter set persisted across training steps; tensors are created
/// per step from these values.
struct NamedParam {
    std::string name;
    Matrix value;
};

struct ParamSet {
    std::vector<NamedParam> params;

    int index_of(const std::string& name) const;
    Matrix& operator[](const std::string& name);
    const Matrix& at(const std::string& name) const;
};

struct AdamState {
    long step = 0;
    std::vector<Matrix> m;
    std::vector<Matrix> v;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One Adam update with bias correction. grads[i] pairs with params.params[i].
/// Throws (naming the parameter) on non-finite gradients.
void adam_step(ParamSet& params, const std::vector<Matrix>& grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace lgan
