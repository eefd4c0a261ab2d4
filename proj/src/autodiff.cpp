#include "lgan/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace lgan {

const Matrix& Tensor::value() const { return tape->value(*this); }
const Matrix& Tensor::grad() const { return tape->grad(*this); }

int Tape::push(Matrix value, std::vector<int> parents, std::function<void(Tape&, int)> fn) {
    Node node;
    node.value = std::move(value);
    node.grad = Matrix::zeros(node.value.rows, node.value.cols);
    node.parents = std::move(parents);
    node.backward_fn = std::move(fn);
    node.requires_grad = false;
    for (int p : node.parents)
        if (nodes_[p].requires_grad) node.requires_grad = true;
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
}

Tensor Tape::input(Matrix value) {
    int id = push(std::move(value), {}, nullptr);
    nodes_[id].requires_grad = true;
    return {id, this};
}

Tensor Tape::constant(Matrix value) {
    int id = push(std::move(value), {}, nullptr);
    return {id, this};
}

namespace {
[[noreturn]] void shape_error(const std::string& op, const Matrix& a, const Matrix& b) {
    throw std::invalid_argument(op + ": incompatible shapes " + a.shape_str() + " and " +
                                b.shape_str());
}
}  // namespace

Tensor Tape::matmul(Tensor a, Tensor b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (av.cols != bv.rows) shape_error("matmul", av, bv);
    Matrix out(av.rows, bv.cols);
    // ikj order keeps the inner loop contiguous.
    for (int i = 0; i < av.rows; ++i) {
        const double* arow = &av.data[static_cast<size_t>(i) * av.cols];
        double* orow = &out.data[static_cast<size_t>(i) * out.cols];
        for (int k = 0; k < av.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = &bv.data[static_cast<size_t>(k) * bv.cols];
            for (int j = 0; j < bv.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    int id = push(std::move(out), {a.id, b.id}, [a, b](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        const Matrix& av = t.value(a);
        const Matrix& bv = t.value(b);
        if (t.nodes_[a.id].requires_grad) {
            Matrix& ga = t.grad_ref(a.id);  // g * b^T
            for (int i = 0; i < g.rows; ++i)
                for (int k = 0; k < bv.rows; ++k) {
                    double acc = 0.0;
                    for (int j = 0; j < g.cols; ++j) acc += g.at(i, j) * bv.at(k, j);
                    ga.at(i, k) += acc;
                }
        }
        if (t.nodes_[b.id].requires_grad) {
            Matrix& gb = t.grad_ref(b.id);  // a^T * g
            for (int k = 0; k < av.cols; ++k)
                for (int i = 0; i < av.rows; ++i) {
                    const double aik = av.at(i, k);
                    if (aik == 0.0) continue;
                    for (int j = 0; j < g.cols; ++j) gb.at(k, j) += aik * g.at(i, j);
                }
        }
    });
    return {id, this};
}

Tensor Tape::add(Tensor a, Tensor b) {
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    if (!av.same_shape(bv)) shape_error("add", av, bv);
    Matrix out = av;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] += bv.data[i];
    int id = push(std::move(out), {a.id, b.id}, [a, b](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        for (Tensor p : {a, b}) {
            if (!t.nodes_[p.id].requires_grad) continue;
            Matrix& gp = t.grad_ref(p.id);
            for (size_t i = 0; i < g.data.size(); ++i) gp.data[i] += g.data[i];
        }
    });
    return {id, this};
}

Tensor Tape::add_rowvec(Tensor a, Tensor bias) {
    const Matrix& av = value(a);
    const Matrix& bv = value(bias);
    if (bv.rows != 1 || bv.cols != av.cols) shape_error("add_rowvec", av, bv);
    Matrix out = av;
    for (int i = 0; i < out.rows; ++i)
        for (int j = 0; j < out.cols; ++j) out.at(i, j) += bv.at(0, j);
    int id = push(std::move(out), {a.id, bias.id}, [a, bias](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        if (t.nodes_[a.id].requires_grad) {
            Matrix& ga = t.grad_ref(a.id);
            for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
        }
        if (t.nodes_[bias.id].requires_grad) {
            Matrix& gb = t.grad_ref(bias.id);
            for (int i = 0; i < g.rows; ++i)
                for (int j = 0; j < g.cols; ++j) gb.at(0, j) += g.at(i, j);
        }
    });
    return {id, this};
}

Tensor Tape::relu(Tensor a) {
    Matrix out = value(a);
    for (double& x : out.data) x = x > 0.0 ? x : 0.0;
    int id = push(std::move(out), {a.id}, [a](Tape& t, int self) {
        if (!t.nodes_[a.id].requires_grad) return;
        const Matrix& g = t.nodes_[self].grad;
        const Matrix& av = t.value(a);
        Matrix& ga = t.grad_ref(a.id);
        for (size_t i = 0; i < g.data.size(); ++i)
            if (av.data[i] > 0.0) ga.data[i] += g.data[i];
    });
    return {id, this};
}

Tensor Tape::scalar_mul(Tensor a, double s) {
    Matrix out = value(a);
    for (double& x : out.data) x *= s;
    int id = push(std::move(out), {a.id}, [a, s](Tape& t, int self) {
        if (!t.nodes_[a.id].requires_grad) return;
        const Matrix& g = t.nodes_[self].grad;
        Matrix& ga = t.grad_ref(a.id);
        for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += s * g.data[i];
    });
    return {id, this};
}

Tensor Tape::concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
    int rows = value(parts[0]).rows;
    int cols = 0;
    for (Tensor p : parts) {
        if (value(p).rows != rows) shape_error("concat_cols", value(parts[0]), value(p));
        cols += value(p).cols;
    }
    Matrix out(rows, cols);
    int offset = 0;
    std::vector<int> parents;
    for (Tensor p : parts) {
        const Matrix& pv = value(p);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < pv.cols; ++j) out.at(i, offset + j) = pv.at(i, j);
        offset += pv.cols;
        parents.push_back(p.id);
    }
    std::vector<Tensor> parts_copy = parts;
    int id = push(std::move(out), std::move(parents), [parts_copy](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        int offset = 0;
        for (Tensor p : parts_copy) {
            const Matrix& pv = t.value(p);
            if (t.nodes_[p.id].requires_grad) {
                Matrix& gp = t.grad_ref(p.id);
                for (int i = 0; i < g.rows; ++i)
                    for (int j = 0; j < pv.cols; ++j) gp.at(i, j) += g.at(i, offset + j);
            }
            offset += pv.cols;
        }
    });
    return {id, this};
}

Tensor Tape::row_select(Tensor a, std::vector<int> rows) {
    const Matrix& av = value(a);
    for (int r : rows)
        if (r < 0 || r >= av.rows)
            throw std::invalid_argument("row_select: index " + std::to_string(r) +
                                        " out of range for " + av.shape_str());
    Matrix out(static_cast<int>(rows.size()), av.cols);
    for (size_t i = 0; i < rows.size(); ++i)
        for (int j = 0; j < av.cols; ++j) out.at(static_cast<int>(i), j) = av.at(rows[i], j);
    int id = push(std::move(out), {a.id}, [a, rows](Tape& t, int self) {
        if (!t.nodes_[a.id].requires_grad) return;
        const Matrix& g = t.nodes_[self].grad;
        Matrix& ga = t.grad_ref(a.id);
        for (size_t i = 0; i < rows.size(); ++i)
            for (int j = 0; j < g.cols; ++j) ga.at(rows[i], j) += g.at(static_cast<int>(i), j);
    });
    return {id, this};
}

Tensor Tape::segment_sum(Tensor a, std::vector<int> segment_ids, int num_segments) {
    const Matrix& av = value(a);
    if (static_cast<int>(segment_ids.size()) != av.rows)
        throw std::invalid_argument("segment_sum: got " + std::to_string(segment_ids.size()) +
                                    " segment ids for " + std::to_string(av.rows) + " rows");
    for (int s : segment_ids)
        if (s < 0 || s >= num_segments)
            throw std::invalid_argument("segment_sum: segment id " + std::to_string(s) +
                                        " outside [0," + std::to_string(num_segments) + ")");
    // Rows are added in input order; empty segments stay zero.
    Matrix out(num_segments, av.cols);
    for (int i = 0; i < av.rows; ++i)
        for (int j = 0; j < av.cols; ++j) out.at(segment_ids[i], j) += av.at(i, j);
    int id = push(std::move(out), {a.id}, [a, segment_ids](Tape& t, int self) {
        if (!t.nodes_[a.id].requires_grad) return;
        const Matrix& g = t.nodes_[self].grad;
        Matrix& ga = t.grad_ref(a.id);
        for (size_t i = 0; i < segment_ids.size(); ++i)
            for (int j = 0; j < g.cols; ++j)
                ga.at(static_cast<int>(i), j) += g.at(segment_ids[i], j);
    });
    return {id, this};
}

Tensor Tape::row_scale(Tensor a, Tensor scale) {
    const Matrix& av = value(a);
    const Matrix& sv = value(scale);
    if (sv.cols != 1 || sv.rows != av.rows) shape_error("row_scale", av, sv);
    Matrix out = av;
    for (int i = 0; i < out.rows; ++i)
        for (int j = 0; j < out.cols; ++j) out.at(i, j) *= sv.at(i, 0);
    int id = push(std::move(out), {a.id, scale.id}, [a, scale](Tape& t, int self) {
        const Matrix& g = t.nodes_[self].grad;
        const Matrix& av = t.value(a);
        const Matrix& sv = t.value(scale);
        if (t.nodes_[a.id].requires_grad) {
            Matrix& ga = t.grad_ref(a.id);
            for (int i = 0; i < g.rows; ++i)
                for (int j = 0; j < g.cols; ++j) ga.at(i, j) += g.at(i, j) * sv.at(i, 0);
        }
        if (t.nodes_[scale.id].requires_grad) {
            Matrix& gs = t.grad_ref(scale.id);
            for (int i = 0; i < g.rows; ++i) {
                double acc = 0.0;
                for (int j = 0; j < g.cols; ++j) acc += g.at(i, j) * av.at(i, j);
                gs.at(i, 0) += acc;
            }
        }
    });
    return {id, this};
}

Tensor Tape::hadamard_const(Tensor a, Matrix mask) {
    const Matrix& av = value(a);
    if (!av.same_shape(mask)) shape_error("hadamard_const", av, mask);
    Matrix out = av;
    for (size_t i = 0; i < out.data.size(); ++i) out.data[i] *= mask.data[i];
    auto mask_ptr = std::make_shared<Matrix>(std::move(mask));
    int id = push(std::move(out), {a.id}, [a, mask_ptr](Tape& t, int self) {
        if (!t.nodes_[a.id].requires_grad) return;
        const Matrix& g = t.nodes_[self].grad;
        Matrix& ga = t.grad_ref(a.id);
        for (size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * mask_ptr->data[i];
    });
    return {id, this};
}

Tensor Tape::sum_all(Tensor a) {
    const Matrix& av = value(a);
    Matrix out(1, 1);
    for (double x : av.data) out.data[0] += x;
    int id = push(std::move(out), {a.id}, [a](Tape& t, int self) {
        if (!t.nodes_[a.id].requires_grad) return;
        const double g = t.nodes_[self].grad.data[0];
        Matrix& ga = t.grad_ref(a.id);
        for (double& x : ga.data) x += g;
    });
    return {id, this};
}

Tensor Tape::softmax_cross_entropy(Tensor logits, std::vector<int> labels) {
    const Matrix& lv = value(logits);
    if (static_cast<int>(labels.size()) != lv.rows)
        throw std::invalid_argument("softmax_cross_entropy: " + std::to_string(labels.size()) +
                                    " labels for " + std::to_string(lv.rows) + " rows");
    for (int y : labels)
        if (y < 0 || y >= lv.cols)
            throw std::invalid_argument("softmax_cross_entropy: label " + std::to_string(y) +
                                        " outside [0," + std::to_string(lv.cols) + ")");
    // Mean negative log-likelihood with the usual max-shift for stability.
    auto softmax = std::make_shared<Matrix>(lv.rows, lv.cols);
    double loss = 0.0;
    for (int i = 0; i < lv.rows; ++i) {
        double mx = lv.at(i, 0);
        for (int j = 1; j < lv.cols; ++j) mx = std::max(mx, lv.at(i, j));
        double z = 0.0;
        for (int j = 0; j < lv.cols; ++j) z += std::exp(lv.at(i, j) - mx);
        for (int j = 0; j < lv.cols; ++j) softmax->at(i, j) = std::exp(lv.at(i, j) - mx) / z;
        loss -= std::log(std::max(softmax->at(i, labels[i]), 1e-300));
    }
    loss /= lv.rows;
    Matrix out(1, 1);
    out.data[0] = loss;
    int id = push(std::move(out), {logits.id}, [logits, labels, softmax](Tape& t, int self) {
        if (!t.nodes_[logits.id].requires_grad) return;
        const double g = t.nodes_[self].grad.data[0];
        Matrix& gl = t.grad_ref(logits.id);
        const double inv_batch = 1.0 / softmax->rows;
        for (int i = 0; i < softmax->rows; ++i)
            for (int j = 0; j < softmax->cols; ++j) {
                double d = softmax->at(i, j) - (labels[i] == j ? 1.0 : 0.0);
                gl.at(i, j) += g * d * inv_batch;
            }
    });
    return {id, this};
}

void Tape::backward(Tensor loss) {
    const Matrix& lv = value(loss);
    if (lv.rows != 1 || lv.cols != 1)
        throw std::invalid_argument("backward: loss must be scalar, got " + lv.shape_str());

    // Restrict the sweep to nodes reachable from the loss.
    std::vector<bool> reachable(nodes_.size(), false);
    std::vector<int> stack{loss.id};
    reachable[loss.id] = true;
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        for (int p : nodes_[id].parents)
            if (!reachable[p]) {
                reachable[p] = true;
                stack.push_back(p);
            }
    }

    nodes_[loss.id].grad.data[0] = 1.0;
    for (int id = loss.id; id >= 0; --id) {
        if (!reachable[id] || !nodes_[id].requires_grad) continue;
        if (nodes_[id].backward_fn) nodes_[id].backward_fn(*this, id);
    }
}

int ParamSet::index_of(const std::string& name) const {
    for (size_t i = 0; i < params.size(); ++i)
        if (params[i].name == name) return static_cast<int>(i);
    return -1;
}

Matrix& ParamSet::operator[](const std::string& name) {
    int i = index_of(name);
    if (i < 0) throw std::out_of_range("no parameter named " + name);
    return params[i].value;
}

const Matrix& ParamSet::at(const std::string& name) const {
    int i = index_of(name);
    if (i < 0) throw std::out_of_range("no parameter named " + name);
    return params[i].value;
}

void adam_step(ParamSet& params, const std::vector<Matrix>& grads, AdamState& state,
               const AdamConfig& cfg) {
    if (grads.size() != params.params.size())
        throw std::invalid_argument("adam_step: gradient count does not match parameter count");
    if (state.m.empty()) {
        for (const auto& p : params.params) {
            state.m.push_back(Matrix::zeros(p.value.rows, p.value.cols));
            state.v.push_back(Matrix::zeros(p.value.rows, p.value.cols));
        }
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.params.size(); ++i) {
        Matrix& p = params.params[i].value;
        const Matrix& g = grads[i];
        if (!p.same_shape(g))
            throw std::invalid_argument("adam_step: shape mismatch for " + params.params[i].name);
        for (size_t k = 0; k < p.data.size(); ++k) {
            if (!std::isfinite(g.data[k]))
                throw std::runtime_error("adam_step: non-finite gradient for parameter " +
                                         params.params[i].name);
            double& m = state.m[i].data[k];
            double& v = state.v[i].data[k];
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g.data[k];
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.data[k] * g.data[k];
            const double mhat = m / bc1;
            const double vhat = v / bc2;
            p.data[k] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

}  // namespace lgan
