#include "attnkit/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace attnkit {

std::string shape_str(const std::vector<int>& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << "x";
        os << s[i];
    }
    os << "]";
    return os.str();
}

namespace {

std::size_t numel(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw ShapeError("tensor dimension must be positive, got shape " + shape_str(shape));
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

NodePtr make_node(std::vector<int> shape, std::vector<double> value, bool requires_grad) {
    auto n = std::make_shared<TensorNode>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    n->grad.assign(n->value.size(), 0.0);
    n->requires_grad = requires_grad;
    return n;
}

// result requires grad iff any parent does; parents are captured so the
// graph stays alive as long as the result is referenced
Tensor make_op(std::vector<int> shape, std::vector<double> value,
               std::vector<Tensor> parents, std::function<void(TensorNode&)> back) {
    auto n = make_node(std::move(shape), std::move(value), false);
    for (const auto& p : parents) {
        n->parents.push_back(p.node());
        if (p.requires_grad()) n->requires_grad = true;
    }
    if (n->requires_grad) n->backward_fn = std::move(back);
    return Tensor(n);
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
}

}  // namespace

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
    std::size_t n = numel(shape);
    return Tensor(make_node(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

Tensor Tensor::from_values(std::vector<int> shape, std::vector<double> values, bool requires_grad) {
    if (numel(shape) != values.size())
        throw ShapeError("from_values: " + std::to_string(values.size()) +
                         " values for shape " + shape_str(shape));
    return Tensor(make_node(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    return from_values({1}, {v}, requires_grad);
}

double Tensor::item() const {
    if (size() != 1) throw ShapeError("item: tensor has " + std::to_string(size()) + " elements");
    return node_->value[0];
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2)
        throw ShapeError("matmul: left operand must be rank 2, got " + shape_str(a.shape()));
    const int m = a.rows(), k = a.cols();
    const bool vec = b.rank() == 1;
    const int k2 = vec ? b.shape()[0] : b.rows();
    const int n = vec ? 1 : b.cols();
    if (k != k2)
        throw ShapeError("matmul: inner dimensions disagree, " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
    std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
    const auto& av = a.value();
    const auto& bv = b.value();
    for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            for (int j = 0; j < n; ++j) out[i * n + j] += aip * bv[p * n + j];
        }
    std::vector<int> out_shape = vec ? std::vector<int>{m} : std::vector<int>{m, n};
    return make_op(std::move(out_shape), std::move(out), {a, b},
                   [m, k, n](TensorNode& self) {
                       auto& pa = *self.parents[0];
                       auto& pb = *self.parents[1];
                       // dA = dC * B^T, dB = A^T * dC
                       if (pa.requires_grad)
                           for (int i = 0; i < m; ++i)
                               for (int p = 0; p < k; ++p) {
                                   double acc = 0.0;
                                   for (int j = 0; j < n; ++j)
                                       acc += self.grad[i * n + j] * pb.value[p * n + j];
                                   pa.grad[i * k + p] += acc;
                               }
                       if (pb.requires_grad)
                           for (int p = 0; p < k; ++p)
                               for (int j = 0; j < n; ++j) {
                                   double acc = 0.0;
                                   for (int i = 0; i < m; ++i)
                                       acc += pa.value[i * k + p] * self.grad[i * n + j];
                                   pb.grad[p * n + j] += acc;
                               }
                   });
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
    return make_op(a.shape(), std::move(out), {a, b}, [](TensorNode& self) {
        for (auto& p : self.parents)
            if (p->requires_grad)
                for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
    return make_op(a.shape(), std::move(out), {a, b}, [](TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            if (pa.requires_grad) pa.grad[i] += self.grad[i];
            if (pb.requires_grad) pb.grad[i] -= self.grad[i];
        }
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
    return make_op(a.shape(), std::move(out), {a, b}, [](TensorNode& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            if (pa.requires_grad) pa.grad[i] += self.grad[i] * pb.value[i];
            if (pb.requires_grad) pb.grad[i] += self.grad[i] * pa.value[i];
        }
    });
}

Tensor tanh(const Tensor& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x.value()[i]);
    return make_op(x.shape(), std::move(out), {x}, [](TensorNode& self) {
        auto& p = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            p.grad[i] += self.grad[i] * (1.0 - self.value[i] * self.value[i]);
    });
}

Tensor sigmoid(const Tensor& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double v = x.value()[i];
        out[i] = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    return make_op(x.shape(), std::move(out), {x}, [](TensorNode& self) {
        auto& p = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            p.grad[i] += self.grad[i] * self.value[i] * (1.0 - self.value[i]);
    });
}

Tensor log(const Tensor& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(x.value()[i]);
    return make_op(x.shape(), std::move(out), {x}, [](TensorNode& self) {
        auto& p = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i)
            p.grad[i] += self.grad[i] / p.value[i];
    });
}

Tensor scale(const Tensor& x, double k) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] * k;
    return make_op(x.shape(), std::move(out), {x}, [k](TensorNode& self) {
        auto& p = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * k;
    });
}

Tensor scale_by(const Tensor& x, const Tensor& s) {
    if (s.size() != 1) throw ShapeError("scale_by: scalar expected, got " + shape_str(s.shape()));
    const double k = s.value()[0];
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] * k;
    return make_op(x.shape(), std::move(out), {x, s}, [](TensorNode& self) {
        auto& px = *self.parents[0];
        auto& ps = *self.parents[1];
        const double k = ps.value[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            if (px.requires_grad) px.grad[i] += self.grad[i] * k;
            if (ps.requires_grad) ps.grad[0] += self.grad[i] * px.value[i];
        }
    });
}

Tensor add_const(const Tensor& x, const std::vector<double>& c) {
    if (c.size() != x.size())
        throw ShapeError("add_const: constant size " + std::to_string(c.size()) +
                         " vs tensor " + shape_str(x.shape()));
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.value()[i] + c[i];
    return make_op(x.shape(), std::move(out), {x}, [](TensorNode& self) {
        auto& p = *self.parents[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i];
    });
}

Tensor sum(const Tensor& x) {
    double s = 0.0;
    for (double v : x.value()) s += v;
    return make_op({1}, {s}, {x}, [](TensorNode& self) {
        auto& p = *self.parents[0];
        for (auto& g : p.grad) g += self.grad[0];
    });
}

Tensor concat(const std::vector<Tensor>& xs) {
    if (xs.empty()) throw ShapeError("concat: no operands");
    std::vector<double> out;
    std::vector<Tensor> parents;
    for (const auto& x : xs) {
        if (x.rank() != 1) throw ShapeError("concat: operands must be rank 1");
        out.insert(out.end(), x.value().begin(), x.value().end());
        parents.push_back(x);
    }
    const int total = static_cast<int>(out.size());
    return make_op({total}, std::move(out), parents,
                   [](TensorNode& self) {
                       std::size_t off = 0;
                       for (auto& p : self.parents) {
                           if (p->requires_grad)
                               for (std::size_t i = 0; i < p->grad.size(); ++i)
                                   p->grad[i] += self.grad[off + i];
                           off += p->value.size();
                       }
                   });
}

Tensor stack_cols(const std::vector<Tensor>& cols) {
    if (cols.empty()) throw ShapeError("stack_cols: no columns");
    const int d = cols[0].shape()[0];
    const int m = static_cast<int>(cols.size());
    std::vector<double> out(static_cast<std::size_t>(d) * m);
    std::vector<Tensor> parents;
    for (int j = 0; j < m; ++j) {
        if (cols[j].rank() != 1 || cols[j].shape()[0] != d)
            throw ShapeError("stack_cols: column " + std::to_string(j) + " has shape " +
                             shape_str(cols[j].shape()) + ", expected [" + std::to_string(d) + "]");
        for (int i = 0; i < d; ++i) out[i * m + j] = cols[j].value()[i];
        parents.push_back(cols[j]);
    }
    return make_op({d, m}, std::move(out), parents, [d, m](TensorNode& self) {
        for (int j = 0; j < m; ++j) {
            auto& p = *self.parents[j];
            if (!p.requires_grad) continue;
            for (int i = 0; i < d; ++i) p.grad[i] += self.grad[i * m + j];
        }
    });
}

Tensor pick(const Tensor& x, int i) {
    if (x.rank() != 1) throw ShapeError("pick: rank-1 tensor expected, got " + shape_str(x.shape()));
    if (i < 0 || i >= x.shape()[0])
        throw ShapeError("pick: index " + std::to_string(i) + " out of range for " + shape_str(x.shape()));
    return make_op({1}, {x.value()[i]}, {x}, [i](TensorNode& self) {
        self.parents[0]->grad[i] += self.grad[0];
    });
}

Tensor pick_row(const Tensor& m, int i) {
    if (m.rank() != 2) throw ShapeError("pick_row: rank-2 tensor expected, got " + shape_str(m.shape()));
    if (i < 0 || i >= m.rows())
        throw ShapeError("pick_row: row " + std::to_string(i) + " out of range for " + shape_str(m.shape()));
    const int c = m.cols();
    std::vector<double> out(m.value().begin() + static_cast<std::size_t>(i) * c,
                            m.value().begin() + static_cast<std::size_t>(i + 1) * c);
    return make_op({c}, std::move(out), {m}, [i, c](TensorNode& self) {
        auto& p = *self.parents[0];
        for (int j = 0; j < c; ++j) p.grad[static_cast<std::size_t>(i) * c + j] += self.grad[j];
    });
}

Tensor mean_of(const std::vector<Tensor>& xs) {
    if (xs.empty()) throw ShapeError("mean_of: no operands");
    Tensor acc = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) acc = add(acc, xs[i]);
    return scale(acc, 1.0 / static_cast<double>(xs.size()));
}

Tensor softmax(const Tensor& x, double temperature) {
    if (x.rank() != 1) throw ShapeError("softmax: rank-1 tensor expected, got " + shape_str(x.shape()));
    const int n = x.shape()[0];
    std::vector<double> scaled(n);
    for (int i = 0; i < n; ++i) {
        const double v = x.value()[i] / temperature;
        if (!std::isfinite(v)) throw NumericError("softmax: non-finite input at index " + std::to_string(i));
        scaled[i] = v;
    }
    const double mx = *std::max_element(scaled.begin(), scaled.end());
    std::vector<double> out(n);
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
        out[i] = std::exp(scaled[i] - mx);
        z += out[i];
    }
    for (int i = 0; i < n; ++i) out[i] /= z;
    return make_op({n}, std::move(out), {x}, [n, temperature](TensorNode& self) {
        auto& p = *self.parents[0];
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += self.grad[i] * self.value[i];
        for (int i = 0; i < n; ++i)
            p.grad[i] += self.value[i] * (self.grad[i] - dot) / temperature;
    });
}

void backward(const Tensor& root) {
    if (root.size() != 1)
        throw ShapeError("backward: root must be scalar, got " + shape_str(root.shape()));
    // reverse topological order by iterative post-order DFS
    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> seen;
    std::vector<std::pair<TensorNode*, std::size_t>> stack;
    stack.emplace_back(root.node().get(), 0);
    seen.insert(root.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            TensorNode* p = node->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    // interior nodes may still hold gradients from an earlier backward over
    // a shared subgraph; only leaves accumulate across calls
    for (TensorNode* n : order)
        if (n->backward_fn) n->grad.assign(n->grad.size(), 0.0);
    root.node()->grad[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it)
        if ((*it)->backward_fn) (*it)->backward_fn(**it);
}

GradCheckReport grad_check(const std::function<Tensor()>& loss_builder,
                           const std::vector<std::pair<std::string, Tensor>>& params,
                           double step, double tol) {
    // analytic pass
    for (auto& [name, p] : params) p.node()->grad.assign(p.size(), 0.0);
    Tensor loss = loss_builder();
    backward(loss);
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (auto& [name, p] : params) analytic.push_back(p.grad());

    GradCheckReport report;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& [name, p] = params[pi];
        GradCheckEntry entry{name, 0.0};
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double saved = p.value()[i];
            p.node()->value[i] = saved + step;
            const double up = loss_builder().item();
            p.node()->value[i] = saved - step;
            const double dn = loss_builder().item();
            p.node()->value[i] = saved;
            const double numeric = (up - dn) / (2.0 * step);
            const double rel = std::abs(analytic[pi][i] - numeric) / std::max(1.0, std::abs(numeric));
            entry.max_rel_err = std::max(entry.max_rel_err, rel);
        }
        report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
        report.entries.push_back(std::move(entry));
    }
    report.passed = report.max_rel_err <= tol;
    return report;
}

}  // namespace attnkit
