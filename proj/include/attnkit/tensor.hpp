#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace attnkit {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reverse-mode autodiff over dense float-64 tensors of rank 1 or 2.
// The graph is dynamic: every operation allocates a node that keeps
// shared ownership of its parents, so a root tensor pins exactly the
// subgraph needed for backward. Row-major storage throughout.

class TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

class TensorNode {
public:
    std::vector<int> shape;      // {n} or {rows, cols}
    std::vector<double> value;   // row-major
    std::vector<double> grad;    // same size as value
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    // propagates this->grad into parents' grads
    std::function<void(TensorNode&)> backward_fn;

    std::size_t size() const { return value.size(); }
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(NodePtr n) : node_(std::move(n)) {}

    static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
    static Tensor from_values(std::vector<int> shape, std::vector<double> values,
                              bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const std::vector<int>& shape() const { return node_->shape; }
    int rank() const { return static_cast<int>(node_->shape.size()); }
    std::size_t size() const { return node_->size(); }
    int rows() const { return node_->shape.at(0); }
    int cols() const { return node_->shape.at(1); }

    std::vector<double>& value() { return node_->value; }
    const std::vector<double>& value() const { return node_->value; }
    std::vector<double>& grad() { return node_->grad; }
    const std::vector<double>& grad() const { return node_->grad; }
    bool requires_grad() const { return node_->requires_grad; }

    double item() const;
    double operator[](std::size_t i) const { return node_->value[i]; }

    void zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

    NodePtr node() const { return node_; }

private:
    NodePtr node_;
};

std::string shape_str(const std::vector<int>& s);

// ---- operations ----

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor log(const Tensor& x);
Tensor scale(const Tensor& x, double k);
Tensor scale_by(const Tensor& x, const Tensor& s);  // s is a scalar tensor
Tensor add_const(const Tensor& x, const std::vector<double>& c);
Tensor sum(const Tensor& x);                    // scalar
Tensor concat(const std::vector<Tensor>& xs);   // rank-1 pieces -> rank-1
Tensor stack_cols(const std::vector<Tensor>& cols);  // M vectors of dim d -> d x M
Tensor pick(const Tensor& x, int i);            // scalar x[i] from rank-1
Tensor pick_row(const Tensor& m, int i);        // rank-1 row from rank-2
Tensor mean_of(const std::vector<Tensor>& xs);  // elementwise mean of same-shape vectors

// numerically stable softmax over a rank-1 tensor; scores are divided
// by temperature before normalization
Tensor softmax(const Tensor& x, double temperature = 1.0);

// seeds grad 1 at a scalar root and runs reverse-mode accumulation over
// the reachable graph in reverse topological order
void backward(const Tensor& root);

// ---- gradient checking ----

struct GradCheckEntry {
    std::string name;
    double max_rel_err = 0.0;
};
struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double max_rel_err = 0.0;
    bool passed = false;
};

// Central finite differences against the analytic gradient of a scalar
// loss. loss_builder must rebuild the graph from the current parameter
// values on every call. Relative error per parameter entry is
// |analytic - numeric| / max(1, |numeric|).
GradCheckReport grad_check(const std::function<Tensor()>& loss_builder,
                           const std::vector<std::pair<std::string, Tensor>>& params,
                           double step = 1e-5, double tol = 1e-4);

}  // namespace attnkit
