#pragma once

// Shared helpers for the unit tests: random tensors mirrored into plain
// matrices so library results can be compared against the scalar oracles.

#include <vector>

#include "attnkit/cells.hpp"
#include "attnkit/model.hpp"
#include "attnkit/rng.hpp"
#include "attnkit/tensor.hpp"
#include "oracles.hpp"

namespace testutil {

using attnkit::Rng;
using attnkit::Tensor;

inline Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = -0.5,
                            double hi = 0.5, bool requires_grad = true) {
    std::size_t n = 1;
    for (int d : shape) n *= d;
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return Tensor::from_values(std::move(shape), std::move(v), requires_grad);
}

inline oracle::Vec to_vec(const Tensor& t) { return t.value(); }

inline oracle::Mat to_mat(const Tensor& t) {
    oracle::Mat m(t.rows(), oracle::Vec(t.cols()));
    for (int i = 0; i < t.rows(); ++i)
        for (int j = 0; j < t.cols(); ++j) m[i][j] = t.value()[i * t.cols() + j];
    return m;
}

inline attnkit::GruParams random_gru(int hidden, int input, Rng& rng) {
    attnkit::GruParams g;
    g.U = random_tensor({hidden, hidden}, rng);
    g.W = random_tensor({hidden, input}, rng);
    g.b = random_tensor({hidden}, rng);
    g.U_u = random_tensor({hidden, hidden}, rng);
    g.W_u = random_tensor({hidden, input}, rng);
    g.b_u = random_tensor({hidden}, rng);
    g.U_r = random_tensor({input, hidden}, rng);
    g.W_r = random_tensor({input, input}, rng);
    g.b_r = random_tensor({input}, rng);
    return g;
}

inline oracle::GruWeights mirror(const attnkit::GruParams& g) {
    return {to_mat(g.U),   to_mat(g.W),   to_vec(g.b),   to_mat(g.U_u), to_mat(g.W_u),
            to_vec(g.b_u), to_mat(g.U_r), to_mat(g.W_r), to_vec(g.b_r)};
}

inline bool close(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

inline bool close(const std::vector<double>& a, const std::vector<double>& b,
                  double tol = 1e-12) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > tol) return false;
    return true;
}

// small model for end-to-end tests; keeps the graphs cheap
inline attnkit::ModelConfig tiny_config(attnkit::TaskKind task,
                                        attnkit::AttentionMode mode,
                                        attnkit::EncoderKind enc = attnkit::EncoderKind::BiRnn) {
    attnkit::ModelConfig c;
    c.task = task;
    c.attention = mode;
    c.encoder = enc;
    c.vocab = 6;
    c.d_emb = 3;
    c.hidden = 4;
    c.d_a = 3;
    c.window = 3;
    return c;
}

}  // namespace testutil
