#include "attnkit/cells.hpp"

namespace attnkit {

Tensor tanh_cell_step(const TanhCellParams& p, const Tensor& h_prev, const Tensor& x) {
    return tanh(add(add(matmul(p.U, h_prev), matmul(p.W, x)), p.b));
}

Tensor gru_step(const GruParams& p, const Tensor& h_prev, const Tensor& x) {
    Tensor u = sigmoid(add(add(matmul(p.U_u, h_prev), matmul(p.W_u, x)), p.b_u));
    Tensor r = sigmoid(add(add(matmul(p.U_r, h_prev), matmul(p.W_r, x)), p.b_r));
    Tensor cand = tanh(add(add(matmul(p.U, h_prev), matmul(p.W, mul(r, x))), p.b));
    // h = u . cand + (1 - u) . h_prev = h_prev + u . (cand - h_prev)
    return add(h_prev, mul(u, sub(cand, h_prev)));
}

}  // namespace attnkit
