#pragma once

#include <vector>

#include "attnkit/tensor.hpp"

namespace attnkit {

// Recurrent transition functions. Both cells are pure: given parameters,
// a previous state and an input vector they return the next state as a
// fresh graph node.

struct TanhCellParams {
    Tensor U;  // hidden x hidden
    Tensor W;  // hidden x input
    Tensor b;  // hidden
};

struct GruParams {
    Tensor U, W, b;        // candidate state
    Tensor U_u, W_u, b_u;  // update gate
    Tensor U_r, W_r, b_r;  // reset gate
};

// h_t = tanh(U h_prev + W x + b)
Tensor tanh_cell_step(const TanhCellParams& p, const Tensor& h_prev, const Tensor& x);

// u = sigmoid(U_u h_prev + W_u x + b_u)
// r = sigmoid(U_r h_prev + W_r x + b_r)
// h~ = tanh(U h_prev + W (r . x) + b)
// h_t = u . h~ + (1 - u) . h_prev
//
// The reset gate multiplies the input, so r must have the input's
// dimension: U_r/W_r map to input-sized gates.
Tensor gru_step(const GruParams& p, const Tensor& h_prev, const Tensor& x);

template <typename Cell, typename Params>
std::vector<Tensor> unroll(Cell&& cell, const Params& params, const Tensor& h0,
                           const std::vector<Tensor>& inputs) {
    if (inputs.empty()) throw ShapeError("unroll: empty input sequence");
    std::vector<Tensor> states;
    states.reserve(inputs.size());
    Tensor h = h0;
    for (const auto& x : inputs) {
        h = cell(params, h, x);
        states.push_back(h);
    }
    return states;
}

}  // namespace attnkit
