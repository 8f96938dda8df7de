#include "attnkit/encoder.hpp"

#include <algorithm>

namespace attnkit {

ContextSet birnn_encode(const BiRnnParams& p, const std::vector<Tensor>& inputs) {
    if (inputs.empty()) throw ShapeError("birnn_encode: empty input sequence");
    auto fwd_states = unroll(gru_step, p.fwd, p.h0_fwd, inputs);
    std::vector<Tensor> reversed(inputs.rbegin(), inputs.rend());
    auto bwd_states = unroll(gru_step, p.bwd, p.h0_bwd, reversed);
    std::reverse(bwd_states.begin(), bwd_states.end());

    ContextSet ctx;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
        ctx.vectors.push_back(concat({fwd_states[t], bwd_states[t]}));
        ctx.positions.push_back({static_cast<int>(t), -1, {0, 0}, false});
    }
    return ctx;
}

ContextSet meanpool_encode(const MeanPoolParams& p, const std::vector<Tensor>& inputs) {
    if (inputs.empty()) throw ShapeError("meanpool_encode: empty input sequence");
    auto states = unroll(gru_step, p.cell, p.h0, inputs);
    ContextSet ctx;
    ctx.vectors.push_back(mean_of(states));
    ctx.positions.push_back({0, -1, {0, 0}, false});
    return ctx;
}

ContextSet point_encode(const PointEncoderParams& p,
                        const std::vector<std::array<double, 2>>& cities) {
    if (cities.size() < 2)
        throw ShapeError("point_encode: need at least 2 cities, got " +
                         std::to_string(cities.size()));
    std::vector<Tensor> lifted;
    lifted.reserve(cities.size());
    for (const auto& c : cities) {
        Tensor xy = Tensor::from_values({2}, {c[0], c[1]});
        lifted.push_back(tanh(add(matmul(p.W_lift, xy), p.b_lift)));
    }
    ContextSet ctx = birnn_encode(p.rnn, lifted);
    for (std::size_t i = 0; i < cities.size(); ++i) {
        ctx.positions[i].coords = cities[i];
        ctx.positions[i].has_coords = true;
    }
    return ctx;
}

}  // namespace attnkit
