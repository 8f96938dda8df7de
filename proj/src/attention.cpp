#include "attnkit/attention.hpp"

namespace attnkit {

namespace {

Tensor dot(const Tensor& a, const Tensor& b) { return sum(mul(a, b)); }

}  // namespace

Tensor score_content(const AttentionParams& p, const Tensor& z_prev, const ContextSet& ctx) {
    Tensor wz = matmul(p.W_a, z_prev);
    std::vector<Tensor> scores;
    scores.reserve(ctx.vectors.size());
    for (const auto& c : ctx.vectors)
        scores.push_back(dot(p.v_a, tanh(add(wz, matmul(p.U_a, c)))));
    return concat(scores);
}

Tensor score_location_aware(const AttentionParams& p, const Tensor& z_prev,
                            const ContextSet& ctx, const Tensor& alpha_prev) {
    const int m = ctx.size();
    if (alpha_prev.rank() != 1 || alpha_prev.shape()[0] != m)
        throw ShapeError("score_location_aware: alpha_prev has shape " +
                         shape_str(alpha_prev.shape()) + ", expected [" + std::to_string(m) + "]");
    const int k = p.window;
    if (k <= 0 || k % 2 == 0)
        throw ShapeError("score_location_aware: window must be odd and positive, got " +
                         std::to_string(k));
    const int half = k / 2;
    Tensor wz = matmul(p.W_a, z_prev);
    std::vector<Tensor> scores;
    scores.reserve(m);
    for (int j = 0; j < m; ++j) {
        Tensor pre = add(wz, matmul(p.U_a, ctx.vectors[j]));
        for (int o = 0; o < k; ++o) {
            const int src = j + o - half;
            if (src < 0 || src >= m) continue;  // window truncated at boundaries
            pre = add(pre, scale_by(pick_row(p.V_loc, o), pick(alpha_prev, src)));
        }
        scores.push_back(dot(p.v_a, tanh(pre)));
    }
    return concat(scores);
}

Tensor normalize(const Tensor& scores, double temperature) {
    return softmax(scores, temperature);
}

Tensor read_soft(const ContextSet& ctx, const Tensor& alpha) {
    if (alpha.rank() != 1 || alpha.shape()[0] != ctx.size())
        throw ShapeError("read_soft: " + std::to_string(ctx.size()) + " contexts but weights " +
                         shape_str(alpha.shape()));
    return matmul(stack_cols(ctx.vectors), alpha);
}

AttentionState read_hard(const ContextSet& ctx, const Tensor& alpha, Rng& rng) {
    const int m = ctx.size();
    const double u = rng.uniform();
    double cdf = 0.0;
    int r = m - 1;
    for (int i = 0; i < m; ++i) {
        cdf += alpha[i];
        if (u < cdf) {
            r = i;
            break;
        }
    }
    AttentionState state;
    state.weights = alpha;
    state.readout = ctx.vectors[r];  // selection itself carries no gradient
    state.mode = AttentionMode::Hard;
    state.sampled_index = r;
    state.log_prob = log(pick(alpha, r));
    return state;
}

std::pair<Tensor, int> read_hard_argmax(const ContextSet& ctx, const Tensor& alpha) {
    int best = 0;
    for (int i = 1; i < ctx.size(); ++i)
        if (alpha[i] > alpha[best]) best = i;
    return {ctx.vectors[best], best};
}

Tensor uniform_weights(int m) {
    return Tensor::from_values({m}, std::vector<double>(m, 1.0 / m));
}

}  // namespace attnkit
