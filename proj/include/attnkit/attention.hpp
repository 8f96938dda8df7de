#pragma once

#include <optional>
#include <vector>

#include "attnkit/encoder.hpp"
#include "attnkit/rng.hpp"
#include "attnkit/tensor.hpp"

namespace attnkit {

enum class AttentionMode { Soft, Hard, Location };

// Additive scorer: e_i = v_a' tanh(W_a z + U_a c_i [+ location term]).
// V_loc holds one d_a-vector per window offset (K rows, K odd).
struct AttentionParams {
    Tensor W_a;   // d_a x d_z
    Tensor U_a;   // d_a x d_c
    Tensor v_a;   // d_a  (stored as 1 x d_a for the final product)
    Tensor V_loc; // K x d_a, only for location-aware scoring
    int window = 0;  // K, 0 when location-awareness is off
};

struct AttentionState {
    Tensor scores;   // e^t, M
    Tensor weights;  // alpha^t, M
    Tensor readout;  // c^t, d_c
    AttentionMode mode = AttentionMode::Soft;
    int sampled_index = -1;   // hard mode only
    Tensor log_prob;          // log alpha_{r} of the sampled index (hard mode)
};

// Content-based scores; W_a z is computed once and shared across contexts.
Tensor score_content(const AttentionParams& p, const Tensor& z_prev, const ContextSet& ctx);

// Location-aware scores: adds sum_{k in window around j} v_k * alpha_prev[k]
// to the pre-tanh activation of context j. The window is truncated at the
// sequence boundaries (terms outside 1..M are dropped).
Tensor score_location_aware(const AttentionParams& p, const Tensor& z_prev,
                            const ContextSet& ctx, const Tensor& alpha_prev);

// Softmax over scores, optionally sharpened by a temperature applied
// before normalization.
Tensor normalize(const Tensor& scores, double temperature = 1.0);

// Weighted sum of the context vectors.
Tensor read_soft(const ContextSet& ctx, const Tensor& alpha);

// Samples an index from Cat(alpha) by inverse CDF on one uniform draw and
// returns the selected context vector verbatim. No gradient flows through
// the selection; log alpha_r is returned for the score-function estimator.
AttentionState read_hard(const ContextSet& ctx, const Tensor& alpha, Rng& rng);

// Deterministic evaluation mode: argmax index, lowest index on ties.
std::pair<Tensor, int> read_hard_argmax(const ContextSet& ctx, const Tensor& alpha);

// Uniform weights over M contexts (the alpha used before the first step).
Tensor uniform_weights(int m);

}  // namespace attnkit
