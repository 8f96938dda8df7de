#pragma once

#include <utility>
#include <vector>

#include "attnkit/attention.hpp"
#include "attnkit/cells.hpp"
#include "attnkit/encoder.hpp"
#include "attnkit/rng.hpp"

namespace attnkit {

// Reserved symbol ids, shared by every symbol task.
inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;

// Conditional RNN-LM decoder with per-step attention. The state update
// consumes [embed(y_prev); c^t] and the output layer sees
// [z_t; c^t; embed(y_prev)]. In pointer mode the attention weights are
// the output distribution and the chosen context vector replaces the
// symbol embedding as input.
struct DecoderParams {
    GruParams cell;
    Tensor O;          // vocab x (hidden + d_c + d_emb)
    Tensor b_o;        // vocab
    Tensor tgt_embed;  // vocab x d_emb
    Tensor W_init;     // hidden x d_c
    Tensor b_init;     // hidden
};

struct DecoderStep {
    std::vector<double> z;
    std::vector<double> dist;
    int symbol = -1;
    std::vector<double> alpha;
    int hard_index = -1;
};

// Per-step record of the decode; alpha rows form the T' x M matrix used
// for alignment visualization.
struct DecoderTrace {
    std::vector<DecoderStep> steps;
    double total_log_prob = 0.0;
};

struct StepResult {
    Tensor z;
    Tensor dist;
    AttentionState att;
};

// One decoder step: attention on z_prev (content or location-aware per
// mode), readout (soft, or hard via rng / forced_index), GRU update,
// output distribution. forced_index >= 0 selects that context vector
// deterministically and records its log-probability (used by the
// enumeration oracles).
StepResult decode_step(const DecoderParams& dp, const AttentionParams& ap, AttentionMode mode,
                       const Tensor& z_prev, int y_prev, const ContextSet& ctx,
                       const Tensor& alpha_prev, Rng* rng = nullptr, int forced_index = -1);

Tensor decoder_init_state(const DecoderParams& dp, const ContextSet& ctx);

struct TeacherForcedResult {
    Tensor log_prob_y;          // log p(y | r, x); plain log p(y | x) in soft modes
    Tensor log_prob_r;          // log p(r | x), defined for hard / forced paths
    std::vector<int> indices;   // attention choices taken (hard / forced)
    DecoderTrace trace;
};

// Sum of per-step log-probs of the target symbols under teacher forcing.
// target must end with EOS. forced_indices, when nonempty, pins the hard
// attention choice at every step.
TeacherForcedResult teacher_forced_logprob(const DecoderParams& dp, const AttentionParams& ap,
                                           AttentionMode mode, const ContextSet& ctx,
                                           const std::vector<int>& target, Rng* rng = nullptr,
                                           const std::vector<int>& forced_indices = {});

std::pair<std::vector<int>, DecoderTrace> greedy_decode(const DecoderParams& dp,
                                                        const AttentionParams& ap,
                                                        AttentionMode mode, const ContextSet& ctx,
                                                        int max_len);

std::pair<std::vector<int>, double> sample_decode(const DecoderParams& dp,
                                                  const AttentionParams& ap, AttentionMode mode,
                                                  const ContextSet& ctx, int max_len, Rng& rng);

struct BeamHypothesis {
    std::vector<int> symbols;  // without BOS, includes EOS if finished
    double log_prob = 0.0;
    int completed_at = -1;     // step of EOS, max_len if cut off
};

// Standard beam over summed log-probs, no length normalization. Finished
// hypotheses retire to a pool; the top-B finished are returned, ties
// broken by earlier completion then lexicographic symbol order.
std::vector<BeamHypothesis> beam_decode(const DecoderParams& dp, const AttentionParams& ap,
                                        AttentionMode mode, const ContextSet& ctx, int beam_width,
                                        int max_len);

struct PointerResult {
    std::vector<int> order;  // permutation of 0..M-1
    double log_prob = 0.0;
    DecoderTrace trace;
};

// Greedy pointer decoding: the (masked) attention weights are the output
// distribution; exactly M steps. With masking, already-selected indices
// get score -1e30 before the softmax, so the output is a permutation by
// construction. Also counts steps where the unmasked argmax would have
// repeated a visited index.
PointerResult pointer_decode(const DecoderParams& dp, const AttentionParams& ap,
                             const ContextSet& ctx, bool mask_visited,
                             int* repeat_steps = nullptr);

// Teacher-forced log-probability of a given visit order (for training and
// for enumeration of tour probabilities).
Tensor pointer_forced_logprob(const DecoderParams& dp, const AttentionParams& ap,
                              const ContextSet& ctx, const std::vector<int>& order,
                              bool mask_visited);

}  // namespace attnkit
