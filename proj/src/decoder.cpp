#include "attnkit/decoder.hpp"

#include <algorithm>
#include <cmath>

namespace attnkit {

namespace {

constexpr double kMaskScore = -1e30;

int argmax_lowest(const std::vector<double>& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

int sample_index(const std::vector<double>& probs, Rng& rng) {
    const double u = rng.uniform();
    double cdf = 0.0;
    for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
        cdf += probs[i];
        if (u < cdf) return i;
    }
    return static_cast<int>(probs.size()) - 1;
}

}  // namespace

Tensor decoder_init_state(const DecoderParams& dp, const ContextSet& ctx) {
    return tanh(add(matmul(dp.W_init, mean_of(ctx.vectors)), dp.b_init));
}

StepResult decode_step(const DecoderParams& dp, const AttentionParams& ap, AttentionMode mode,
                       const Tensor& z_prev, int y_prev, const ContextSet& ctx,
                       const Tensor& alpha_prev, Rng* rng, int forced_index) {
    if (ctx.size() < 1) throw ShapeError("decode_step: empty context set");
    if (y_prev < 0 || y_prev >= dp.tgt_embed.rows())
        throw ShapeError("decode_step: unknown symbol id " + std::to_string(y_prev) +
                         " for vocab " + std::to_string(dp.tgt_embed.rows()));
    Tensor emb = pick_row(dp.tgt_embed, y_prev);
    Tensor scores = mode == AttentionMode::Location
                        ? score_location_aware(ap, z_prev, ctx, alpha_prev)
                        : score_content(ap, z_prev, ctx);
    Tensor alpha = normalize(scores);

    AttentionState att;
    if (forced_index >= 0) {
        att.weights = alpha;
        att.readout = ctx.vectors[forced_index];
        att.mode = AttentionMode::Hard;
        att.sampled_index = forced_index;
        att.log_prob = log(pick(alpha, forced_index));
    } else if (mode == AttentionMode::Hard && rng) {
        att = read_hard(ctx, alpha, *rng);
    } else if (mode == AttentionMode::Hard) {
        // no RNG: deterministic argmax readout (evaluation mode)
        auto [readout, idx] = read_hard_argmax(ctx, alpha);
        att.weights = alpha;
        att.readout = readout;
        att.mode = AttentionMode::Hard;
        att.sampled_index = idx;
        att.log_prob = log(pick(alpha, idx));
    } else {
        att.weights = alpha;
        att.readout = read_soft(ctx, alpha);
        att.mode = AttentionMode::Soft;
    }
    att.scores = scores;

    Tensor z = gru_step(dp.cell, z_prev, concat({emb, att.readout}));
    Tensor dist = softmax(add(matmul(dp.O, concat({z, att.readout, emb})), dp.b_o));
    return {z, dist, att};
}

TeacherForcedResult teacher_forced_logprob(const DecoderParams& dp, const AttentionParams& ap,
                                           AttentionMode mode, const ContextSet& ctx,
                                           const std::vector<int>& target, Rng* rng,
                                           const std::vector<int>& forced_indices) {
    if (target.empty() || target.back() != kEos)
        throw ShapeError("teacher_forced_logprob: target must be nonempty and end with EOS");
    if (!forced_indices.empty() && forced_indices.size() != target.size())
        throw ShapeError("teacher_forced_logprob: forced index count mismatch");

    TeacherForcedResult result;
    Tensor z = decoder_init_state(dp, ctx);
    Tensor alpha_prev = uniform_weights(ctx.size());
    Tensor logp_y = Tensor::scalar(0.0);
    Tensor logp_r = Tensor::scalar(0.0);
    int y_prev = kBos;

    for (std::size_t t = 0; t < target.size(); ++t) {
        const int forced = forced_indices.empty() ? -1 : forced_indices[t];
        StepResult step = decode_step(dp, ap, mode, z, y_prev, ctx, alpha_prev, rng, forced);
        logp_y = add(logp_y, log(pick(step.dist, target[t])));
        if (step.att.sampled_index >= 0) {
            logp_r = add(logp_r, step.att.log_prob);
            result.indices.push_back(step.att.sampled_index);
        }
        result.trace.steps.push_back({step.z.value(), step.dist.value(), target[t],
                                      step.att.weights.value(), step.att.sampled_index});
        z = step.z;
        alpha_prev = step.att.weights;
        y_prev = target[t];
    }
    result.log_prob_y = logp_y;
    result.log_prob_r = logp_r;
    result.trace.total_log_prob = logp_y.item();
    return result;
}

std::pair<std::vector<int>, DecoderTrace> greedy_decode(const DecoderParams& dp,
                                                        const AttentionParams& ap,
                                                        AttentionMode mode, const ContextSet& ctx,
                                                        int max_len) {
    DecoderTrace trace;
    std::vector<int> out;
    Tensor z = decoder_init_state(dp, ctx);
    Tensor alpha_prev = uniform_weights(ctx.size());
    int y_prev = kBos;
    for (int t = 0; t < max_len; ++t) {
        StepResult step = decode_step(dp, ap, mode, z, y_prev, ctx, alpha_prev);
        const int sym = argmax_lowest(step.dist.value());
        trace.total_log_prob += std::log(step.dist[sym]);
        trace.steps.push_back({step.z.value(), step.dist.value(), sym, step.att.weights.value(),
                               step.att.sampled_index});
        out.push_back(sym);
        if (sym == kEos) break;
        z = step.z;
        alpha_prev = step.att.weights;
        y_prev = sym;
    }
    return {out, trace};
}

std::pair<std::vector<int>, double> sample_decode(const DecoderParams& dp,
                                                  const AttentionParams& ap, AttentionMode mode,
                                                  const ContextSet& ctx, int max_len, Rng& rng) {
    std::vector<int> out;
    double log_prob = 0.0;
    Tensor z = decoder_init_state(dp, ctx);
    Tensor alpha_prev = uniform_weights(ctx.size());
    int y_prev = kBos;
    for (int t = 0; t < max_len; ++t) {
        StepResult step = decode_step(dp, ap, mode, z, y_prev, ctx, alpha_prev, &rng);
        const int sym = sample_index(step.dist.value(), rng);
        log_prob += std::log(step.dist[sym]);
        out.push_back(sym);
        if (sym == kEos) break;
        z = step.z;
        alpha_prev = step.att.weights;
        y_prev = sym;
    }
    return {out, log_prob};
}

std::vector<BeamHypothesis> beam_decode(const DecoderParams& dp, const AttentionParams& ap,
                                        AttentionMode mode, const ContextSet& ctx, int beam_width,
                                        int max_len) {
    if (beam_width < 1) throw ShapeError("beam_decode: beam width must be >= 1");

    struct Live {
        std::vector<int> symbols;
        double log_prob;
        Tensor z;
        Tensor alpha;
        int y_prev;
    };
    std::vector<Live> live;
    live.push_back({{}, 0.0, decoder_init_state(dp, ctx), uniform_weights(ctx.size()), kBos});
    std::vector<BeamHypothesis> pool;

    auto pool_rank = [](const BeamHypothesis& a, const BeamHypothesis& b) {
        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
        if (a.completed_at != b.completed_at) return a.completed_at < b.completed_at;
        return a.symbols < b.symbols;
    };

    for (int step_idx = 1; step_idx <= max_len && !live.empty(); ++step_idx) {
        struct Cand {
            double log_prob;
            int parent;
            int symbol;
        };
        std::vector<Cand> cands;
        std::vector<StepResult> steps;
        steps.reserve(live.size());
        for (std::size_t h = 0; h < live.size(); ++h) {
            steps.push_back(decode_step(dp, ap, mode, live[h].z, live[h].y_prev, ctx,
                                        live[h].alpha));
            const auto& dist = steps.back().dist.value();
            for (int s = 0; s < static_cast<int>(dist.size()); ++s)
                cands.push_back({live[h].log_prob + std::log(dist[s]), static_cast<int>(h), s});
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
            if (a.parent != b.parent) return a.parent < b.parent;
            return a.symbol < b.symbol;
        });
        if (static_cast<int>(cands.size()) > beam_width) cands.resize(beam_width);

        std::vector<Live> next_live;
        for (const auto& c : cands) {
            std::vector<int> symbols = live[c.parent].symbols;
            symbols.push_back(c.symbol);
            if (c.symbol == kEos) {
                pool.push_back({std::move(symbols), c.log_prob, step_idx});
            } else if (step_idx == max_len) {
                // cut off at max length, retired as-is
                pool.push_back({std::move(symbols), c.log_prob, max_len});
            } else {
                next_live.push_back({std::move(symbols), c.log_prob, steps[c.parent].z,
                                     steps[c.parent].att.weights, c.symbol});
            }
        }
        live = std::move(next_live);

        // scores only decrease, so prune once no live hypothesis can enter the top B
        if (static_cast<int>(pool.size()) >= beam_width && !live.empty()) {
            std::sort(pool.begin(), pool.end(), pool_rank);
            double best_live = live[0].log_prob;
            for (const auto& h : live) best_live = std::max(best_live, h.log_prob);
            if (best_live <= pool[beam_width - 1].log_prob) break;
        }
    }

    std::sort(pool.begin(), pool.end(), pool_rank);
    if (static_cast<int>(pool.size()) > beam_width) pool.resize(beam_width);
    return pool;
}

PointerResult pointer_decode(const DecoderParams& dp, const AttentionParams& ap,
                             const ContextSet& ctx, bool mask_visited, int* repeat_steps) {
    const int m = ctx.size();
    PointerResult result;
    std::vector<double> mask(m, 0.0);
    std::vector<char> visited(m, 0);
    Tensor z = decoder_init_state(dp, ctx);
    if (repeat_steps) *repeat_steps = 0;
    for (int t = 0; t < m; ++t) {
        Tensor scores = score_content(ap, z, ctx);
        if (repeat_steps) {
            const int raw = argmax_lowest(scores.value());
            if (visited[raw]) ++*repeat_steps;
        }
        Tensor alpha = normalize(mask_visited ? add_const(scores, mask) : scores);
        const int choice = argmax_lowest(alpha.value());
        result.log_prob += std::log(alpha[choice]);
        result.trace.steps.push_back({z.value(), alpha.value(), choice, alpha.value(), choice});
        result.order.push_back(choice);
        visited[choice] = 1;
        mask[choice] = kMaskScore;
        Tensor readout = read_soft(ctx, alpha);
        z = gru_step(dp.cell, z, concat({ctx.vectors[choice], readout}));
    }
    result.trace.total_log_prob = result.log_prob;
    return result;
}

Tensor pointer_forced_logprob(const DecoderParams& dp, const AttentionParams& ap,
                              const ContextSet& ctx, const std::vector<int>& order,
                              bool mask_visited) {
    const int m = ctx.size();
    if (static_cast<int>(order.size()) != m)
        throw ShapeError("pointer_forced_logprob: order length " + std::to_string(order.size()) +
                         " for " + std::to_string(m) + " contexts");
    std::vector<double> mask(m, 0.0);
    Tensor z = decoder_init_state(dp, ctx);
    Tensor logp = Tensor::scalar(0.0);
    for (int t = 0; t < m; ++t) {
        Tensor scores = score_content(ap, z, ctx);
        Tensor alpha = normalize(mask_visited ? add_const(scores, mask) : scores);
        const int choice = order[t];
        logp = add(logp, log(pick(alpha, choice)));
        mask[choice] = kMaskScore;
        Tensor readout = read_soft(ctx, alpha);
        z = gru_step(dp.cell, z, concat({ctx.vectors[choice], readout}));
    }
    return logp;
}

}  // namespace attnkit
