#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "attnkit/decoder.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace attnkit;
using testutil::close;
using testutil::random_gru;
using testutil::random_tensor;

namespace {

ContextSet random_ctx(int m, int d, Rng& rng) {
    ContextSet ctx;
    for (int i = 0; i < m; ++i) {
        ctx.vectors.push_back(testutil::random_tensor({d}, rng));
        ctx.positions.push_back({i, -1, {0, 0}, false});
    }
    return ctx;
}

DecoderParams random_decoder(int vocab, int d_emb, int hidden, int d_c, Rng& rng) {
    DecoderParams dp;
    dp.cell = random_gru(hidden, d_emb + d_c, rng);
    dp.O = testutil::random_tensor({vocab, hidden + d_c + d_emb}, rng);
    dp.b_o = testutil::random_tensor({vocab}, rng);
    dp.tgt_embed = testutil::random_tensor({vocab, d_emb}, rng);
    dp.W_init = testutil::random_tensor({hidden, d_c}, rng);
    dp.b_init = testutil::random_tensor({hidden}, rng);
    return dp;
}

AttentionParams random_attn(int d_a, int d_z, int d_c, Rng& rng) {
    AttentionParams p;
    p.W_a = testutil::random_tensor({d_a, d_z}, rng);
    p.U_a = testutil::random_tensor({d_a, d_c}, rng);
    p.v_a = testutil::random_tensor({d_a}, rng);
    return p;
}

// pointer decoding feeds [chosen context; readout], so the cell input is 2 d_c
DecoderParams random_pointer_decoder(int hidden, int d_c, Rng& rng) {
    DecoderParams dp;
    dp.cell = random_gru(hidden, 2 * d_c, rng);
    dp.W_init = testutil::random_tensor({hidden, d_c}, rng);
    dp.b_init = testutil::random_tensor({hidden}, rng);
    return dp;
}

// log-probability of emitting exactly these symbols, computed step by
// step with decode_step (independent of beam bookkeeping)
double forced_symbols_logprob(const DecoderParams& dp, const AttentionParams& ap,
                              const ContextSet& ctx, const std::vector<int>& symbols) {
    Tensor z = decoder_init_state(dp, ctx);
    Tensor alpha = uniform_weights(ctx.size());
    int y_prev = kBos;
    double logp = 0.0;
    for (int sym : symbols) {
        StepResult step = decode_step(dp, ap, AttentionMode::Soft, z, y_prev, ctx, alpha);
        logp += std::log(step.dist[sym]);
        z = step.z;
        alpha = step.att.weights;
        y_prev = sym;
    }
    return logp;
}

}  // namespace

TEST_CASE("decode_step: single context reduces to a plain conditional step") {
    Rng rng(51);
    ContextSet ctx = random_ctx(1, 3, rng);
    DecoderParams dp = random_decoder(4, 2, 3, 3, rng);
    AttentionParams ap = random_attn(2, 3, 3, rng);
    Tensor z0 = decoder_init_state(dp, ctx);
    StepResult step = decode_step(dp, ap, AttentionMode::Soft, z0, kBos, ctx,
                                  uniform_weights(1));
    CHECK(step.att.readout.value() == ctx.vectors[0].value());
    double total = 0.0;
    for (double v : step.dist.value()) total += v;
    CHECK(std::abs(total - 1.0) <= 1e-9);
}

TEST_CASE("decode_step: identical context vectors make the readout weight-free") {
    Rng rng(52);
    Tensor v = random_tensor({3}, rng);
    ContextSet ctx;
    for (int i = 0; i < 2; ++i) {
        ctx.vectors.push_back(v);
        ctx.positions.push_back({i, -1, {0, 0}, false});
    }
    DecoderParams dp = random_decoder(4, 2, 3, 3, rng);
    AttentionParams ap = random_attn(2, 3, 3, rng);
    Tensor z0 = decoder_init_state(dp, ctx);
    StepResult step = decode_step(dp, ap, AttentionMode::Soft, z0, kBos, ctx,
                                  uniform_weights(2));
    CHECK(close(step.att.readout.value(), v.value(), 1e-12));
}

TEST_CASE("decode_step rejects unknown symbols") {
    Rng rng(53);
    ContextSet ctx = random_ctx(2, 3, rng);
    DecoderParams dp = random_decoder(4, 2, 3, 3, rng);
    AttentionParams ap = random_attn(2, 3, 3, rng);
    Tensor z0 = decoder_init_state(dp, ctx);
    CHECK_THROWS_AS(decode_step(dp, ap, AttentionMode::Soft, z0, 9, ctx, uniform_weights(2)),
                    ShapeError);
}

TEST_CASE("decode_step matches scalar oracle on a 3-context instance") {
    Rng rng(54);
    ContextSet ctx = random_ctx(3, 3, rng);
    DecoderParams dp = random_decoder(2 + 2, 2, 3, 3, rng);  // 2 payload + BOS/EOS-ish ids
    AttentionParams ap = random_attn(2, 3, 3, rng);
    Tensor z0 = decoder_init_state(dp, ctx);
    StepResult step = decode_step(dp, ap, AttentionMode::Soft, z0, kBos, ctx,
                                  uniform_weights(3));

    // scalar recomputation of the whole step
    oracle::Mat cmat;
    for (const auto& c : ctx.vectors) cmat.push_back(c.value());
    auto scores = oracle::attention_scores(testutil::to_mat(ap.W_a), testutil::to_mat(ap.U_a),
                                           ap.v_a.value(), z0.value(), cmat);
    auto alpha = oracle::softmax(scores);
    oracle::Vec readout(3, 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) readout[j] += alpha[i] * cmat[i][j];

    oracle::Vec emb(dp.tgt_embed.value().begin() + kBos * 2,
                    dp.tgt_embed.value().begin() + kBos * 2 + 2);
    oracle::Vec x = emb;
    x.insert(x.end(), readout.begin(), readout.end());
    auto z = oracle::gru_step(testutil::mirror(dp.cell), z0.value(), x);

    oracle::Vec feat = z;
    feat.insert(feat.end(), readout.begin(), readout.end());
    feat.insert(feat.end(), emb.begin(), emb.end());
    auto logits = oracle::add(oracle::matvec(testutil::to_mat(dp.O), feat), dp.b_o.value());
    auto dist = oracle::softmax(logits);

    CHECK(close(step.att.weights.value(), alpha, 1e-12));
    CHECK(close(step.z.value(), z, 1e-12));
    CHECK(close(step.dist.value(), dist, 1e-12));
}

TEST_CASE("teacher forcing: symmetric output layer gives uniform per-step log-probs") {
    Rng rng(55);
    const int vocab = 4;
    ContextSet ctx = random_ctx(2, 3, rng);
    DecoderParams dp = random_decoder(vocab, 2, 3, 3, rng);
    for (auto& v : dp.O.value()) v = 0.0;
    for (auto& v : dp.b_o.value()) v = 0.0;
    auto tf = teacher_forced_logprob(dp, random_attn(2, 3, 3, rng), AttentionMode::Soft, ctx,
                                     {3, kEos});
    CHECK(close(tf.log_prob_y.item(), 2.0 * std::log(1.0 / vocab), 1e-12));
}

TEST_CASE("teacher forcing: log-prob is never positive, malformed targets rejected") {
    Rng rng(56);
    ContextSet ctx = random_ctx(2, 3, rng);
    DecoderParams dp = random_decoder(4, 2, 3, 3, rng);
    AttentionParams ap = random_attn(2, 3, 3, rng);
    auto tf = teacher_forced_logprob(dp, ap, AttentionMode::Soft, ctx, {3, 3, kEos});
    CHECK(tf.log_prob_y.item() <= 0.0);
    CHECK(tf.trace.steps.size() == 3);
    CHECK(tf.trace.steps[0].alpha.size() == 2);

    CHECK_THROWS_AS(teacher_forced_logprob(dp, ap, AttentionMode::Soft, ctx, {3, 3}),
                    ShapeError);
    CHECK_THROWS_AS(teacher_forced_logprob(dp, ap, AttentionMode::Soft, ctx, {}), ShapeError);
}

TEST_CASE("teacher forcing: total probability over short sequences stays below one") {
    Rng rng(57);
    ContextSet ctx = random_ctx(2, 3, rng);
    DecoderParams dp = random_decoder(4, 2, 3, 3, rng);
    AttentionParams ap = random_attn(2, 3, 3, rng);
    // all sequences of payload symbols {3} U {0,1} of length <= 3 ending in EOS
    double total = 0.0;
    std::vector<int> syms = {0, 1, 3};
    for (int len = 0; len <= 3; ++len) {
        std::vector<int> idx(len, 0);
        while (true) {
            std::vector<int> target;
            for (int i : idx) target.push_back(syms[i]);
            target.push_back(kEos);
            total += std::exp(teacher_forced_logprob(dp, ap, AttentionMode::Soft, ctx, target)
                                  .log_prob_y.item());
            int i = len - 1;
            while (i >= 0 && ++idx[i] == 3) idx[i--] = 0;
            if (i < 0) break;
        }
    }
    CHECK(total <= 1.0 + 1e-9);
}

TEST_CASE("teacher forcing is order-free for soft content attention") {
    Rng rng(58);
    ContextSet ctx = random_ctx(3, 3, rng);
    DecoderParams dp = random_decoder(4, 2, 3, 3, rng);
    AttentionParams ap = random_attn(2, 3, 3, rng);
    ContextSet shuffled;
    for (int i : {2, 0, 1}) {
        shuffled.vectors.push_back(ctx.vectors[i]);
        shuffled.positions.push_back(ctx.positions[i]);
    }
    const std::vector<int> target = {3, 3, kEos};
    const double a =
        teacher_forced_logprob(dp, ap, AttentionMode::Soft, ctx, target).log_prob_y.item();
    const double b =
        teacher_forced_logprob(dp, ap, AttentionMode::Soft, shuffled, target).log_prob_y.item();
    CHECK(std::abs(a - b) <= 1e-9);
}

TEST_CASE("greedy decoding: forced EOS, determinism") {
    Rng rng(59);
    ContextSet ctx = random_ctx(2, 3, rng);
    DecoderParams dp = random_decoder(4, 2, 3, 3, rng);
    AttentionParams ap = random_attn(2, 3, 3, rng);
    dp.b_o.value()[kEos] = 50.0;
    auto [out, trace] = greedy_decode(dp, ap, AttentionMode::Soft, ctx, 10);
    CHECK(out == std::vector<int>{kEos});

    dp.b_o.value()[kEos] = 0.0;
    auto a = greedy_decode(dp, ap, AttentionMode::Soft, ctx, 10);
    auto b = greedy_decode(dp, ap, AttentionMode::Soft, ctx, 10);
    CHECK(a.first == b.first);
    CHECK(a.second.total_log_prob == b.second.total_log_prob);
}

TEST_CASE("sampling respects one-hot distributions and the length cutoff") {
    Rng rng(60);
    ContextSet ctx = random_ctx(2, 3, rng);
    DecoderParams dp = random_decoder(4, 2, 3, 3, rng);
    AttentionParams ap = random_attn(2, 3, 3, rng);
    dp.b_o.value()[kEos] = 60.0;  // effectively one-hot at EOS
    Rng draw(3);
    auto [out, logp] = sample_decode(dp, ap, AttentionMode::Soft, ctx, 10, draw);
    CHECK(out == std::vector<int>{kEos});
    CHECK(std::abs(logp) <= 1e-9);

    dp.b_o.value()[kEos] = -60.0;  // EOS never sampled: runs to max length
    auto [long_out, lp] = sample_decode(dp, ap, AttentionMode::Soft, ctx, 7, draw);
    CHECK(long_out.size() == 7);
}

TEST_CASE("sampled first-symbol frequencies match the model distribution") {
    Rng rng(61);
    ContextSet ctx = random_ctx(2, 3, rng);
    DecoderParams dp = random_decoder(4, 2, 3, 3, rng);
    AttentionParams ap = random_attn(2, 3, 3, rng);
    Tensor z0 = decoder_init_state(dp, ctx);
    StepResult step = decode_step(dp, ap, AttentionMode::Soft, z0, kBos, ctx,
                                  uniform_weights(2));

    Rng draw(17);
    const int n = 10000;
    std::vector<int> counts(4, 0);
    for (int i = 0; i < n; ++i) {
        auto [out, lp] = sample_decode(dp, ap, AttentionMode::Soft, ctx, 1, draw);
        ++counts[out[0]];
    }
    for (int s = 0; s < 4; ++s)
        CHECK(std::abs(static_cast<double>(counts[s]) / n - step.dist[s]) <= 0.02);
}

TEST_CASE("beam width one bit-matches greedy decoding") {
    for (std::uint64_t seed = 70; seed < 90; ++seed) {
        Rng rng(seed);
        ContextSet ctx = random_ctx(3, 3, rng);
        DecoderParams dp = random_decoder(5, 2, 3, 3, rng);
        AttentionParams ap = random_attn(2, 3, 3, rng);
        auto greedy = greedy_decode(dp, ap, AttentionMode::Soft, ctx, 8);
        auto beam = beam_decode(dp, ap, AttentionMode::Soft, ctx, 1, 8);
        REQUIRE(beam.size() == 1);
        CHECK(beam[0].symbols == greedy.first);
        CHECK(beam[0].log_prob == greedy.second.total_log_prob);
    }
}

TEST_CASE("beam matches exhaustive enumeration on a tiny model") {
    Rng rng(62);
    ContextSet ctx = random_ctx(2, 3, rng);
    DecoderParams dp = random_decoder(3, 2, 3, 3, rng);  // vocab 3
    AttentionParams ap = random_attn(2, 3, 3, rng);
    const int max_len = 3, B = 40;  // B >= 3^3, exhaustive

    // enumerate every completed hypothesis: EOS-terminated within
    // max_len, or cut off at max_len without EOS
    struct Hyp {
        std::vector<int> symbols;
        double log_prob;
        int completed_at;
    };
    std::vector<Hyp> all;
    std::function<void(std::vector<int>&)> expand = [&](std::vector<int>& prefix) {
        for (int s = 0; s < 3; ++s) {
            prefix.push_back(s);
            const double lp = forced_symbols_logprob(dp, ap, ctx, prefix);
            if (s == kEos)
                all.push_back({prefix, lp, static_cast<int>(prefix.size())});
            else if (static_cast<int>(prefix.size()) == max_len)
                all.push_back({prefix, lp, max_len});
            else
                expand(prefix);
            prefix.pop_back();
        }
    };
    std::vector<int> prefix;
    expand(prefix);
    std::sort(all.begin(), all.end(), [](const Hyp& a, const Hyp& b) {
        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
        if (a.completed_at != b.completed_at) return a.completed_at < b.completed_at;
        return a.symbols < b.symbols;
    });

    auto beam = beam_decode(dp, ap, AttentionMode::Soft, ctx, B, max_len);
    REQUIRE(beam.size() == all.size());  // every hypothesis survives at this width
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(beam[i].symbols == all[i].symbols);
        CHECK(std::abs(beam[i].log_prob - all[i].log_prob) <= 1e-9);
    }
}

TEST_CASE("beam top-1 score is nondecreasing in the width") {
    Rng rng(63);
    ContextSet ctx = random_ctx(3, 3, rng);
    DecoderParams dp = random_decoder(5, 2, 3, 3, rng);
    AttentionParams ap = random_attn(2, 3, 3, rng);
    double prev = -1e300;
    for (int b = 1; b <= 4; ++b) {
        auto beam = beam_decode(dp, ap, AttentionMode::Soft, ctx, b, 6);
        REQUIRE(!beam.empty());
        CHECK(beam[0].log_prob >= prev - 1e-12);
        prev = beam[0].log_prob;
    }
}

TEST_CASE("pointer decoding: two contexts split probability over both orders") {
    Rng rng(64);
    ContextSet ctx = random_ctx(2, 3, rng);
    DecoderParams dp = random_pointer_decoder(3, 3, rng);
    AttentionParams ap = random_attn(2, 3, 3, rng);
    auto res = pointer_decode(dp, ap, ctx, true);
    CHECK(res.order.size() == 2);
    const double p01 = std::exp(pointer_forced_logprob(dp, ap, ctx, {0, 1}, true).item());
    const double p10 = std::exp(pointer_forced_logprob(dp, ap, ctx, {1, 0}, true).item());
    CHECK(std::abs(p01 + p10 - 1.0) <= 1e-9);
}

TEST_CASE("pointer decoding with masking always yields a permutation") {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        Rng rng(seed);
        const int m = 2 + static_cast<int>(rng.below(5));
        ContextSet ctx = random_ctx(m, 3, rng);
        DecoderParams dp = random_pointer_decoder(3, 3, rng);
        AttentionParams ap = random_attn(2, 3, 3, rng);
        auto res = pointer_decode(dp, ap, ctx, true);
        std::vector<int> sorted = res.order;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> expect(m);
        std::iota(expect.begin(), expect.end(), 0);
        CHECK(sorted == expect);
        CHECK(res.trace.steps.size() == static_cast<std::size_t>(m));
    }
}

TEST_CASE("pointer tour probabilities sum to one over all orders") {
    Rng rng(65);
    ContextSet ctx = random_ctx(4, 3, rng);
    DecoderParams dp = random_pointer_decoder(3, 3, rng);
    AttentionParams ap = random_attn(2, 3, 3, rng);
    std::vector<int> order = {0, 1, 2, 3};
    double total = 0.0;
    do {
        total += std::exp(pointer_forced_logprob(dp, ap, ctx, order, true).item());
    } while (std::next_permutation(order.begin(), order.end()));
    CHECK(std::abs(total - 1.0) <= 1e-9);
}

TEST_CASE("hard attention without an RNG falls back to argmax deterministically") {
    Rng rng(66);
    ContextSet ctx = random_ctx(3, 3, rng);
    DecoderParams dp = random_decoder(4, 2, 3, 3, rng);
    AttentionParams ap = random_attn(2, 3, 3, rng);
    auto a = greedy_decode(dp, ap, AttentionMode::Hard, ctx, 6);
    auto b = greedy_decode(dp, ap, AttentionMode::Hard, ctx, 6);
    CHECK(a.first == b.first);
    for (const auto& step : a.second.steps) CHECK(step.hard_index >= 0);
}
