#pragma once

#include <map>
#include <string>
#include <vector>

#include "attnkit/decoder.hpp"
#include "attnkit/encoder.hpp"
#include "attnkit/tasks.hpp"

namespace attnkit {

enum class TaskKind { Copy, Reverse, Monotone, Sort, Tsp };
enum class EncoderKind { BiRnn, MeanPool, Point };

TaskKind task_from_string(const std::string& s);
std::string to_string(TaskKind t);
AttentionMode attention_from_string(const std::string& s);
std::string to_string(AttentionMode m);
std::string to_string(EncoderKind e);
EncoderKind encoder_from_string(const std::string& s);

struct ModelConfig {
    TaskKind task = TaskKind::Copy;
    AttentionMode attention = AttentionMode::Soft;
    EncoderKind encoder = EncoderKind::BiRnn;
    int vocab = 13;   // symbol tasks; includes PAD/BOS/EOS
    int d_emb = 16;
    int hidden = 32;
    int d_a = 16;
    int window = 3;   // K, location-aware scoring only

    bool pointer() const { return task == TaskKind::Sort || task == TaskKind::Tsp; }
    int context_dim() const;

    std::map<std::string, std::string> to_map() const;
    static ModelConfig from_map(const std::map<std::string, std::string>& m);
};

// Ordered named parameter store; registration order is the checkpoint and
// initialization order.
class ParamStore {
public:
    Tensor add(const std::string& name, std::vector<int> shape);
    const std::vector<std::pair<std::string, Tensor>>& all() const { return params_; }
    Tensor get(const std::string& name) const;
    void zero_grad();

private:
    std::vector<std::pair<std::string, Tensor>> params_;
    std::map<std::string, std::size_t> index_;
};

// The full attention-based encoder-decoder model for one task: parameter
// construction, seeded initialization, and instance encoding.
class Model {
public:
    Model(ModelConfig config, std::uint64_t init_seed);

    const ModelConfig& config() const { return config_; }
    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }

    ContextSet encode(const TaskInstance& inst) const;
    std::vector<Tensor> embed_source(const std::vector<int>& symbols) const;

    const DecoderParams& decoder() const { return dec_; }
    const AttentionParams& attention() const { return attn_; }
    AttentionMode attention_mode() const { return config_.attention; }

    // weight matrices uniform in [-0.08, 0.08]; biases, h0 and the
    // location kernel start at zero
    void init_params(std::uint64_t seed);

private:
    ModelConfig config_;
    ParamStore store_;

    Tensor src_embed_;          // symbol tasks
    PointEncoderParams point_;  // TSP
    BiRnnParams birnn_;
    MeanPoolParams meanpool_;
    AttentionParams attn_;
    DecoderParams dec_;

    GruParams add_gru(const std::string& prefix, int hidden, int input);
};

}  // namespace attnkit
